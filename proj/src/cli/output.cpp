#include "zetalab/cli/output.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>

#include "zetalab/error.hpp"

namespace zetalab::cli {

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string csv_number(std::size_t v) { return std::to_string(v); }

std::string sha256_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw ResourceError("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::operator<<(double v) { return *this << csv_number(v); }
CsvWriter& CsvWriter::operator<<(std::size_t v) { return *this << csv_number(v); }

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  if (cell_ == columns_) throw ValidationError("csv: too many cells in row");
  out_ << (cell_ ? "," : "") << v;
  ++cell_;
  return *this;
}

void CsvWriter::end_row() {
  if (cell_ != columns_) throw ValidationError("csv: row has " + std::to_string(cell_) + " cells, expected " +
                                               std::to_string(columns_));
  out_ << '\n';
  cell_ = 0;
}

RunDirectory::RunDirectory(const std::filesystem::path& root, const std::string& subcommand) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw ResourceError("cannot create output root '" + root.string() + "': " + ec.message());
  for (int n = 1; n < 100000; ++n) {
    char name[64];
    std::snprintf(name, sizeof name, "%s-%04d", subcommand.c_str(), n);
    const auto candidate = root / name;
    if (std::filesystem::create_directory(candidate, ec)) {
      path_ = candidate;
      return;
    }
    if (ec) throw ResourceError("cannot create '" + candidate.string() + "': " + ec.message());
  }
  throw ResourceError("no free run directory under '" + root.string() + "'");
}

std::ofstream RunDirectory::open(const std::string& name) {
  std::ofstream out(path_ / name, std::ios::binary);
  if (!out) throw ResourceError("cannot write '" + (path_ / name).string() + "'");
  files_.push_back(name);
  return out;
}

void RunDirectory::write_json(const std::string& name, const Json& value) {
  auto out = open(name);
  out << value.dump(2) << '\n';
  if (!out) throw ResourceError("write failed for '" + name + "'");
}

void RunDirectory::add_existing(const std::string& name) { files_.push_back(name); }

void RunDirectory::finalize(Json manifest) {
  Json files = Json::array();
  for (const auto& f : files_) {
    const auto p = path_ / f;
    files.push_back({{"name", f}, {"bytes", std::filesystem::file_size(p)}, {"sha256", sha256_hex(p)}});
  }
  manifest["files"] = files;
  const auto tmp = path_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) throw ResourceError("cannot write manifest");
  }
  std::filesystem::rename(tmp, path_ / "manifest.json");
}

}  // namespace zetalab::cli
