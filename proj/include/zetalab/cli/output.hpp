#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace zetalab::cli {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; nan and inf spelled out.
std::string csv_number(double v);
std::string csv_number(std::size_t v);

std::string sha256_hex(const std::filesystem::path& path);

/// Comma-separated, LF-terminated, header first.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::size_t v);
  CsvWriter& operator<<(int v) { return *this << static_cast<double>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t cell_ = 0;
};

/// Fresh <root>/<subcommand>-NNNN directory. Files are registered as they are
/// written; finalize() writes manifest.json last through an atomic rename.
class RunDirectory {
 public:
  RunDirectory(const std::filesystem::path& root, const std::string& subcommand);

  const std::filesystem::path& path() const { return path_; }
  std::ofstream open(const std::string& name);
  void write_json(const std::string& name, const Json& value);
  void add_existing(const std::string& name);
  void finalize(Json manifest);

 private:
  std::filesystem::path path_;
  std::vector<std::string> files_;
};

}  // namespace zetalab::cli
