#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "zetalab/cli/app.hpp"
#include "zetalab/error.hpp"
#include "zetalab/extremes.hpp"
#include "zetalab/numeric.hpp"

namespace zetalab::cli {

namespace {

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

// The max column of a maxima records.csv.
std::vector<double> read_maxima(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

struct MaximaRun {
  double t;
  double median;
  std::filesystem::path records;
};

}  // namespace

Json build_report(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  Json runs = Json::array();
  std::map<double, std::vector<MaximaRun>> maxima;  // by theta
  std::map<double, std::vector<std::pair<double, double>>> bbm;  // by theta: (t, median)
  for (const auto& d : dirs) {
    const Json manifest = read_json(d / "manifest.json");
    const std::string sub = manifest.value("subcommand", "");
    if (sub == "report") continue;
    Json summary = std::filesystem::exists(d / "summary.json") ? read_json(d / "summary.json") : Json::object();
    runs.push_back({{"directory", d.filename().string()},
                    {"subcommand", sub},
                    {"checks", summary.value("checks", Json::object())}});
    if (sub == "maxima" && summary["model"]["mode"] == "surrogate") {
      maxima[summary["theta"].get<double>()].push_back(
          {summary["t"].get<double>(), summary["median_max"]["value"].get<double>(), d / "records.csv"});
    } else if (sub == "bbm") {
      bbm[summary["theta"].get<double>()].emplace_back(summary["horizon"].get<double>(),
                                                       summary["median_max"]["value"].get<double>());
    }
  }

  Json fits = Json::object();
  Json aggregate = Json::object();
  Json maxima_fits = Json::array();
  for (auto& [theta, list] : maxima) {
    std::sort(list.begin(), list.end(), [](const MaximaRun& a, const MaximaRun& b) { return a.t < b.t; });
    std::vector<double> ts;
    std::vector<double> medians;
    for (const auto& r : list) {
      ts.push_back(r.t);
      medians.push_back(r.median);
    }
    if (ts.size() < 2 || ts.front() == ts.back()) continue;
    const double c = fit_log_coefficient(ts, medians, theta);
    // median ~ sqrt(1+theta) t - c log t
    maxima_fits.push_back({{"theta", theta}, {"ts", ts}, {"correction", c}, {"log_t_coefficient", -c}});
  }
  fits["maxima"] = maxima_fits;

  // Ordering of the log-t coefficients between theta = 0 and theta = 0.3 on
  // the horizons both have.
  if (maxima.count(0.0) && maxima.count(0.3)) {
    std::map<double, std::filesystem::path> a;
    std::map<double, std::filesystem::path> b;
    for (const auto& r : maxima[0.0]) a[r.t] = r.records;
    for (const auto& r : maxima[0.3]) b[r.t] = r.records;
    std::vector<double> ts;
    std::vector<std::vector<double>> ma;
    std::vector<std::vector<double>> mb;
    for (const auto& [t, path] : a) {
      if (!b.count(t)) continue;
      ts.push_back(t);
      ma.push_back(read_maxima(path));
      mb.push_back(read_maxima(b[t]));
    }
    if (ts.size() >= 2) {
      const auto boot = bootstrap_log_coefficient_ordering(ts, ma, 0.0, mb, 0.3, 500, 0);
      fits["maxima_ordering"] = {{"ts", ts},
                                 {"correction_theta_0", boot.coefficient_a},
                                 {"correction_theta_0_3", boot.coefficient_b},
                                 {"resamples", boot.resamples},
                                 {"fraction_theta_0_exceeds", boot.fraction()}};
      aggregate["maxima_ordering_at_least_95_percent"] = boot.fraction() >= 0.95;
    }
  }

  Json bbm_fits = Json::array();
  for (auto& [theta, list] : bbm) {
    std::sort(list.begin(), list.end());
    std::vector<double> ts;
    std::vector<double> medians;
    for (const auto& [t, m] : list) {
      ts.push_back(t);
      medians.push_back(m);
    }
    if (ts.size() < 2 || ts.front() == ts.back()) continue;
    const double coef = -fit_log_coefficient(ts, medians, theta);
    bbm_fits.push_back({{"theta", theta}, {"ts", ts}, {"log_t_coefficient", coef}});
    if (theta == 0.0) aggregate["bbm_log_t_coefficient_in_band"] = coef >= -1.1 && coef <= -0.45;
  }
  fits["bbm"] = bbm_fits;

  return {{"root", root.string()}, {"runs", runs}, {"fits", fits}, {"aggregate_checks", aggregate}};
}

}  // namespace zetalab::cli
