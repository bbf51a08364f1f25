#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include "zetalab/ballot.hpp"
#include "zetalab/barrier.hpp"
#include "zetalab/bbm.hpp"
#include "zetalab/cli/app.hpp"
#include "zetalab/error.hpp"
#include "zetalab/extremes.hpp"
#include "zetalab/frequency.hpp"
#include "zetalab/numeric.hpp"
#include "zetalab/primes.hpp"
#include "zetalab/recentering.hpp"
#include "zetalab/sampler.hpp"

namespace zetalab::cli {

namespace {

// Finite doubles as numbers, everything else as null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json with_se(double value, double se) { return Json{{"value", num(value)}, {"standard_error", num(se)}}; }

std::size_t positive_count(const Config& cfg, const std::string& section, const std::string& key) {
  const auto v = cfg.integer(section, key);
  if (v < 1) throw ValidationError(section + "." + key + " must be at least 1");
  return static_cast<std::size_t>(v);
}

struct Model {
  FrequencySet fs;
  double t = 0.0;  // number of slices as a real (log log T for primes)
  Json describe;
};

void validate_model(const Config& cfg) {
  const auto& mode = cfg.string("model", "mode");
  if (mode != "surrogate" && mode != "prime-exact") {
    throw ValidationError("model.mode must be surrogate or prime-exact, got '" + mode + "'");
  }
  if (mode == "surrogate") {
    if (cfg.integer("model", "t") < 1) throw ValidationError("model.t must be at least 1");
    positive_count(cfg, "model", "atoms_per_slice");
  } else if (!(cfg.real("model", "T") > std::exp(1.0)) || cfg.real("model", "T") > 1e12) {
    throw ValidationError("model.T must lie in (e, 1e12]");
  }
  parse_coefficient_law(cfg.string("model", "law"));
}

Model build_model(const Config& cfg, std::uint64_t seed) {
  Model m;
  if (cfg.string("model", "mode") == "surrogate") {
    const auto t = static_cast<int>(cfg.integer("model", "t"));
    RngStream rng(seed, 0, StreamPurpose::kFrequencies);
    m.fs = surrogate_frequencies(t, static_cast<int>(cfg.integer("model", "atoms_per_slice")), rng);
    m.t = t;
  } else {
    const double T = cfg.real("model", "T");
    m.fs = FrequencySet::from_primes(sieve_primes(static_cast<std::uint64_t>(std::floor(T))));
    m.t = std::log(std::log(T));
  }
  m.describe = {{"mode", to_string(m.fs.mode())},
                {"t", m.t},
                {"slices", m.fs.t_max()},
                {"atoms", m.fs.size()},
                {"sigma2", 0.5 * m.fs.total_weight()}};
  return m;
}

BarrierSpec barrier_from(const Config& cfg, const std::string& s) {
  const auto& kind = cfg.string(s, "kind");
  if (kind == "none") return BarrierSpec::none();
  if (kind == "logarithmic") return BarrierSpec::logarithmic(cfg.real(s, "horizon"), cfg.real(s, "offset"), cfg.real(s, "log_scale"));
  if (kind == "linear") return BarrierSpec::linear(cfg.real(s, "slope"), cfg.real(s, "offset"));
  if (kind == "interpolation") {
    return cfg.real(s, "alpha") > 0.0 ? BarrierSpec::interpolation_alpha(cfg.real(s, "horizon"), cfg.real(s, "alpha"))
                                      : BarrierSpec::interpolation_theta(cfg.real(s, "horizon"), cfg.real(s, "theta"));
  }
  throw ValidationError(s + ".kind must be none, logarithmic, interpolation or linear, got '" + kind + "'");
}

double bootstrap_median_se(const std::vector<double>& v, std::uint64_t seed, std::size_t resamples = 200) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  RngStream rng(seed, 0, StreamPurpose::kBootstrap);
  RunningStats s;
  std::vector<double> draw(v.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& d : draw) d = v[static_cast<std::size_t>(rng.next_u64() % v.size())];
    s.add(median(draw));
  }
  return std::sqrt(s.variance());
}

struct Context {
  const Config& cfg;
  ExperimentOptions options;
  RunDirectory& dir;
  Json& checks;
};

// ---------------------------------------------------------------- commands

Json cmd_covariance(Context& c) {
  validate_model(c.cfg);
  const auto k = c.cfg.integer("covariance", "k");
  const auto l_raw = c.cfg.integer("covariance", "l");
  if (k < 0 || l_raw < 0) throw ValidationError("covariance.k and covariance.l must be nonnegative");
  const Model m = build_model(c.cfg, c.options.seed);
  const int l = l_raw == 0 ? m.fs.t_max() : static_cast<int>(l_raw);
  if (k >= l || l > m.fs.t_max()) throw ValidationError("covariance: need 0 <= k < l <= t");
  const int k_eff = std::max<int>(1, static_cast<int>(k));  // the asymptotic form needs k >= 1
  if (k_eff >= l) throw ValidationError("covariance: need k < l (k is raised to 1 for the asymptotic form)");
  const CovarianceSummary summary = summarize_covariance(m.fs);

  auto out = c.dir.open("covariance.csv");
  CsvWriter csv(out, {"delta", "covariance", "ratio", "restricted", "regime", "prediction", "implied_constant"});
  Json rows = Json::array();
  for (double d : c.cfg.real_list("covariance", "deltas")) {
    const auto pair = summary.pair(m.fs, d);
    const auto asym = covariance_asymptotic(m.fs, d, k_eff, l);
    csv << d << pair.covariance << pair.ratio() << asym.exact << to_string(asym.regime) << asym.prediction
        << asym.implied_constant;
    csv.end_row();
    rows.push_back({{"delta", d},
                    {"covariance", num(pair.covariance)},
                    {"ratio", num(pair.ratio())},
                    {"restricted", num(asym.exact)},
                    {"regime", to_string(asym.regime)},
                    {"prediction", num(asym.prediction)},
                    {"implied_constant", num(asym.implied_constant)}});
  }
  auto sl = c.dir.open("slices.csv");
  CsvWriter slices(sl, {"k", "mass"});
  for (std::size_t i = 0; i < summary.slice_masses.size(); ++i) {
    slices << static_cast<int>(i + 1) << summary.slice_masses[i];
    slices.end_row();
  }
  c.checks["variance_positive"] = summary.sigma2 > 0.0;
  return {{"model", m.describe},
          {"sigma2", summary.sigma2},
          {"k", k_eff},
          {"l", l},
          {"slice_masses", summary.slice_masses},
          {"rows", rows}};
}

Json cmd_sample(Context& c) {
  validate_model(c.cfg);
  const double theta = c.cfg.real("sample", "theta");
  if (!(theta >= 0.0)) throw ValidationError("sample.theta must be nonnegative");
  const auto rep = c.cfg.integer("sample", "replicate");
  if (rep < 0) throw ValidationError("sample.replicate must be nonnegative");
  const CoefficientLaw law = parse_coefficient_law(c.cfg.string("model", "law"));
  const Model m = build_model(c.cfg, c.options.seed);
  const double hw = c.cfg.real("sample", "half_width") > 0.0 ? c.cfg.real("sample", "half_width") : std::exp(theta * m.t);
  const double spacing = c.cfg.real("sample", "spacing") > 0.0 ? c.cfg.real("sample", "spacing") : std::exp(-m.t);
  const Grid grid = Grid::symmetric(hw, spacing, c.options.max_points);

  RngStream rng(c.options.seed, static_cast<std::uint64_t>(rep), StreamPurpose::kCoefficients);
  const FieldSample field = sample_stationary(m.fs, grid, law, rng, c.cfg.boolean("sample", "slices"), c.options.max_points);
  {
    auto out = c.dir.open("field.csv");
    write_field_csv(field, out);
  }
  if (c.cfg.boolean("sample", "binary")) {
    write_field_binary(field, c.dir.path() / "field.bin");
    c.dir.add_existing("field.bin");
  }
  std::size_t best = 0;
  for (std::size_t n = 1; n < field.values.size(); ++n) {
    if (field.values[n] > field.values[best]) best = n;
  }
  c.checks["max_at_least_value_at_zero"] = field.values[best] >= field.values[grid.count / 2];
  return {{"model", m.describe},
          {"law", to_string(law)},
          {"replicate", rep},
          {"grid", {{"origin", grid.origin}, {"spacing", grid.spacing}, {"count", grid.count}}},
          {"max", field.values[best]},
          {"argmax", grid.point(best)},
          {"value_at_zero", field.values[grid.count / 2]}};
}

Json cmd_maxima(Context& c) {
  validate_model(c.cfg);
  MaxExperimentParams p;
  p.theta = c.cfg.real("maxima", "theta");
  p.recentering = parse_recentering_kind(c.cfg.string("maxima", "recentering"));
  p.alpha = c.cfg.real("maxima", "alpha");
  p.epsilon = c.cfg.real("maxima", "epsilon");
  if (!std::isnan(c.cfg.real("maxima", "g"))) p.g = c.cfg.real("maxima", "g");
  p.replicates = positive_count(c.cfg, "maxima", "replicates");
  p.law = parse_coefficient_law(c.cfg.string("model", "law"));
  if (!(p.theta >= 0.0)) throw ValidationError("maxima.theta must be nonnegative");
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ValidationError("maxima.alpha must lie in [0, 1]");
  const Model m = build_model(c.cfg, c.options.seed);
  p.t = m.t;
  const Grid grid = maxima_grid(p.t, p.theta, c.options.max_points);
  const auto records = run_max_experiment(m.fs, p, c.options);

  std::vector<std::string> header{"replicate", "max", "argmax", "value_at_zero", "recentered"};
  for (int k = 1; k <= m.fs.t_max(); ++k) header.push_back("S_" + std::to_string(k));
  auto out = c.dir.open("records.csv");
  CsvWriter csv(out, header);
  std::vector<double> maxima;
  std::vector<double> recentered;
  bool contained = true;
  bool endpoint = true;
  for (const auto& r : records) {
    csv << static_cast<std::size_t>(r.replicate) << r.max << r.argmax << r.value_at_zero << r.recentered;
    for (double s : r.trajectory) csv << s;
    csv.end_row();
    maxima.push_back(r.max);
    recentered.push_back(r.recentered);
    contained = contained && r.max >= r.value_at_zero;
    endpoint = endpoint && std::fabs(r.trajectory.back() - r.max) <= 1e-9;
  }
  RunningStats stats;
  for (double v : recentered) stats.add(v);
  c.checks["max_at_least_value_at_zero"] = contained;
  c.checks["trajectory_endpoint_matches_max"] = endpoint;
  const double centre = records.front().max - records.front().recentered;
  return {{"model", m.describe},
          {"theta", p.theta},
          {"t", p.t},
          {"recentering", to_string(p.recentering)},
          {"recentering_value", centre},
          {"grid_points", grid.count},
          {"replicates", p.replicates},
          {"median_max", with_se(median(maxima), bootstrap_median_se(maxima, c.options.seed))},
          {"median_recentered", with_se(median(recentered), bootstrap_median_se(recentered, c.options.seed))},
          {"mean_recentered", with_se(stats.mean(), stats.stderr_mean())},
          {"quantiles_recentered",
           {{"q10", quantile(recentered, 0.1)}, {"q50", quantile(recentered, 0.5)}, {"q90", quantile(recentered, 0.9)}}}};
}

Json cmd_tail(Context& c) {
  validate_model(c.cfg);
  const auto ys = c.cfg.real_list("tail", "y");
  if (ys.empty()) throw ValidationError("tail.y must not be empty");
  for (double y : ys) {
    if (!(y > 0.0)) throw ValidationError("tail.y values must be positive");
  }
  TailParams p;
  p.replicates = positive_count(c.cfg, "tail", "replicates");
  p.mixture_spacing = c.cfg.real("tail", "mixture_spacing");
  p.half_width = c.cfg.real("tail", "half_width");
  if (!(p.mixture_spacing >= 0.0) || !(p.half_width > 0.0)) {
    throw ValidationError("tail.mixture_spacing must be nonnegative and tail.half_width positive");
  }
  const Model m = build_model(c.cfg, c.options.seed);
  p.t = m.t;

  auto out = c.dir.open("tail.csv");
  CsvWriter csv(out, {"y", "level", "lambda", "probability", "standard_error", "log_standard_error", "ci_lower",
                      "ci_upper", "ess", "draws", "hits", "degraded"});
  auto contrib_out = c.dir.open("contributions.csv");
  CsvWriter contrib(contrib_out, {"y", "tilt_point", "contribution"});
  Json rows = Json::array();
  std::vector<double> probs;
  std::vector<double> fit_ys;
  bool any_degraded = false;
  for (double y : ys) {
    p.y = y;
    const TailEstimate e = tail_probability_is(m.fs, p, c.options);
    csv << y << e.level << e.lambda << e.probability << e.standard_error << e.log_standard_error << e.ci_lower
        << e.ci_upper << e.effective_sample_size << e.draws << e.hits << std::string(e.degraded ? "true" : "false");
    csv.end_row();
    for (std::size_t i = 0; i < e.tilt_points.size(); ++i) {
      contrib << y << e.tilt_points[i] << e.contributions[i];
      contrib.end_row();
    }
    rows.push_back({{"y", y},
                    {"level", e.level},
                    {"lambda", e.lambda},
                    {"probability", with_se(e.probability, e.standard_error)},
                    {"log_standard_error", num(e.log_standard_error)},
                    {"ci", {num(e.ci_lower), num(e.ci_upper)}},
                    {"ess", e.effective_sample_size},
                    {"draws", e.draws},
                    {"degraded", e.degraded}});
    any_degraded = any_degraded || e.degraded;
    if (e.probability > 0.0) {
      fit_ys.push_back(y);
      probs.push_back(e.probability);
    }
  }
  Json summary{{"model", m.describe}, {"t", m.t}, {"levels", rows}};
  c.checks["ess_at_least_one_percent"] = !any_degraded;
  if (fit_ys.size() >= 3) {
    const TailSlopeFit fit = fit_tail_slope(fit_ys, probs, m.t);
    summary["slope"] = with_se(fit.slope, fit.slope_se);
    summary["intercept"] = fit.intercept;
    summary["rss"] = fit.rss;
    if (fit.quadratic_available) {
      summary["quadratic_fit"] = {{"slope", fit.quadratic_slope},
                                  {"curvature", fit.quadratic_curvature},
                                  {"rss", fit.quadratic_rss},
                                  {"not_worse", fit.quadratic_rss <= fit.rss * (1.0 + 1e-12)}};
    }
    c.checks["slope_in_band"] = fit.slope >= -2.6 && fit.slope <= -1.6;
  }
  return summary;
}

Json cmd_barrier(Context& c) {
  const auto& source = c.cfg.string("barrier", "source");
  if (source != "iid" && source != "field") throw ValidationError("barrier.source must be iid or field");
  const auto j = c.cfg.integer("barrier", "j");
  if (j < 1) throw ValidationError("barrier.j must be at least 1");
  const auto xs = c.cfg.real_list("barrier", "x");
  if (xs.empty()) throw ValidationError("barrier.x must not be empty");
  BarrierEventParams p;
  p.source = source == "iid" ? WalkSource::kIid : WalkSource::kField;
  p.barrier = barrier_from(c.cfg, "barrier");
  p.j = static_cast<int>(j);
  p.replicates = positive_count(c.cfg, "barrier", "replicates");
  p.step_variance = c.cfg.real("barrier", "step_variance");
  if (p.barrier.bounded()) {
    for (double x : xs) {
      if (x > p.barrier(p.j)) throw ValidationError("barrier.x values must not exceed barrier(j)");
    }
  }
  std::optional<Model> model;
  BallotOptions bo;
  bo.step_variance = p.step_variance;
  if (p.source == WalkSource::kField) {
    validate_model(c.cfg);
    model = build_model(c.cfg, c.options.seed);
    if (p.j > model->fs.t_max()) throw ValidationError("barrier.j exceeds the number of slices");
    for (int k = 1; k <= p.j; ++k) bo.step_variances.push_back(0.5 * model->fs.slice_weight(k));
  }

  auto out = c.dir.open("barrier.csv");
  CsvWriter csv(out, {"x", "hits", "trials", "probability", "standard_error", "ci_lower", "ci_upper", "oracle",
                      "oracle_error", "z_score"});
  Json rows = Json::array();
  bool agree = true;
  for (double x : xs) {
    p.x = x;
    const auto e = barrier_event_prob(model ? &model->fs : nullptr, p, c.options);
    double oracle = std::numeric_limits<double>::quiet_NaN();
    double oracle_err = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto r = ballot_exact(p.barrier, p.j, {{x - 1.0, x, 0.0}}, bo);
      oracle = r.bins[0].probability;
      oracle_err = r.bins[0].error;
    } catch (const NonConvergenceError& err) {
      std::cerr << "zetalab: transfer operator did not converge for x=" << x << ": " << err.what() << '\n';
    }
    const double se = std::max(e.standard_error, 1.0 / static_cast<double>(e.trials));
    const double z = (e.probability - oracle) / se;
    if (std::isfinite(z) && std::fabs(z) > 3.0) agree = false;
    csv << x << e.hits << e.trials << e.probability << e.standard_error << e.interval.lower << e.interval.upper
        << oracle << oracle_err << z;
    csv.end_row();
    rows.push_back({{"x", x},
                    {"probability", with_se(e.probability, e.standard_error)},
                    {"ci", {e.interval.lower, e.interval.upper}},
                    {"one_sided", e.interval.one_sided},
                    {"oracle", {{"value", num(oracle)}, {"quadrature_error", num(oracle_err)}}},
                    {"z_score", num(z)}});
  }
  c.checks["oracle_within_3_se"] = agree;
  Json summary{{"source", source}, {"barrier", p.barrier.describe()}, {"j", p.j}, {"rows", rows}};
  if (model) summary["model"] = model->describe;
  return summary;
}

Json cmd_zdelta(Context& c) {
  validate_model(c.cfg);
  if (c.cfg.string("model", "mode") != "surrogate") throw ValidationError("zdelta needs model.mode = surrogate");
  ZDeltaParams p;
  p.alpha = c.cfg.real("zdelta", "alpha");
  p.theta = c.cfg.real("zdelta", "theta");
  p.epsilon = c.cfg.real("zdelta", "epsilon");
  p.deltas = c.cfg.real_list("zdelta", "deltas");
  p.replicates = positive_count(c.cfg, "zdelta", "replicates");
  if (p.deltas.empty()) throw ValidationError("zdelta.deltas must not be empty");
  for (double d : p.deltas) {
    if (!(d > 0.0)) throw ValidationError("zdelta.deltas must be positive");
  }
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ValidationError("zdelta.alpha must lie in [0, 1]");
  const Model m = build_model(c.cfg, c.options.seed);
  p.t = m.fs.t_max();
  const ZDeltaResult r = z_delta(m.fs, p, c.options);

  std::vector<std::string> header{"replicate"};
  for (double d : p.deltas) header.push_back("Z_" + csv_number(d));
  auto out = c.dir.open("counts.csv");
  CsvWriter csv(out, header);
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    csv << i;
    for (std::size_t v : r.counts[i]) csv << v;
    csv.end_row();
  }
  auto sout = c.dir.open("zdelta.csv");
  CsvWriter scsv(sout, {"delta", "mean", "standard_error", "variance", "second_moment", "p_positive", "ci_lower",
                        "ci_upper", "paley_zygmund", "tilted_probability", "tilted_weighted", "identity_prediction",
                        "exact_prediction"});
  Json rows = Json::array();
  bool identity_ok = true;
  bool exact_ok = true;
  bool pz_ok = true;
  bool monotone = true;
  for (const auto& cnt : r.counts) {
    for (std::size_t d = 0; d < p.deltas.size(); ++d) {
      for (std::size_t e = 0; e < p.deltas.size(); ++e) {
        if (p.deltas[d] <= p.deltas[e] && cnt[d] > cnt[e]) monotone = false;
      }
    }
  }
  for (const auto& s : r.summaries) {
    scsv << s.delta << s.mean << s.standard_error << s.variance << s.second_moment << s.p_positive
         << s.interval_positive.lower << s.interval_positive.upper << s.paley_zygmund << s.tilted_probability
         << s.tilted_weighted << s.identity_prediction << s.exact_prediction;
    scsv.end_row();
    const double rel_identity = std::fabs(s.mean / s.identity_prediction - 1.0);
    const double rel_exact = std::fabs(s.mean / s.exact_prediction - 1.0);
    identity_ok = identity_ok && rel_identity <= 0.15;
    exact_ok = exact_ok && rel_exact <= 0.15;
    pz_ok = pz_ok && s.p_positive >= 0.5 * s.paley_zygmund;
    rows.push_back({{"delta", s.delta},
                    {"mean", with_se(s.mean, s.standard_error)},
                    {"variance", s.variance},
                    {"second_moment", s.second_moment},
                    {"p_positive", {{"value", s.p_positive}, {"ci", {s.interval_positive.lower, s.interval_positive.upper}}}},
                    {"paley_zygmund", s.paley_zygmund},
                    {"tilted_probability", s.tilted_probability},
                    {"tilted_weighted", s.tilted_weighted},
                    {"identity_prediction", s.identity_prediction},
                    {"identity_relative_error", rel_identity},
                    {"exact_prediction", s.exact_prediction},
                    {"exact_relative_error", rel_exact}});
  }
  c.checks["identity_within_15_percent"] = identity_ok;
  c.checks["weighted_identity_within_15_percent"] = exact_ok;
  c.checks["paley_zygmund_consistent"] = pz_ok;
  c.checks["monotone_in_delta"] = monotone;
  return {{"model", m.describe},
          {"t", p.t},
          {"alpha", p.alpha},
          {"theta", r.theta},
          {"mu", r.mu},
          {"lambda", r.lambda},
          {"sigma2", r.sigma2},
          {"grid_points", r.grid_points},
          {"replicates", p.replicates},
          {"rows", rows}};
}

Json cmd_decouple(Context& c) {
  validate_model(c.cfg);
  DecouplingParams p;
  p.k = static_cast<int>(c.cfg.integer("decouple", "k"));
  p.separation_multiples = c.cfg.real_list("decouple", "multiples");
  p.event_lo = c.cfg.real("decouple", "event_lo");
  p.event_hi = c.cfg.real("decouple", "event_hi");
  p.replicates = positive_count(c.cfg, "decouple", "replicates");
  if (p.separation_multiples.empty()) throw ValidationError("decouple.multiples must not be empty");
  for (double m : p.separation_multiples) {
    if (!(m >= 1.0)) throw ValidationError("decouple.multiples must be at least 1");
  }
  if (!(p.event_hi > p.event_lo)) throw ValidationError("decouple: event_lo must be below event_hi");
  const Model m = build_model(c.cfg, c.options.seed);
  const DecouplingReport rep = decoupling_check(m.fs, p, c.options);

  auto out = c.dir.open("decouple.csv");
  CsvWriter csv(out, {"multiple", "separation", "correlation", "p_first", "p_second", "p_joint", "se_joint",
                      "relative_error", "exact_marginal", "exact_joint", "exact_relative_error", "envelope"});
  Json rows = Json::array();
  bool far_ok = true;
  for (const auto& r : rep.rows) {
    csv << r.multiple << r.separation << r.correlation << r.p_first << r.p_second << r.p_joint << r.se_joint
        << r.relative_error << r.exact_marginal << r.exact_joint << r.exact_relative_error << r.envelope;
    csv.end_row();
    const double product = r.p_first * r.p_second;
    const double rel_se = product > 0.0 ? r.se_joint / product : std::numeric_limits<double>::quiet_NaN();
    if (r.multiple >= 100.0 && !(r.relative_error <= 0.2 + 2.0 * rel_se)) far_ok = false;
    rows.push_back({{"multiple", r.multiple},
                    {"separation", r.separation},
                    {"correlation", r.correlation},
                    {"p_joint", with_se(r.p_joint, r.se_joint)},
                    {"p_first", r.p_first},
                    {"p_second", r.p_second},
                    {"relative_error", with_se(r.relative_error, rel_se)},
                    {"exact_joint", r.exact_joint},
                    {"exact_relative_error", r.exact_relative_error},
                    {"envelope", r.envelope}});
  }
  c.checks["far_separation_relative_error_at_most_0_2"] = far_ok;
  return {{"model", m.describe},
          {"k", p.k},
          {"event", {num(p.event_lo), num(p.event_hi)}},
          {"variance", rep.variance},
          {"envelope_constant", rep.envelope_constant},
          {"rows", rows}};
}

Json cmd_discretize(Context& c) {
  validate_model(c.cfg);
  DiscretizationParams p;
  for (auto j : c.cfg.int_list("discretize", "j")) p.j_values.push_back(static_cast<int>(j));
  p.y_values = c.cfg.real_list("discretize", "y");
  p.replicates = positive_count(c.cfg, "discretize", "replicates");
  p.subdivisions = static_cast<int>(positive_count(c.cfg, "discretize", "subdivisions"));
  if (p.j_values.empty() || p.y_values.empty()) throw ValidationError("discretize.j and discretize.y must not be empty");
  const Model m = build_model(c.cfg, c.options.seed);
  const auto rows = discretization_check(m.fs, p, c.options);

  auto out = c.dir.open("discretize.csv");
  CsvWriter csv(out, {"j", "y", "subdivisions", "hits_max", "hits_point", "trials", "p_max", "p_point", "ci_lower",
                      "ci_upper", "reference", "ratio"});
  Json jrows = Json::array();
  double worst = 0.0;
  bool contained = true;
  for (const auto& r : rows) {
    csv << r.j << r.y << r.subdivisions << r.hits_max << r.hits_point << r.trials << r.p_max << r.p_point
        << r.interval_max.lower << r.interval_max.upper << r.reference << r.ratio;
    csv.end_row();
    worst = std::max(worst, r.ratio);
    contained = contained && r.hits_max >= r.hits_point;
    const double se = std::sqrt(r.p_max * (1.0 - r.p_max) / static_cast<double>(r.trials));
    jrows.push_back({{"j", r.j},
                     {"y", r.y},
                     {"p_max", with_se(r.p_max, se)},
                     {"p_point", r.p_point},
                     {"ratio", with_se(r.ratio, se / r.reference)}});
  }
  c.checks["max_dominates_point"] = contained;
  c.checks["ratio_finite"] = std::isfinite(worst);
  return {{"model", m.describe}, {"subdivisions", p.subdivisions}, {"max_ratio", worst}, {"rows", jrows}};
}

Json cmd_ballot(Context& c) {
  const BarrierSpec barrier = barrier_from(c.cfg, "ballot");
  const auto js = c.cfg.int_list("ballot", "j");
  const auto xs = c.cfg.real_list("ballot", "x");
  const double width = c.cfg.real("ballot", "width");
  if (js.empty() || xs.empty()) throw ValidationError("ballot.j and ballot.x must not be empty");
  if (!(width > 0.0)) throw ValidationError("ballot.width must be positive");
  for (auto j : js) {
    if (j < 1) throw ValidationError("ballot.j values must be at least 1");
  }
  BallotOptions bo;
  bo.grid_step = c.cfg.real("ballot", "grid_step");
  bo.step_variance = c.cfg.real("ballot", "step_variance");
  bo.relative_tolerance = c.cfg.real("ballot", "tolerance");
  bo.max_refinements = static_cast<int>(c.cfg.integer("ballot", "max_refinements"));
  const double rate = c.cfg.real("ballot", "weight_rate");
  const auto& kind = c.cfg.string("ballot", "kind");

  auto out = c.dir.open("ballot.csv");
  CsvWriter csv(out, {"j", "bin_lo", "bin_hi", "probability", "error", "refinements", "grid_step", "upper_factor",
                      "upper_ratio", "lower_factor", "lower_ratio"});
  Json rows = Json::array();
  for (auto jj : js) {
    const int j = static_cast<int>(jj);
    std::vector<EndpointBin> bins;
    for (double x : xs) bins.push_back({x - width, x, rate});
    const BallotResult r = ballot_exact(barrier, j, bins, bo);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const double x = bins[b].hi;
      double upper = std::numeric_limits<double>::quiet_NaN();
      double lower = std::numeric_limits<double>::quiet_NaN();
      try {
        if (kind == "linear") {
          upper = ballot_bound(BallotBoundKind::kLinearUpper, barrier.slope, barrier.offset, x, j);
          lower = ballot_bound(BallotBoundKind::kLinearLower, barrier.slope, barrier.offset, x, j);
        } else if (kind == "logarithmic") {
          upper = ballot_bound(BallotBoundKind::kLogUpper, 0.0, barrier.offset, x, j,
                               static_cast<int>(std::lround(barrier.horizon)));
        }
      } catch (const DomainError&) {
        // Outside the bound's domain; leave the factor empty.
      }
      const auto& bp = r.bins[b];
      csv << j << bins[b].lo << bins[b].hi << bp.probability << bp.error << r.refinements << r.grid_step << upper
          << bp.probability / upper << lower << bp.probability / lower;
      csv.end_row();
      rows.push_back({{"j", j},
                      {"bin", {bins[b].lo, bins[b].hi}},
                      {"probability", {{"value", bp.probability}, {"quadrature_error", bp.error}}},
                      {"upper_ratio", num(bp.probability / upper)},
                      {"lower_ratio", num(bp.probability / lower)}});
    }
  }
  c.checks["converged"] = true;
  return {{"barrier", barrier.describe()}, {"weight_rate", rate}, {"rows", rows}};
}

Json cmd_bbm(Context& c) {
  BbmParams p;
  p.horizon = c.cfg.real("bbm", "horizon");
  const double theta = c.cfg.real("bbm", "theta");
  if (!(p.horizon >= 0.0) || !(theta >= 0.0)) throw ValidationError("bbm.horizon and bbm.theta must be nonnegative");
  const std::size_t replicates = positive_count(c.cfg, "bbm", "replicates");
  p.copies = ensemble_copies(p.horizon, theta);
  const auto records = simulate_ensemble(p, replicates, c.options);

  const auto last = static_cast<int>(std::floor(p.horizon));
  std::vector<std::string> header{"replicate", "copies", "max", "particle_count"};
  for (int k = 0; k <= last; ++k) header.push_back("trajectory_" + std::to_string(k));
  auto out = c.dir.open("bbm.csv");
  CsvWriter csv(out, header);
  std::vector<double> maxima;
  RunningStats count;
  for (const auto& r : records) {
    csv << static_cast<std::size_t>(r.replicate) << r.copies << r.max << r.particle_count;
    for (double v : r.trajectory) csv << v;
    csv.end_row();
    maxima.push_back(r.max);
    count.add(static_cast<double>(r.particle_count));
  }
  const EnvelopeReport env =
      envelope_check(records, p.horizon, theta, c.cfg.real("bbm", "envelope_constant"),
                     c.cfg.real("bbm", "line_constant"), static_cast<int>(c.cfg.integer("bbm", "line_max_k")));
  const double expected = static_cast<double>(p.copies) * std::exp(p.horizon);
  const double z = (count.mean() - expected) / std::sqrt(static_cast<double>(p.copies) * expected * (std::exp(p.horizon) - 1.0) / replicates);
  c.checks["particle_count_within_4_se"] = !(std::fabs(z) > 4.0);
  c.checks["envelope_violations_at_most_5_percent"] = env.envelope_fraction() <= 0.05;
  return {{"horizon", p.horizon},
          {"theta", theta},
          {"copies", p.copies},
          {"replicates", replicates},
          {"median_max", with_se(median(maxima), bootstrap_median_se(maxima, c.options.seed))},
          {"mean_particle_count", with_se(count.mean(), count.stderr_mean())},
          {"expected_particle_count", expected},
          {"envelope",
           {{"constant", env.envelope_constant},
            {"violation_fraction", env.envelope_fraction()},
            {"line_constant", env.line_constant},
            {"line_max_k", env.line_max_k},
            {"line_violation_fraction", env.line_fraction()}}}};
}

Json cmd_report(Context& c, const std::filesystem::path& default_root) {
  const auto& in = c.cfg.string("report", "input");
  const std::filesystem::path root = in.empty() ? default_root : std::filesystem::path(in);
  if (!std::filesystem::is_directory(root)) throw ValidationError("report.input '" + root.string() + "' is not a directory");
  Json report = build_report(root);
  auto out = c.dir.open("report.csv");
  CsvWriter csv(out, {"run", "subcommand", "check", "passed"});
  bool all = true;
  for (const auto& run : report["runs"]) {
    for (const auto& [name, value] : run["checks"].items()) {
      csv << run["directory"].get<std::string>() << run["subcommand"].get<std::string>() << name
          << std::string(value.get<bool>() ? "true" : "false");
      csv.end_row();
      all = all && value.get<bool>();
    }
  }
  for (const auto& [name, value] : report["aggregate_checks"].items()) {
    csv << std::string("*") << std::string("report") << name << std::string(value.get<bool>() ? "true" : "false");
    csv.end_row();
    all = all && value.get<bool>();
  }
  report["all_checks_passed"] = all;
  c.checks["all_checks_passed"] = all;
  c.dir.write_json("report.json", report);
  return report;
}

Json dispatch(Context& c, const std::string& s, const std::filesystem::path& root) {
  if (s == "covariance") return cmd_covariance(c);
  if (s == "sample") return cmd_sample(c);
  if (s == "maxima") return cmd_maxima(c);
  if (s == "tail") return cmd_tail(c);
  if (s == "barrier") return cmd_barrier(c);
  if (s == "zdelta") return cmd_zdelta(c);
  if (s == "decouple") return cmd_decouple(c);
  if (s == "discretize") return cmd_discretize(c);
  if (s == "ballot") return cmd_ballot(c);
  if (s == "bbm") return cmd_bbm(c);
  return cmd_report(c, root);
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"covariance", "sample",     "maxima", "tail",   "barrier", "zdelta",
                                              "decouple",   "discretize", "ballot", "bbm",    "report"};
  return names;
}

Config resolve_config(const Invocation& inv) {
  Config cfg;
  if (!inv.config_path.empty()) cfg.load_file(inv.config_path);
  std::vector<std::string> all = inv.overrides;
  if (inv.seed) all.push_back("run.seed=" + std::to_string(*inv.seed));
  if (inv.threads) all.push_back("run.threads=" + std::to_string(*inv.threads));
  if (inv.out) all.push_back("run.out=" + *inv.out);
  cfg.apply_overrides(all);
  if (cfg.integer("run", "seed") < 0) throw ValidationError("run.seed must be nonnegative");
  if (cfg.integer("run", "threads") < 1) throw ValidationError("run.threads must be at least 1");
  if (cfg.integer("run", "max_points") < 1) throw ValidationError("run.max_points must be at least 1");
  return cfg;
}

std::filesystem::path output_root(const Config& cfg) {
  if (!cfg.string("run", "out").empty()) return cfg.string("run", "out");
  if (const char* env = std::getenv("ZETALAB_OUT"); env != nullptr && *env != '\0') return env;
  return "results";
}

std::filesystem::path run(const Invocation& inv) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), inv.subcommand) == names.end()) {
    throw ValidationError("unknown subcommand '" + inv.subcommand + "'");
  }
  const Config cfg = resolve_config(inv);
  const auto root = output_root(cfg);
  ExperimentOptions options;
  options.seed = static_cast<std::uint64_t>(cfg.integer("run", "seed"));
  options.threads = static_cast<int>(cfg.integer("run", "threads"));
  options.max_points = static_cast<std::size_t>(cfg.integer("run", "max_points"));
  std::cerr << "zetalab: " << inv.subcommand << " seed=" << options.seed << " threads=" << options.threads << '\n';

  const auto start = std::chrono::steady_clock::now();
  RunDirectory dir(root, inv.subcommand);
  Json checks = Json::object();
  Context ctx{cfg, options, dir, checks};
  Json result;
  const auto& s = inv.subcommand;
  try {
    result = dispatch(ctx, s, root);
  } catch (...) {
    // Nothing of a failed run is kept; earlier runs are untouched.
    std::error_code ec;
    std::filesystem::remove_all(dir.path(), ec);
    throw;
  }

  Json summary{{"subcommand", s}, {"seed", options.seed}};
  for (auto& [k, v] : result.items()) summary[k] = v;
  summary["checks"] = checks;
  dir.write_json("summary.json", summary);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest{{"artifact", "zetalab"},
                {"artifact_version", kArtifactVersion},
                {"subcommand", s},
                {"config",
                 {{"file", cfg.source_path()},
                  {"text", cfg.source_text()},
                  {"overrides", cfg.overrides()},
                  {"resolved", cfg.render()}}},
                {"seed_lineage", {{"master_seed", options.seed}, {"replicate_streams", "philox4x32-10 (seed, replicate, purpose)"}}},
                {"threads", options.threads},
                {"wall_time_seconds", wall}};
  dir.finalize(manifest);
  return dir.path();
}

}  // namespace zetalab::cli
