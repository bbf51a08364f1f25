#include "zetalab/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zetalab/error.hpp"
#include "zetalab/parallel.hpp"

namespace zetalab {

namespace {

struct Node {
  double time;
  double position;
};

struct Frame {
  double time;
  double position;
  std::size_t depth;
};

struct CopyResult {
  double max = -std::numeric_limits<double>::infinity();
  std::size_t particles = 0;
  std::vector<Node> path;  // birth points of the maximizer's ancestors, then its end point
};

// Depth-first exact simulation of one tree.
CopyResult simulate_copy(double horizon, RngStream& rng, std::size_t cap, std::size_t already) {
  CopyResult out;
  std::vector<Frame> stack{{0.0, 0.0, 0}};
  std::vector<Node> path;
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    path.resize(f.depth + 1);
    path[f.depth] = {f.time, f.position};
    const double life = rng.exponential(1.0);
    if (f.time + life >= horizon) {
      const double dt = horizon - f.time;
      const double end = f.position + std::sqrt(0.5 * dt) * rng.normal();
      ++out.particles;
      if (out.particles + already > cap) {
        throw ResourceError("bbm: particle count exceeded " + std::to_string(cap) + " (reached at time " +
                            std::to_string(f.time) + ", depth " + std::to_string(f.depth) + ")");
      }
      if (end > out.max) {
        out.max = end;
        out.path = path;
        out.path.push_back({horizon, end});
      }
      continue;
    }
    const double split = f.position + std::sqrt(0.5 * life) * rng.normal();
    stack.push_back({f.time + life, split, f.depth + 1});
    stack.push_back({f.time + life, split, f.depth + 1});
  }
  return out;
}

// Positions at integer times by Brownian bridges between recorded events.
std::vector<double> integer_trajectory(const std::vector<Node>& path, double horizon, RngStream& rng) {
  const auto last = static_cast<int>(std::floor(horizon));
  std::vector<double> traj(static_cast<std::size_t>(last) + 1, 0.0);
  std::size_t seg = 0;
  Node left = path.front();
  for (int k = 1; k <= last; ++k) {
    const double tk = k;
    while (seg + 1 < path.size() && path[seg + 1].time < tk) {
      ++seg;
      left = path[seg];
    }
    const Node& right = path[seg + 1];
    if (right.time == tk) {
      traj[static_cast<std::size_t>(k)] = right.position;
      continue;
    }
    const double span = right.time - left.time;
    const double a = tk - left.time;
    const double mean = left.position + (right.position - left.position) * a / span;
    const double var = 0.5 * a * (right.time - tk) / span;
    const double v = mean + std::sqrt(var) * rng.normal();
    traj[static_cast<std::size_t>(k)] = v;
    left = {tk, v};
  }
  return traj;
}

void validate(const BbmParams& p, std::size_t copies) {
  if (!(p.horizon >= 0.0) || !std::isfinite(p.horizon)) throw DomainError("bbm: horizon must be finite and >= 0");
  if (copies < 1) throw DomainError("bbm: copies must be at least 1");
  const double expected = static_cast<double>(copies) * std::exp(p.horizon);
  if (expected > p.max_expected_particles) {
    throw ResourceError("bbm: copies * e^t = " + std::to_string(expected) + " exceeds the cap " +
                        std::to_string(p.max_expected_particles));
  }
}

}  // namespace

std::size_t ensemble_copies(double t, double theta) {
  if (!(t >= 0.0) || !(theta >= 0.0)) throw DomainError("ensemble_copies: need t >= 0 and theta >= 0");
  const double c = std::ceil(std::exp(t * theta) - 1e-12);
  if (!(c < 1e15)) throw ResourceError("ensemble_copies: too many copies");
  return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

BbmRecord simulate_bbm_replicate(const BbmParams& params, std::uint64_t seed, std::uint64_t replicate) {
  validate(params, params.copies);
  BbmRecord rec;
  rec.replicate = replicate;
  rec.copies = params.copies;
  rec.lineage = {seed, replicate};
  CopyResult best;
  for (std::size_t c = 0; c < params.copies; ++c) {
    RngStream rng(seed, replicate, static_cast<std::uint32_t>(StreamPurpose::kBbmCopyBase) + static_cast<std::uint32_t>(c));
    CopyResult r = simulate_copy(params.horizon, rng, params.max_particles, rec.particle_count);
    rec.particle_count += r.particles;
    if (c == 0 || r.max > best.max) {
      best = std::move(r);
      rec.best_copy = c;
    }
  }
  rec.max = best.max;
  RngStream bridge(seed, replicate, StreamPurpose::kBridge);
  rec.trajectory = integer_trajectory(best.path, params.horizon, bridge);
  return rec;
}

std::vector<BbmRecord> simulate_ensemble(const BbmParams& params, std::size_t replicates,
                                         const ExperimentOptions& options) {
  validate(params, params.copies);
  std::vector<BbmRecord> out(replicates);
  parallel_for(replicates, options.threads,
               [&](std::size_t r) { out[r] = simulate_bbm_replicate(params, options.seed, r); });
  return out;
}

std::vector<BbmRecord> simulate_bbm(const BbmParams& params, std::size_t replicates, const ExperimentOptions& options) {
  BbmParams single = params;
  single.copies = 1;
  return simulate_ensemble(single, replicates, options);
}

EnvelopeReport envelope_check(const std::vector<BbmRecord>& records, double t, double theta, double envelope_constant,
                              double line_constant, int line_max_k) {
  EnvelopeReport rep;
  rep.envelope_constant = envelope_constant;
  rep.line_constant = line_constant;
  rep.line_max_k = line_max_k;
  rep.replicates = records.size();
  for (const auto& r : records) {
    bool env = false;
    bool line = false;
    for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
      const double kd = static_cast<double>(k);
      const double x = r.trajectory[k];
      if (x > std::sqrt(kd * (kd + t * theta)) + envelope_constant) env = true;
      if (static_cast<int>(k) <= line_max_k && x > kd + line_constant) line = true;
    }
    rep.envelope_violations += env;
    rep.line_violations += line;
  }
  return rep;
}

}  // namespace zetalab
