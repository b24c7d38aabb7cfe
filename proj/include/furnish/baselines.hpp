#pragma once

// Search baselines over complete layouts: Metropolis-Hastings annealing,
// a multi-objective particle swarm and uniform random sampling. All of them
// optimize the same score, which decodes a flat (x, y, k) vector item by item.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "furnish/env.hpp"

namespace furnish::baselines {

/// (x, y, k) per item, in the environment's placement order.
using LayoutVector = std::vector<double>;

inline constexpr double kInvalidItemPenalty = 0.5;

struct SearchBudget {
  int max_evaluations = 20000;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_evaluations < 1) throw std::invalid_argument("search budget must be positive");
  }
};

struct ScoreDetail {
  double score = 0.0;
  std::vector<PlacedItem> placed;  // the validly placed items
  RewardBreakdown breakdown;       // of `placed`
  int invalid = 0;

  /// Per-guideline objectives used by the swarm archive.
  std::array<double, 6> objectives() const {
    auto c = breakdown.components();
    for (double& v : c) v -= kInvalidItemPenalty * invalid;
    return c;
  }
};

inline int quantize_rotation(double k) { return std::clamp(static_cast<int>(std::floor(k)), 0, 3); }

/// Items that fail the validity test are skipped and each costs
/// kInvalidItemPenalty; the rest are scored with the composite reward.
inline ScoreDetail score_detail(const LayoutVector& vec, const LayoutEnv& env) {
  const auto& items = env.items();
  if (vec.size() != 3 * items.size()) throw std::invalid_argument("layout vector has the wrong length");
  ScoreDetail d;
  for (std::size_t i = 0; i < items.size(); ++i) {
    PlacedItem p = place(items[i], {vec[3 * i], vec[3 * i + 1]}, Rotation(quantize_rotation(vec[3 * i + 2])));
    if (valid_placement(p.footprint, d.placed, env.config().room)) d.placed.push_back(std::move(p));
    else ++d.invalid;
  }
  d.breakdown = composite_reward(d.placed, *env.config().catalog, env.config().room, env.raster(), env.config().mask);
  d.score = d.breakdown.r_composite - kInvalidItemPenalty * d.invalid;
  return d;
}

inline double score(const LayoutVector& vec, const LayoutEnv& env) { return score_detail(vec, env).score; }

template <typename Rng>
LayoutVector random_layout(const LayoutEnv& env, Rng& rng) {
  const Room& room = env.config().room;
  std::uniform_real_distribution<double> ux(0.0, room.n), uy(0.0, room.m);
  std::uniform_int_distribution<int> uk(0, 3);
  LayoutVector v;
  for (std::size_t i = 0; i < env.items().size(); ++i) {
    v.push_back(ux(rng));
    v.push_back(uy(rng));
    v.push_back(uk(rng));
  }
  return v;
}

struct SearchResult {
  LayoutVector best;
  ScoreDetail detail;
  int evaluations = 0;
  double wall_time_s = 0.0;

  double best_score() const { return detail.score; }
};

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void clamp_to_room(LayoutVector& v, const Room& room) {
  for (std::size_t i = 0; i + 2 < v.size(); i += 3) {
    v[i] = std::clamp(v[i], 0.0, room.n);
    v[i + 1] = std::clamp(v[i + 1], 0.0, room.m);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Random search

inline SearchResult random_search(const LayoutEnv& env, const SearchBudget& budget) {
  budget.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(budget.seed);
  SearchResult r;
  for (int i = 0; i < budget.max_evaluations; ++i) {
    LayoutVector v = random_layout(env, rng);
    ScoreDetail d = score_detail(v, env);
    ++r.evaluations;
    if (i == 0 || d.score > r.detail.score) {
      r.best = std::move(v);
      r.detail = std::move(d);
    }
  }
  r.wall_time_s = detail::elapsed(t0);
  return r;
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings with a geometric temperature schedule

struct MhConfig {
  double step_sigma = 0.5;  // m
  double t_start = 1.0;
  double t_end = 0.01;
};

/// Metropolis rule; `u` is a uniform draw in [0, 1).
inline bool mh_accept(double current, double proposed, double temperature, double u) {
  if (proposed >= current) return true;
  if (temperature <= 0.0) return false;
  return u < std::exp((proposed - current) / temperature);
}

inline double mh_temperature(const MhConfig& cfg, int iteration, int iterations) {
  if (iterations <= 1) return cfg.t_start;
  const double frac = static_cast<double>(iteration) / static_cast<double>(iterations - 1);
  return cfg.t_start * std::pow(cfg.t_end / cfg.t_start, frac);
}

inline SearchResult mh_optimize(const LayoutEnv& env, const SearchBudget& budget, const MhConfig& cfg = {}) {
  budget.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Room& room = env.config().room;
  const std::size_t n = env.items().size();
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> step(0.0, cfg.step_sigma);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<int> move_kind(0, 2), other_rot(1, 3);

  LayoutVector cur = random_layout(env, rng);
  ScoreDetail cur_d = score_detail(cur, env);
  SearchResult r{cur, cur_d, 1, 0.0};
  const int proposals = budget.max_evaluations - 1;
  for (int it = 0; it < proposals; ++it) {
    LayoutVector prop = cur;
    int kind = move_kind(rng);
    if (kind == 2 && n < 2) kind = 0;
    const std::size_t i = pick(rng);
    if (kind == 0) {
      prop[3 * i] += step(rng);
      prop[3 * i + 1] += step(rng);
      detail::clamp_to_room(prop, room);
    } else if (kind == 1) {
      prop[3 * i + 2] = (quantize_rotation(prop[3 * i + 2]) + other_rot(rng)) % 4;
    } else {
      std::size_t j = pick(rng);
      while (j == i) j = pick(rng);
      std::swap(prop[3 * i], prop[3 * j]);
      std::swap(prop[3 * i + 1], prop[3 * j + 1]);
    }
    ScoreDetail d = score_detail(prop, env);
    ++r.evaluations;
    const double t = mh_temperature(cfg, it, proposals);
    if (mh_accept(cur_d.score, d.score, t, u01(rng))) {
      if (d.score > r.detail.score) {
        r.best = prop;
        r.detail = d;
      }
      cur = std::move(prop);
      cur_d = std::move(d);
    }
  }
  r.wall_time_s = detail::elapsed(t0);
  return r;
}

// ---------------------------------------------------------------------------
// Multi-objective particle swarm

struct PsoConfig {
  int swarm = 32;
  double inertia = 0.7;
  double c1 = 1.5;
  double c2 = 1.5;
  std::size_t archive_cap = 256;
  std::vector<LayoutVector> initial_positions;  // optional; reused cyclically
};

/// True when a is at least as good as b everywhere and better somewhere.
inline bool dominates(const std::array<double, 6>& a, const std::array<double, 6>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

struct ArchiveEntry {
  LayoutVector position;
  ScoreDetail detail;
  std::array<double, 6> objectives{};
};

/// Set of mutually non-dominated layouts, capped by evicting the lowest score.
class ParetoArchive {
 public:
  explicit ParetoArchive(std::size_t cap = 256) : cap_(cap) {
    if (cap == 0) throw std::invalid_argument("archive capacity must be positive");
  }

  /// Returns true when the candidate entered the archive.
  bool insert(const LayoutVector& pos, const ScoreDetail& d) {
    const auto obj = d.objectives();
    for (const auto& e : entries_)
      if (dominates(e.objectives, obj) || e.objectives == obj) return false;
    std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(obj, e.objectives); });
    entries_.push_back({pos, d, obj});
    if (entries_.size() > cap_) {
      auto worst = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
        return a.detail.score < b.detail.score;
      });
      entries_.erase(worst);
    }
    return true;
  }

  const ArchiveEntry& best() const {
    if (entries_.empty()) throw std::logic_error("archive is empty");
    return *std::max_element(entries_.begin(), entries_.end(),
                             [](const auto& a, const auto& b) { return a.detail.score < b.detail.score; });
  }
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::size_t cap_;
  std::vector<ArchiveEntry> entries_;
};

struct PsoResult : SearchResult {
  std::vector<ArchiveEntry> archive;
};

inline PsoResult pso_optimize(const LayoutEnv& env, const SearchBudget& budget, const PsoConfig& cfg = {}) {
  budget.validate();
  if (cfg.swarm < 2) throw std::invalid_argument("swarm needs at least two particles");
  const auto t0 = std::chrono::steady_clock::now();
  const Room& room = env.config().room;
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t dim = 3 * env.items().size();

  auto clamp_particle = [&](LayoutVector& v) {
    detail::clamp_to_room(v, room);
    for (std::size_t i = 2; i < v.size(); i += 3) v[i] = std::clamp(v[i], 0.0, std::nextafter(4.0, 0.0));
  };

  const auto swarm = static_cast<std::size_t>(cfg.swarm);
  std::vector<LayoutVector> x(swarm), vel(swarm, LayoutVector(dim, 0.0)), pbest(swarm);
  std::vector<double> pbest_score(swarm);
  for (std::size_t p = 0; p < swarm; ++p) {
    if (!cfg.initial_positions.empty()) {
      x[p] = cfg.initial_positions[p % cfg.initial_positions.size()];
      if (x[p].size() != dim) throw std::invalid_argument("initial particle has the wrong length");
    } else {
      x[p] = random_layout(env, rng);
      for (std::size_t i = 2; i < dim; i += 3) x[p][i] += u01(rng);  // continuous rotation coordinate
    }
  }

  ParetoArchive archive(cfg.archive_cap);
  PsoResult r;
  bool done = false;
  for (std::size_t p = 0; p < swarm && !done; ++p) {
    const ScoreDetail d = score_detail(x[p], env);
    ++r.evaluations;
    pbest[p] = x[p];
    pbest_score[p] = d.score;
    archive.insert(x[p], d);
    done = r.evaluations >= budget.max_evaluations;
  }

  while (!done) {
    const LayoutVector gbest = archive.best().position;
    for (std::size_t p = 0; p < swarm && !done; ++p) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double r1 = u01(rng), r2 = u01(rng);
        vel[p][k] = cfg.inertia * vel[p][k] + cfg.c1 * r1 * (pbest[p][k] - x[p][k]) + cfg.c2 * r2 * (gbest[k] - x[p][k]);
        x[p][k] += vel[p][k];
      }
      clamp_particle(x[p]);
      const ScoreDetail d = score_detail(x[p], env);
      ++r.evaluations;
      if (d.score > pbest_score[p]) {
        pbest[p] = x[p];
        pbest_score[p] = d.score;
      }
      archive.insert(x[p], d);
      done = r.evaluations >= budget.max_evaluations;
    }
  }
  const ArchiveEntry& best = archive.best();
  r.best = best.position;
  r.detail = best.detail;
  r.archive = archive.entries();
  r.wall_time_s = detail::elapsed(t0);
  return r;
}

}  // namespace furnish::baselines
