#pragma once

// Central finite differences against nn::backward on the default network.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "furnish/nn.hpp"

namespace oracle {

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

inline furnish::Observation random_observation(std::mt19937_64& rng, std::size_t grid = furnish::kObservationGrid) {
  std::normal_distribution<double> n01;
  std::bernoulli_distribution bit(0.3);
  furnish::Observation o;
  for (auto& v : o.current) v = n01(rng);
  for (auto& v : o.next) v = n01(rng);
  o.occupancy.resize(grid * grid);
  for (auto& v : o.occupancy) v = bit(rng) ? 1.0f : 0.0f;
  return o;
}

/// Scalar probe loss: fixed random combination of all network outputs.
struct Probe {
  std::array<double, 3> mu, log_std;
  double value;

  double operator()(const furnish::nn::PolicyOutput<double>& o) const {
    double s = value * o.value;
    for (int k = 0; k < 3; ++k) s += mu[k] * o.mu[k] + log_std[k] * o.log_std[k];
    return s;
  }
};

inline double relative_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7});
}

/// Checks up to `per_tensor` entries of every tensor (all entries of small ones).
inline std::vector<TensorCheck> gradient_check(std::uint64_t seed, std::size_t per_tensor, bool spatial = true,
                                               double h = 1e-4) {
  using namespace furnish::nn;
  std::mt19937_64 rng(seed);
  PolicyParams<double> p = init_params<double>({}, seed);
  // non-zero biases so every bias path carries signal
  std::normal_distribution<double> small(0.0, 0.1);
  for (std::size_t i = 1; i < p.size(); i += 2)
    for (auto& v : p[i].data) v += small(rng);
  const auto obs = random_observation(rng);
  std::normal_distribution<double> n01;
  Probe probe{{n01(rng), n01(rng), n01(rng)}, {n01(rng), n01(rng), n01(rng)}, n01(rng)};
  const NetworkOptions opt{spatial};

  ForwardCache<double> cache;
  const auto out = forward(p, obs, cache, opt);
  (void)out;
  OutputGrad<double> up;
  up.mu = probe.mu;
  up.log_std = probe.log_std;
  up.value = probe.value;
  PolicyParams<double> g = p.zeros_like();
  backward(p, cache, up, g);

  std::vector<TensorCheck> report;
  for (std::size_t t = 0; t < p.size(); ++t) {
    TensorCheck tc{p.names[t]};
    std::vector<std::size_t> idx(p[t].size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    if (idx.size() > per_tensor) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(per_tensor);
    }
    for (std::size_t j : idx) {
      const double orig = p[t][j];
      p[t][j] = orig + h;
      const double up_v = probe(forward(p, obs, opt));
      p[t][j] = orig - h;
      const double dn_v = probe(forward(p, obs, opt));
      p[t][j] = orig;
      const double numeric = (up_v - dn_v) / (2.0 * h);
      tc.max_rel_error = std::max(tc.max_rel_error, relative_error(g[t][j], numeric));
      ++tc.checked;
    }
    report.push_back(tc);
  }
  return report;
}

}  // namespace oracle
