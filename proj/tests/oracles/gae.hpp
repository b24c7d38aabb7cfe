#pragma once

// Advantages by the direct double sum Â_t = Σ_l (γλ)^l δ_{t+l} within each episode.

#include <vector>

namespace oracle {

inline std::vector<double> gae_double_sum(const std::vector<double>& r, const std::vector<double>& v,
                                          const std::vector<bool>& done, double g, double l) {
  const std::size_t n = r.size();
  std::vector<double> delta(n), adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const bool term = done[t] || t + 1 == n;
    delta[t] = r[t] + (term ? 0.0 : g * v[t + 1]) - v[t];
  }
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += w * delta[k];
      if (done[k] || k + 1 == n) break;
      w *= g * l;
    }
  }
  return adv;
}

}  // namespace oracle
