#pragma once

// PPO with a clipped surrogate, GAE advantages and a shared actor-critic
// trunk. Training runs in single precision; parameters are handed back in
// double so they can be checkpointed and compared exactly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "furnish/env.hpp"
#include "furnish/nn.hpp"

namespace furnish::ppo {

using nn::PolicyParams;

struct TrainConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double value_coef = 0.05;
  double entropy_coef = 0.01;
  int epochs = 1000;
  int episodes_per_update = 32;
  int minibatch = 256;
  int ppo_epochs = 4;
  std::uint64_t seed = 0;
  bool spatial_encoding = true;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (!(clip > 0.0)) throw std::invalid_argument("clip ratio must be positive");
    if (!(lr_actor > 0.0 && lr_critic > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
    if (episodes_per_update < 1 || minibatch < 1 || ppo_epochs < 1)
      throw std::invalid_argument("episodes_per_update, minibatch and ppo_epochs must be positive");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"lambda", c.lambda},
          {"clip", c.clip},
          {"lr_actor", c.lr_actor},
          {"lr_critic", c.lr_critic},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"epochs", c.epochs},
          {"episodes_per_update", c.episodes_per_update},
          {"minibatch", c.minibatch},
          {"ppo_epochs", c.ppo_epochs},
          {"seed", c.seed},
          {"spatial_encoding", c.spatial_encoding}};
}

/// Overrides fields present in `j`; unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
  for (const auto& [k, v] : j.items()) {
    if (k == "gamma") c.gamma = v.get<double>();
    else if (k == "lambda") c.lambda = v.get<double>();
    else if (k == "clip") c.clip = v.get<double>();
    else if (k == "lr_actor") c.lr_actor = v.get<double>();
    else if (k == "lr_critic") c.lr_critic = v.get<double>();
    else if (k == "value_coef") c.value_coef = v.get<double>();
    else if (k == "entropy_coef") c.entropy_coef = v.get<double>();
    else if (k == "epochs") c.epochs = v.get<int>();
    else if (k == "episodes_per_update") c.episodes_per_update = v.get<int>();
    else if (k == "minibatch") c.minibatch = v.get<int>();
    else if (k == "ppo_epochs") c.ppo_epochs = v.get<int>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "spatial_encoding") c.spatial_encoding = v.get<bool>();
    else throw std::invalid_argument("unknown training option '" + k + "'");
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Advantages and losses

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Backward GAE recurrence over concatenated episodes; the value after a
/// done step (and after the final step) is taken as 0.
inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             const std::vector<bool>& dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("compute_gae: length mismatch");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const bool terminal = dones[t] || t + 1 == n;
    const double next_v = terminal ? 0.0 : values[t + 1];
    const double delta = rewards[t] + gamma * next_v - values[t];
    next_adv = delta + (terminal ? 0.0 : gamma * lambda * next_adv);
    r.advantages[t] = next_adv;
    r.returns[t] = next_adv + values[t];
  }
  return r;
}

/// Zero mean, unit variance in place (left centered only when the spread is 0).
inline void normalize(std::vector<double>& x) {
  if (x.size() < 2) return;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  for (double& v : x) v = sd > 1e-12 ? (v - mean) / sd : v - mean;
}

inline double clipped_term(double ratio, double adv, double eps) {
  return std::min(ratio * adv, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv);
}

/// d/d(logprob_new) of one clipped term; exactly zero in the clipped regions.
inline double clipped_term_grad(double ratio, double adv, double eps) {
  if ((adv > 0.0 && ratio > 1.0 + eps) || (adv < 0.0 && ratio < 1.0 - eps)) return 0.0;
  return adv * ratio;
}

/// Mean clipped surrogate objective (to be maximized).
inline double clipped_objective(std::span<const double> logp_new, std::span<const double> logp_old,
                                std::span<const double> adv, double eps) {
  if (logp_new.size() != logp_old.size() || adv.size() != logp_new.size())
    throw std::invalid_argument("clipped_objective: length mismatch");
  if (adv.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) s += clipped_term(std::exp(logp_new[i] - logp_old[i]), adv[i], eps);
  return s / static_cast<double>(adv.size());
}

/// Gradient of clipped_objective with respect to each logp_new entry.
inline std::vector<double> clipped_objective_grad(std::span<const double> logp_new, std::span<const double> logp_old,
                                                  std::span<const double> adv, double eps) {
  std::vector<double> g(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i)
    g[i] = clipped_term_grad(std::exp(logp_new[i] - logp_old[i]), adv[i], eps) / static_cast<double>(adv.size());
  return g;
}

inline double total_loss(double policy_obj, double value_loss, double entropy, double value_coef,
                         double entropy_coef) {
  return -policy_obj + value_coef * value_loss - entropy_coef * entropy;
}

// ---------------------------------------------------------------------------
// Rollouts

struct Transition {
  Observation observation;
  RawAction raw{};
  double logprob_old = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

struct RolloutBuffer {
  std::vector<Transition> transitions;  // episodes stored back to back
  std::vector<double> advantages;
  std::vector<double> returns;

  void finalize(double gamma, double lambda) {
    std::vector<double> r, v;
    std::vector<bool> d;
    for (const auto& t : transitions) {
      r.push_back(t.reward);
      v.push_back(t.value);
      d.push_back(t.done);
    }
    auto g = compute_gae(r, v, d, gamma, lambda);
    advantages = std::move(g.advantages);
    returns = std::move(g.returns);
    normalize(advantages);
  }
};

/// Environments to train on; one is drawn uniformly per episode.
using EnvPool = std::vector<LayoutEnv>;

inline std::mt19937_64 episode_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t episode,
                                   std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(episode),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

template <typename S>
std::array<double, 3> to_double(const std::array<S, 3>& a) {
  return {static_cast<double>(a[0]), static_cast<double>(a[1]), static_cast<double>(a[2])};
}

struct EpisodeRecord {
  std::size_t env_index = 0;
  std::vector<PlacedItem> placed;
  std::optional<RewardBreakdown> breakdown;  // of the final valid layout
  double final_reward = 0.0;                // last step's reward (φ if invalid)
  double total_reward = 0.0;
  std::size_t length = 0;
  bool invalid = false;
};

/// Plays one episode. With `greedy` the mean action is taken, otherwise the
/// Gaussian is sampled; transitions are appended to `out` when non-null.
template <typename S, typename Rng>
EpisodeRecord run_episode(const PolicyParams<S>& params, const EnvPool& envs, Rng& rng, bool greedy,
                          const nn::NetworkOptions& opt, std::vector<Transition>* out) {
  if (envs.empty()) throw std::invalid_argument("environment pool is empty");
  EpisodeRecord rec;
  rec.env_index = envs.size() == 1 ? 0 : std::uniform_int_distribution<std::size_t>(0, envs.size() - 1)(rng);
  const LayoutEnv& env = envs[rec.env_index];
  LayoutState state = env.reset();
  nn::ForwardCache<S> cache;
  while (!state.done) {
    Observation obs = env.observe(state);
    const auto o = nn::forward(params, obs, cache, opt);
    const auto mu = to_double(o.mu), ls = to_double(o.log_std);
    nn::GaussianSample smp;
    if (greedy) {
      smp.raw = mu;
      smp.logprob = nn::gaussian_logprob(mu, ls, mu);
    } else {
      smp = nn::sample_action(mu, ls, rng);
    }
    StepOutcome st = env.step(state, smp.raw);
    rec.final_reward = st.reward;
    rec.total_reward += st.reward;
    ++rec.length;
    if (st.info) rec.breakdown = st.info;
    else rec.invalid = true;
    if (out)
      out->push_back({std::move(obs), smp.raw, smp.logprob, st.reward, static_cast<double>(o.value), st.done});
    state = std::move(st.next_state);
  }
  rec.placed = std::move(state.placed);
  if (rec.invalid) rec.breakdown.reset();
  return rec;
}

// ---------------------------------------------------------------------------
// Training

struct EpochMetrics {
  int epoch = 0;
  double mean_reward = 0.0;  // mean final-step reward over the epoch's episodes
  double p_loss = 0.0;       // |mean clipped objective| over minibatches
  double v_loss = 0.0;       // mean value MSE over minibatches
  double invalid_rate = 0.0;
  double entropy = 0.0;  // mean policy entropy over minibatches
  double wall_time_s = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  PolicyParams<double> params;
  nn::AdamState<double> adam;
  std::vector<EpochMetrics> metrics;
};

struct MinibatchStats {
  double objective = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

/// Accumulates the gradient of the total loss over one minibatch into `grads`.
template <typename S>
MinibatchStats minibatch_gradient(const PolicyParams<S>& params, const RolloutBuffer& buf,
                                  std::span<const std::size_t> idx, const TrainConfig& cfg,
                                  const nn::NetworkOptions& opt, PolicyParams<S>& grads) {
  MinibatchStats st;
  const double inv_b = 1.0 / static_cast<double>(idx.size());
  nn::ForwardCache<S> cache;
  for (std::size_t i : idx) {
    const Transition& t = buf.transitions[i];
    const auto o = nn::forward(params, t.observation, cache, opt);
    const auto mu = to_double(o.mu), ls = to_double(o.log_std);
    const double lp = nn::gaussian_logprob(mu, ls, t.raw);
    const double ratio = std::exp(lp - t.logprob_old);
    const double adv = buf.advantages[i];
    const double v = static_cast<double>(o.value);
    const double err = v - buf.returns[i];
    st.objective += clipped_term(ratio, adv, cfg.clip) * inv_b;
    st.value_loss += err * err * inv_b;
    st.entropy += nn::gaussian_entropy(ls) * inv_b;

    const double d_logp = -clipped_term_grad(ratio, adv, cfg.clip) * inv_b;
    const auto lg = nn::gaussian_logprob_grad(mu, ls, t.raw);
    const auto eg = nn::gaussian_entropy_grad(ls);
    nn::OutputGrad<S> up;
    for (int k = 0; k < 3; ++k) {
      up.mu[k] = static_cast<S>(d_logp * lg.mu[k]);
      up.log_std[k] = static_cast<S>(d_logp * lg.log_std[k] - cfg.entropy_coef * eg[k] * inv_b);
    }
    up.value = static_cast<S>(cfg.value_coef * 2.0 * err * inv_b);
    nn::backward(params, cache, up, grads);
  }
  return st;
}

/// Per-epoch hook; receives the metrics row just completed.
using EpochCallback = std::function<void(const EpochMetrics&)>;

inline TrainResult train(const EnvPool& envs, const TrainConfig& cfg, const nn::Architecture& arch = {},
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (envs.empty()) throw std::invalid_argument("environment pool is empty");
  const nn::NetworkOptions opt{cfg.spatial_encoding};
  PolicyParams<float> params = nn::init_params<float>(arch, cfg.seed);
  nn::AdamState<float> adam(params);
  PolicyParams<float> grads = params.zeros_like();
  const auto lr = [&](std::size_t i) { return params.is_critic(i) ? cfg.lr_critic : cfg.lr_actor; };

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    RolloutBuffer buf;
    EpochMetrics m;
    m.epoch = epoch;
    for (int ep = 0; ep < cfg.episodes_per_update; ++ep) {
      auto rng = episode_rng(cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(ep));
      const EpisodeRecord rec = run_episode(params, envs, rng, false, opt, &buf.transitions);
      m.mean_reward += rec.final_reward / cfg.episodes_per_update;
      m.invalid_rate += (rec.invalid ? 1.0 : 0.0) / cfg.episodes_per_update;
    }
    buf.finalize(cfg.gamma, cfg.lambda);

    std::vector<std::size_t> order(buf.transitions.size());
    std::iota(order.begin(), order.end(), 0);
    auto shuffle_rng = episode_rng(cfg.seed, static_cast<std::uint64_t>(epoch), 0, 1);
    double obj_sum = 0.0, vloss_sum = 0.0, ent_sum = 0.0;
    int batches = 0;
    for (int pass = 0; pass < cfg.ppo_epochs; ++pass) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.minibatch)) {
        const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.minibatch));
        grads.zero();
        const auto st = minibatch_gradient(params, buf, std::span(order).subspan(b, e - b), cfg, opt, grads);
        nn::adam_step(params, grads, adam, lr);
        if (!params.finite())
          throw TrainingDiverged("non-finite parameter after update at epoch " + std::to_string(epoch));
        obj_sum += st.objective;
        vloss_sum += st.value_loss;
        ent_sum += st.entropy;
        ++batches;
      }
    }
    m.p_loss = std::abs(obj_sum / batches);
    m.v_loss = vloss_sum / batches;
    m.entropy = ent_sum / batches;
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  result.params = params.cast<double>();
  result.adam = nn::AdamState<double>(result.params);
  result.adam.step = adam.step;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      result.adam.m[i][j] = adam.m[i][j];
      result.adam.v[i][j] = adam.v[i][j];
    }
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalConfig {
  int episodes = 100;
  bool greedy = true;
  std::uint64_t seed = 0;
  bool spatial_encoding = true;
};

struct EvalStats {
  double mean_reward = 0.0;   // mean final-step reward
  double invalid_rate = 0.0;  // fraction of episodes ended by an invalid action
  double mean_length = 0.0;
  double mean_time_s = 0.0;   // per episode
  double wall_time_s = 0.0;
  std::array<double, 6> mean_components{};  // over valid episodes
  std::vector<EpisodeRecord> episodes;
};

inline EvalStats evaluate(const PolicyParams<double>& params, const EnvPool& envs, const EvalConfig& cfg) {
  if (cfg.episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  const PolicyParams<float> p = params.cast<float>();
  const nn::NetworkOptions opt{cfg.spatial_encoding};
  EvalStats s;
  const auto t0 = std::chrono::steady_clock::now();
  int valid = 0;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    auto rng = episode_rng(cfg.seed, 0xe7a1u, static_cast<std::uint64_t>(ep));
    EpisodeRecord rec = run_episode(p, envs, rng, cfg.greedy, opt, nullptr);
    s.mean_reward += rec.final_reward;
    s.invalid_rate += rec.invalid ? 1.0 : 0.0;
    s.mean_length += static_cast<double>(rec.length);
    if (rec.breakdown) {
      const auto c = rec.breakdown->components();
      for (int k = 0; k < 6; ++k) s.mean_components[k] += c[k];
      ++valid;
    }
    s.episodes.push_back(std::move(rec));
  }
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double n = cfg.episodes;
  s.mean_reward /= n;
  s.invalid_rate /= n;
  s.mean_length /= n;
  s.mean_time_s = s.wall_time_s / n;
  if (valid)
    for (double& c : s.mean_components) c /= valid;
  return s;
}

}  // namespace furnish::ppo
