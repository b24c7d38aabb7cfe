#include <gtest/gtest.h>

#include <random>
#include <set>

#include "furnish/ppo.hpp"
#include "oracles/gae.hpp"

using namespace furnish;
using namespace furnish::ppo;

namespace {

EnvPool square_pool() {
  EnvPool envs;
  envs.emplace_back(EpisodeConfig{});
  return envs;
}

TrainConfig tiny_config(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.episodes_per_update = 4;
  c.minibatch = 8;
  c.ppo_epochs = 2;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(Gae, SingleStep) {
  const std::vector<double> r{1.0}, v{0.0};
  const auto g = compute_gae(r, v, {true}, 0.99, 0.95);
  EXPECT_DOUBLE_EQ(g.advantages[0], 1.0);
  EXPECT_DOUBLE_EQ(g.returns[0], 1.0);
}

TEST(Gae, LambdaZeroIsOneStepTd) {
  const std::vector<double> r{0.5, -0.2, 1.0, -10}, v{0.1, 0.3, -0.4, 0.2};
  const std::vector<bool> d{false, false, false, true};
  const auto g = compute_gae(r, v, d, 0.9, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double next = t + 1 < r.size() ? v[t + 1] : 0.0;
    EXPECT_DOUBLE_EQ(g.advantages[t], r[t] + 0.9 * next - v[t]);
  }
}

TEST(Gae, MatchesDoubleSumOnRandomEpisodes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_real_distribution<double> ug(0.5, 1.0);
  double worst = 0.0;
  for (int batch = 0; batch < 100; ++batch) {
    std::vector<double> r, v;
    std::vector<bool> d;
    for (int e = 0; e < 10; ++e) {
      const int T = len(rng);
      for (int t = 0; t < T; ++t) {
        r.push_back(n(rng));
        v.push_back(n(rng));
        d.push_back(t + 1 == T);
      }
    }
    const double gamma = ug(rng), lambda = ug(rng);
    const auto g = compute_gae(r, v, d, gamma, lambda);
    const auto want = oracle::gae_double_sum(r, v, d, gamma, lambda);
    for (std::size_t t = 0; t < r.size(); ++t) {
      worst = std::max(worst, std::abs(g.advantages[t] - want[t]));
      EXPECT_DOUBLE_EQ(g.returns[t], g.advantages[t] + v[t]);
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Gae, RejectsLengthMismatch) {
  const std::vector<double> r{1, 2}, v{1};
  EXPECT_THROW(compute_gae(r, v, {true, true}, 0.9, 0.9), std::invalid_argument);
}

TEST(Normalize, ZeroMeanUnitVariance) {
  std::vector<double> x{1, 2, 3, 10, -4};
  normalize(x);
  double m = 0, s = 0;
  for (double v : x) m += v / x.size();
  for (double v : x) s += (v - m) * (v - m) / x.size();
  EXPECT_NEAR(m, 0.0, 1e-15);
  EXPECT_NEAR(s, 1.0, 1e-12);
  std::vector<double> flat{3, 3, 3};
  normalize(flat);
  for (double v : flat) EXPECT_EQ(v, 0.0);
}

TEST(Clipped, Examples) {
  const std::vector<double> a{0.3, -0.7, 1.1}, lp{-1.0, -2.0, -0.5};
  EXPECT_NEAR(clipped_objective(lp, lp, a, 0.2), (0.3 - 0.7 + 1.1) / 3, 1e-15);
  EXPECT_NEAR(clipped_term(1.5, 1.0, 0.2), 1.2, 1e-15);
  EXPECT_NEAR(clipped_term(0.5, -1.0, 0.2), -0.8, 1e-15);
  EXPECT_NEAR(clipped_term(0.5, 1.0, 0.2), 0.5, 1e-15);
  EXPECT_NEAR(clipped_term(1.5, -1.0, 0.2), -1.5, 1e-15);
}

TEST(Clipped, DeadZoneGradientIsExactlyZero) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> hi(1.2000001, 3.0), lo(0.01, 0.7999999), a(0.01, 3.0);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(clipped_term_grad(hi(rng), a(rng), 0.2), 0.0);
    EXPECT_EQ(clipped_term_grad(lo(rng), -a(rng), 0.2), 0.0);
  }
  // outside the dead zone the gradient is r·Â
  EXPECT_DOUBLE_EQ(clipped_term_grad(1.5, -1.0, 0.2), -1.5);
  EXPECT_DOUBLE_EQ(clipped_term_grad(0.5, 1.0, 0.2), 0.5);
  EXPECT_DOUBLE_EQ(clipped_term_grad(1.0, 0.4, 0.2), 0.4);
}

TEST(Clipped, GradientMatchesFiniteDifferencesOffTheKinks) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.3);
  std::vector<double> lp_new(50), lp_old(50), adv(50);
  for (std::size_t i = 0; i < 50; ++i) {
    lp_old[i] = n(rng);
    lp_new[i] = lp_old[i] + n(rng);
    adv[i] = n(rng) * 3;
  }
  const auto g = clipped_objective_grad(lp_new, lp_old, adv, 0.2);
  for (std::size_t i = 0; i < 50; ++i) {
    const double r = std::exp(lp_new[i] - lp_old[i]);
    if (std::abs(r - 1.2) < 1e-3 || std::abs(r - 0.8) < 1e-3) continue;
    auto up = lp_new, dn = lp_new;
    up[i] += 1e-7;
    dn[i] -= 1e-7;
    const double fd = (clipped_objective(up, lp_old, adv, 0.2) - clipped_objective(dn, lp_old, adv, 0.2)) / 2e-7;
    EXPECT_NEAR(g[i], fd, 1e-7);
  }
}

TEST(TotalLoss, Examples) {
  EXPECT_DOUBLE_EQ(total_loss(1, 0, 0, 0.5, 0.01), -1.0);
  EXPECT_DOUBLE_EQ(total_loss(0, 2, 0, 0.5, 0.01), 1.0);
  EXPECT_DOUBLE_EQ(total_loss(0, 0, 4, 0.5, 0.01), -0.04);
}

TEST(Rollout, FirstPassRatioIsOne) {
  const EnvPool envs = square_pool();
  const auto params = nn::init_params<float>({}, 4);
  RolloutBuffer buf;
  for (int ep = 0; ep < 16; ++ep) {
    auto rng = episode_rng(4, 0, static_cast<std::uint64_t>(ep));
    run_episode(params, envs, rng, false, {}, &buf.transitions);
  }
  buf.finalize(0.99, 0.95);
  std::vector<double> lp_new, lp_old;
  nn::ForwardCache<float> cache;
  for (const auto& t : buf.transitions) {
    const auto o = nn::forward(params, t.observation, cache);
    lp_new.push_back(nn::gaussian_logprob(to_double(o.mu), to_double(o.log_std), t.raw));
    lp_old.push_back(t.logprob_old);
    EXPECT_EQ(lp_new.back(), lp_old.back());
  }
  EXPECT_NEAR(clipped_objective(lp_new, lp_old, buf.advantages, 0.2), 0.0, 1e-9);

  std::vector<std::size_t> all(buf.transitions.size());
  std::iota(all.begin(), all.end(), 0);
  auto grads = params.zeros_like();
  TrainConfig cfg;
  const auto st = minibatch_gradient(params, buf, all, cfg, {}, grads);
  EXPECT_NEAR(st.objective, 0.0, 1e-9);
}

TEST(Rollout, InvalidTransitionsStayInBufferWithZeroBootstrap) {
  const EnvPool envs = square_pool();
  const auto params = nn::init_params<float>({}, 4);
  std::vector<Transition> tr;
  int invalid = 0;
  for (int ep = 0; ep < 20; ++ep) {
    auto rng = episode_rng(4, 1, static_cast<std::uint64_t>(ep));
    const auto rec = run_episode(params, envs, rng, false, {}, &tr);
    invalid += rec.invalid;
    EXPECT_TRUE(tr.back().done);
    if (rec.invalid) {
      EXPECT_EQ(tr.back().reward, -10.0);
    }
  }
  ASSERT_GT(invalid, 0);
  std::vector<double> r, v;
  std::vector<bool> d;
  for (const auto& t : tr) {
    r.push_back(t.reward);
    v.push_back(t.value);
    d.push_back(t.done);
  }
  const auto g = compute_gae(r, v, d, 0.99, 0.95);
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr[i].done) {
      EXPECT_DOUBLE_EQ(g.advantages[i], r[i] - v[i]);
    }
}

TEST(Train, ZeroEpochsReturnsInitialParameters) {
  const auto res = train(square_pool(), tiny_config(0));
  const auto init = nn::init_params<float>({}, 9).cast<double>();
  ASSERT_EQ(res.params.size(), init.size());
  for (std::size_t i = 0; i < init.size(); ++i) EXPECT_EQ(res.params[i].data, init[i].data);
  EXPECT_TRUE(res.metrics.empty());
}

TEST(Train, SameSeedSameMetrics) {
  const auto a = train(square_pool(), tiny_config(3));
  const auto b = train(square_pool(), tiny_config(3));
  ASSERT_EQ(a.metrics.size(), 3u);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(a.metrics[i].mean_reward, b.metrics[i].mean_reward);
    EXPECT_EQ(a.metrics[i].p_loss, b.metrics[i].p_loss);
    EXPECT_EQ(a.metrics[i].v_loss, b.metrics[i].v_loss);
  }
  for (std::size_t i = 0; i < a.params.size(); ++i) EXPECT_EQ(a.params[i].data, b.params[i].data);
  EXPECT_TRUE(a.params.finite());
  EXPECT_EQ(a.adam.step, b.adam.step);
  EXPECT_GT(a.adam.step, 0u);
}

TEST(Train, CallbackSeesEveryEpoch) {
  std::vector<int> seen;
  train(square_pool(), tiny_config(2), {}, [&](const EpochMetrics& m) { seen.push_back(m.epoch); });
  EXPECT_EQ(seen, (std::vector<int>{0, 1}));
}

TEST(Train, ConfigValidation) {
  TrainConfig c;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lambda = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.clip = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(train_config_from_json({{"gama", 0.9}}), std::exception);
  const TrainConfig back = train_config_from_json(to_json(tiny_config(7)));
  EXPECT_EQ(back.epochs, 7);
  EXPECT_EQ(back.minibatch, 8);
  EXPECT_EQ(back.seed, 9u);
}

TEST(Evaluate, UntrainedStatisticsAreFiniteAndRepeatable) {
  const auto params = nn::init_params<double>({}, 1);
  const auto a = evaluate(params, square_pool(), {100, true, 3});
  const auto b = evaluate(params, square_pool(), {100, true, 3});
  EXPECT_TRUE(std::isfinite(a.mean_reward));
  EXPECT_GE(a.invalid_rate, 0.0);
  EXPECT_LE(a.invalid_rate, 1.0);
  EXPECT_GE(a.mean_length, 1.0);
  EXPECT_EQ(a.mean_reward, b.mean_reward);
  EXPECT_EQ(a.invalid_rate, b.invalid_rate);
  EXPECT_EQ(a.mean_length, b.mean_length);
  EXPECT_EQ(a.episodes.size(), 100u);
}

TEST(Evaluate, AlwaysInvalidPolicy) {
  auto params = nn::init_params<double>({}, 1);
  for (auto& v : params[params.mu_index()].data) v = 0.0;
  for (auto& v : params[params.mu_index() + 1].data) v = 20.0;  // squashes onto the far corner
  const auto s = evaluate(params, square_pool(), {25, true, 0});
  EXPECT_DOUBLE_EQ(s.mean_length, 1.0);
  EXPECT_DOUBLE_EQ(s.mean_reward, -10.0);
  EXPECT_DOUBLE_EQ(s.invalid_rate, 1.0);
}

TEST(Evaluate, SamplingExploresRotationsAfterTraining) {
  const auto res = train(square_pool(), tiny_config(2));
  const auto s = evaluate(res.params, square_pool(), {100, false, 5});
  std::set<int> rotations;
  for (const auto& e : s.episodes)
    for (const auto& p : e.placed) rotations.insert(p.rotation.index());
  EXPECT_GE(rotations.size(), 2u);
  // support is all of R^3
  const LayoutEnv env(EpisodeConfig{});
  const auto o = nn::forward(res.params, env.observe(env.reset()));
  for (double far : {1e3, -1e3})
    EXPECT_TRUE(std::isfinite(nn::gaussian_logprob(to_double(o.mu), to_double(o.log_std), {far, far, far})));
}
