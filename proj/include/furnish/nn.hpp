#pragma once

// Actor-critic network with hand-written reverse mode.
//
// Two descriptor encoders (identical topology, separate weights) and a small
// CNN over the occupancy map feed a shared embedding h. Linear heads emit the
// Gaussian mean, the log standard deviation and the state value.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "furnish/env.hpp"

namespace furnish::nn {

template <typename S>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape_) : shape(std::move(shape_)), data(numel(shape), S(0)) {}

  static std::size_t numel(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }
  std::size_t size() const { return data.size(); }
  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }
  S& operator[](std::size_t i) { return data[i]; }
  const S& operator[](std::size_t i) const { return data[i]; }
  void zero() { std::fill(data.begin(), data.end(), S(0)); }
};

// ---------------------------------------------------------------------------
// Kernels

/// Dot product with eight independent accumulators so the reduction vectorizes.
template <typename S>
inline S dot(const S* a, const S* b, std::size_t n) {
  S acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  S s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename S>
inline void axpy(S alpha, const S* x, S* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename S>
inline S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(std::numbers::sqrt2 / 2)));
}

template <typename S>
inline S gelu_grad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(std::numbers::sqrt2 / 2)));
  const S pdf = std::exp(S(-0.5) * x * x) * S(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
  return cdf + x * pdf;
}

template <typename S>
inline Tensor<S> gelu(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (auto& v : y.data) v = gelu(v);
  return y;
}

/// y = W x + b with W stored [out × in].
template <typename S>
inline void dense_forward(const S* w, const S* b, const S* x, S* y, std::size_t out, std::size_t in) {
  for (std::size_t o = 0; o < out; ++o) y[o] = b[o] + dot(w + o * in, x, in);
}

/// Accumulates dW += dy ⊗ x, db += dy and, when dx is non-null, dx += Wᵀ dy.
template <typename S>
inline void dense_backward(const S* w, const S* x, const S* dy, S* dw, S* db, S* dx, std::size_t out,
                           std::size_t in) {
  for (std::size_t o = 0; o < out; ++o) {
    if (dy[o] == S(0)) continue;
    axpy(dy[o], x, dw + o * in, in);
    db[o] += dy[o];
    if (dx) axpy(dy[o], w + o * in, dx, in);
  }
}

struct ConvShape {
  std::size_t in_channels, in_size, out_channels, kernel, stride, pad;
  std::size_t out_size() const { return (in_size + 2 * pad - kernel) / stride + 1; }
  std::size_t patch() const { return in_channels * kernel * kernel; }
  std::size_t positions() const { return out_size() * out_size(); }
};

/// Lays out receptive fields as a [patch × positions] matrix (zero padding).
template <typename S>
inline void im2col(const ConvShape& c, const S* in, S* col) {
  const std::size_t os = c.out_size(), P = c.positions();
  for (std::size_t ci = 0; ci < c.in_channels; ++ci)
    for (std::size_t ky = 0; ky < c.kernel; ++ky)
      for (std::size_t kx = 0; kx < c.kernel; ++kx) {
        S* row = col + ((ci * c.kernel + ky) * c.kernel + kx) * P;
        for (std::size_t oy = 0; oy < os; ++oy) {
          const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.pad);
          for (std::size_t ox = 0; ox < os; ++ox) {
            const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(c.in_size) &&
                                ix < static_cast<long>(c.in_size);
            row[oy * os + ox] = inside ? in[(ci * c.in_size + iy) * c.in_size + ix] : S(0);
          }
        }
      }
}

template <typename S>
inline void col2im_add(const ConvShape& c, const S* col, S* in) {
  const std::size_t os = c.out_size(), P = c.positions();
  for (std::size_t ci = 0; ci < c.in_channels; ++ci)
    for (std::size_t ky = 0; ky < c.kernel; ++ky)
      for (std::size_t kx = 0; kx < c.kernel; ++kx) {
        const S* row = col + ((ci * c.kernel + ky) * c.kernel + kx) * P;
        for (std::size_t oy = 0; oy < os; ++oy) {
          const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.pad);
          if (iy < 0 || iy >= static_cast<long>(c.in_size)) continue;
          for (std::size_t ox = 0; ox < os; ++ox) {
            const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.pad);
            if (ix < 0 || ix >= static_cast<long>(c.in_size)) continue;
            in[(ci * c.in_size + iy) * c.in_size + ix] += row[oy * os + ox];
          }
        }
      }
}

/// out[oc][p] = b[oc] + Σ_k W[oc][k] col[k][p].
template <typename S>
inline void conv_forward(const ConvShape& c, const S* w, const S* b, const S* col, S* out) {
  const std::size_t P = c.positions(), K = c.patch();
  for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
    S* o = out + oc * P;
    std::fill(o, o + P, b[oc]);
    for (std::size_t k = 0; k < K; ++k) axpy(w[oc * K + k], col + k * P, o, P);
  }
}

/// Accumulates dW, db and, when dcol is non-null, dcol = Wᵀ dout.
template <typename S>
inline void conv_backward(const ConvShape& c, const S* w, const S* col, const S* dout, S* dw, S* db, S* dcol) {
  const std::size_t P = c.positions(), K = c.patch();
  for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
    const S* d = dout + oc * P;
    S s = 0;
    for (std::size_t p = 0; p < P; ++p) s += d[p];
    db[oc] += s;
    for (std::size_t k = 0; k < K; ++k) {
      dw[oc * K + k] += dot(d, col + k * P, P);
      if (dcol) axpy(w[oc * K + k], d, dcol + k * P, P);
    }
  }
}

// ---------------------------------------------------------------------------
// Architecture and parameters

struct Architecture {
  std::size_t descriptor_dim = kDescriptorSize;
  std::size_t encoder_layers = 2;
  std::size_t encoder_width = 64;
  std::size_t grid = kObservationGrid;
  std::size_t conv1_channels = 8, conv1_kernel = 5, conv1_stride = 2, conv1_pad = 2;
  std::size_t conv2_channels = 16, conv2_kernel = 3, conv2_stride = 2, conv2_pad = 1;
  std::size_t cnn_features = 128;
  std::size_t action_dim = 3;

  ConvShape conv1() const { return {1, grid, conv1_channels, conv1_kernel, conv1_stride, conv1_pad}; }
  ConvShape conv2() const {
    return {conv1_channels, conv1().out_size(), conv2_channels, conv2_kernel, conv2_stride, conv2_pad};
  }
  std::size_t flat() const { return conv2_channels * conv2().positions(); }
  std::size_t embedding() const { return 2 * encoder_width + cnn_features; }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline nlohmann::json to_json(const Architecture& a) {
  return {{"descriptor_dim", a.descriptor_dim}, {"encoder_layers", a.encoder_layers},
          {"encoder_width", a.encoder_width},   {"grid", a.grid},
          {"conv1", {a.conv1_channels, a.conv1_kernel, a.conv1_stride, a.conv1_pad}},
          {"conv2", {a.conv2_channels, a.conv2_kernel, a.conv2_stride, a.conv2_pad}},
          {"cnn_features", a.cnn_features},     {"action_dim", a.action_dim}};
}

inline Architecture architecture_from_json(const nlohmann::json& j) {
  Architecture a;
  a.descriptor_dim = j.at("descriptor_dim").get<std::size_t>();
  a.encoder_layers = j.at("encoder_layers").get<std::size_t>();
  a.encoder_width = j.at("encoder_width").get<std::size_t>();
  a.grid = j.at("grid").get<std::size_t>();
  const auto c1 = j.at("conv1").get<std::array<std::size_t, 4>>();
  const auto c2 = j.at("conv2").get<std::array<std::size_t, 4>>();
  a.conv1_channels = c1[0], a.conv1_kernel = c1[1], a.conv1_stride = c1[2], a.conv1_pad = c1[3];
  a.conv2_channels = c2[0], a.conv2_kernel = c2[1], a.conv2_stride = c2[2], a.conv2_pad = c2[3];
  a.cnn_features = j.at("cnn_features").get<std::size_t>();
  a.action_dim = j.at("action_dim").get<std::size_t>();
  return a;
}

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kInitialLogStd = -0.5;

/// All learnable tensors, addressed by index. Layout: for each of the two
/// encoders, (weight, bias) per layer; then conv1, conv2, cnn dense, mean
/// head, log-std head and value head, each as (weight, bias).
template <typename S>
struct PolicyParams {
  Architecture arch;
  std::vector<std::string> names;
  std::vector<Tensor<S>> tensors;

  PolicyParams() = default;
  explicit PolicyParams(const Architecture& a) : arch(a) {
    for (int e = 0; e < 2; ++e)
      for (std::size_t l = 0; l < a.encoder_layers; ++l) {
        const std::size_t in = l == 0 ? a.descriptor_dim : a.encoder_width;
        const std::string p = std::string(e == 0 ? "enc_current" : "enc_next") + "." + std::to_string(l);
        add(p + ".weight", {a.encoder_width, in});
        add(p + ".bias", {a.encoder_width});
      }
    add("conv1.weight", {a.conv1_channels, 1, a.conv1_kernel, a.conv1_kernel});
    add("conv1.bias", {a.conv1_channels});
    add("conv2.weight", {a.conv2_channels, a.conv1_channels, a.conv2_kernel, a.conv2_kernel});
    add("conv2.bias", {a.conv2_channels});
    add("cnn_dense.weight", {a.cnn_features, a.flat()});
    add("cnn_dense.bias", {a.cnn_features});
    add("mu.weight", {a.action_dim, a.embedding()});
    add("mu.bias", {a.action_dim});
    add("log_std.weight", {a.action_dim, a.embedding()});
    add("log_std.bias", {a.action_dim});
    add("value.weight", {1, a.embedding()});
    add("value.bias", {1});
  }

  std::size_t encoder_index(int enc, std::size_t layer) const { return (enc * arch.encoder_layers + layer) * 2; }
  std::size_t conv1_index() const { return 4 * arch.encoder_layers; }
  std::size_t conv2_index() const { return conv1_index() + 2; }
  std::size_t cnn_dense_index() const { return conv1_index() + 4; }
  std::size_t mu_index() const { return conv1_index() + 6; }
  std::size_t log_std_index() const { return conv1_index() + 8; }
  std::size_t value_index() const { return conv1_index() + 10; }
  /// Tensors updated at the critic learning rate.
  bool is_critic(std::size_t i) const { return i >= value_index(); }

  Tensor<S>& operator[](std::size_t i) { return tensors[i]; }
  const Tensor<S>& operator[](std::size_t i) const { return tensors[i]; }
  std::size_t size() const { return tensors.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }
  void zero() {
    for (auto& t : tensors) t.zero();
  }
  bool finite() const {
    for (const auto& t : tensors)
      for (S v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
  }
  /// Same architecture, all zeros; used as a gradient accumulator.
  PolicyParams zeros_like() const {
    PolicyParams g = *this;
    g.zero();
    return g;
  }

  template <typename T>
  PolicyParams<T> cast() const {
    PolicyParams<T> out(arch);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < tensors[i].size(); ++j) out[i][j] = static_cast<T>(tensors[i][j]);
    return out;
  }

 private:
  void add(std::string name, std::vector<std::size_t> shape) {
    names.push_back(std::move(name));
    tensors.emplace_back(std::move(shape));
  }
};

/// Uniform Glorot weights, zero biases, log-std bias at kInitialLogStd.
template <typename S>
PolicyParams<S> init_params(const Architecture& arch, std::uint64_t seed) {
  PolicyParams<S> p(arch);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < p.size(); i += 2) {
    Tensor<S>& w = p[i];
    std::size_t fan_in, fan_out;
    if (w.shape.size() == 4) {
      const std::size_t rf = w.shape[2] * w.shape[3];
      fan_in = w.shape[1] * rf;
      fan_out = w.shape[0] * rf;
    } else {
      fan_in = w.shape[1];
      fan_out = w.shape[0];
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (auto& v : w.data) v = static_cast<S>(u(rng));
  }
  for (auto& v : p[p.log_std_index() + 1].data) v = static_cast<S>(kInitialLogStd);
  return p;
}

struct NetworkOptions {
  bool spatial_encoding = true;  // false zeroes the occupancy branch
};

template <typename S>
struct ForwardCache {
  std::array<std::vector<std::vector<S>>, 2> enc_in, enc_pre;  // per encoder, per layer
  std::vector<S> image, col1, pre1, act1, col2, pre2, act2;
  std::vector<S> h;
  bool spatial = true;
};

template <typename S>
struct PolicyOutput {
  std::array<S, 3> mu{};
  std::array<S, 3> log_std{};  // unclamped head output
  S value = 0;
};

template <typename S>
PolicyOutput<S> forward(const PolicyParams<S>& p, const Observation& obs, ForwardCache<S>& cache,
                        const NetworkOptions& opt = {}) {
  const Architecture& a = p.arch;
  if (a.action_dim != 3) throw std::invalid_argument("action head must have 3 outputs");
  if (obs.occupancy.size() != a.grid * a.grid) throw std::invalid_argument("occupancy grid has the wrong size");
  const std::size_t W = a.encoder_width;
  cache.h.assign(a.embedding(), S(0));
  for (int e = 0; e < 2; ++e) {
    const Descriptor& d = e == 0 ? obs.current : obs.next;
    auto& ins = cache.enc_in[e];
    auto& pres = cache.enc_pre[e];
    ins.resize(a.encoder_layers);
    pres.resize(a.encoder_layers);
    ins[0].assign(d.begin(), d.end());
    for (std::size_t l = 0; l < a.encoder_layers; ++l) {
      const std::size_t wi = p.encoder_index(e, l);
      const std::size_t in = ins[l].size();
      pres[l].resize(W);
      dense_forward(p[wi].ptr(), p[wi + 1].ptr(), ins[l].data(), pres[l].data(), W, in);
      std::vector<S>& out = l + 1 < a.encoder_layers ? ins[l + 1] : pres[l];
      if (l + 1 < a.encoder_layers) out.resize(W);
      S* dst = l + 1 < a.encoder_layers ? out.data() : cache.h.data() + e * W;
      for (std::size_t i = 0; i < W; ++i) dst[i] = gelu(pres[l][i]);
    }
  }
  cache.spatial = opt.spatial_encoding;
  if (opt.spatial_encoding) {
    const ConvShape c1 = a.conv1(), c2 = a.conv2();
    cache.image.assign(obs.occupancy.begin(), obs.occupancy.end());
    cache.col1.resize(c1.patch() * c1.positions());
    im2col(c1, cache.image.data(), cache.col1.data());
    cache.pre1.resize(c1.out_channels * c1.positions());
    conv_forward(c1, p[p.conv1_index()].ptr(), p[p.conv1_index() + 1].ptr(), cache.col1.data(), cache.pre1.data());
    cache.act1.resize(cache.pre1.size());
    for (std::size_t i = 0; i < cache.pre1.size(); ++i) cache.act1[i] = gelu(cache.pre1[i]);
    cache.col2.resize(c2.patch() * c2.positions());
    im2col(c2, cache.act1.data(), cache.col2.data());
    cache.pre2.resize(c2.out_channels * c2.positions());
    conv_forward(c2, p[p.conv2_index()].ptr(), p[p.conv2_index() + 1].ptr(), cache.col2.data(), cache.pre2.data());
    cache.act2.resize(cache.pre2.size());
    for (std::size_t i = 0; i < cache.pre2.size(); ++i) cache.act2[i] = gelu(cache.pre2[i]);
    const std::size_t di = p.cnn_dense_index();
    dense_forward(p[di].ptr(), p[di + 1].ptr(), cache.act2.data(), cache.h.data() + 2 * W, a.cnn_features, a.flat());
  }
  PolicyOutput<S> out;
  const std::size_t E = a.embedding();
  dense_forward(p[p.mu_index()].ptr(), p[p.mu_index() + 1].ptr(), cache.h.data(), out.mu.data(), 3, E);
  dense_forward(p[p.log_std_index()].ptr(), p[p.log_std_index() + 1].ptr(), cache.h.data(), out.log_std.data(), 3, E);
  dense_forward(p[p.value_index()].ptr(), p[p.value_index() + 1].ptr(), cache.h.data(), &out.value, 1, E);
  return out;
}

template <typename S>
PolicyOutput<S> forward(const PolicyParams<S>& p, const Observation& obs, const NetworkOptions& opt = {}) {
  ForwardCache<S> cache;
  return forward(p, obs, cache, opt);
}

/// Upstream gradients with respect to the network outputs.
template <typename S>
struct OutputGrad {
  std::array<S, 3> mu{};
  std::array<S, 3> log_std{};
  S value = 0;
};

/// Accumulates parameter gradients into `grads` (same architecture as p).
template <typename S>
void backward(const PolicyParams<S>& p, const ForwardCache<S>& cache, const OutputGrad<S>& up,
              PolicyParams<S>& grads) {
  const Architecture& a = p.arch;
  if (cache.h.size() != a.embedding()) throw std::logic_error("backward called without a forward cache");
  const std::size_t E = a.embedding(), W = a.encoder_width;
  std::vector<S> dh(E, S(0));
  auto head = [&](std::size_t idx, const S* dy, std::size_t out) {
    dense_backward(p[idx].ptr(), cache.h.data(), dy, grads[idx].ptr(), grads[idx + 1].ptr(), dh.data(), out, E);
  };
  head(p.mu_index(), up.mu.data(), 3);
  head(p.log_std_index(), up.log_std.data(), 3);
  head(p.value_index(), &up.value, 1);

  std::vector<S> da, dz, dx;
  for (int e = 0; e < 2; ++e) {
    da.assign(dh.begin() + e * W, dh.begin() + (e + 1) * W);
    for (std::size_t l = a.encoder_layers; l-- > 0;) {
      const std::size_t wi = p.encoder_index(e, l);
      const auto& pre = cache.enc_pre[e][l];
      const auto& in = cache.enc_in[e][l];
      dz.resize(W);
      for (std::size_t i = 0; i < W; ++i) dz[i] = da[i] * gelu_grad(pre[i]);
      dx.assign(in.size(), S(0));
      dense_backward(p[wi].ptr(), in.data(), dz.data(), grads[wi].ptr(), grads[wi + 1].ptr(),
                     l > 0 ? dx.data() : nullptr, W, in.size());
      da.swap(dx);
    }
  }

  if (!cache.spatial) return;
  const ConvShape c1 = a.conv1(), c2 = a.conv2();
  const std::size_t di = p.cnn_dense_index();
  std::vector<S> dflat(a.flat(), S(0));
  dense_backward(p[di].ptr(), cache.act2.data(), dh.data() + 2 * W, grads[di].ptr(), grads[di + 1].ptr(),
                 dflat.data(), a.cnn_features, a.flat());
  for (std::size_t i = 0; i < dflat.size(); ++i) dflat[i] *= gelu_grad(cache.pre2[i]);
  std::vector<S> dcol2(c2.patch() * c2.positions(), S(0));
  conv_backward(c2, p[p.conv2_index()].ptr(), cache.col2.data(), dflat.data(), grads[p.conv2_index()].ptr(),
                grads[p.conv2_index() + 1].ptr(), dcol2.data());
  std::vector<S> dact1(cache.act1.size(), S(0));
  col2im_add(c2, dcol2.data(), dact1.data());
  for (std::size_t i = 0; i < dact1.size(); ++i) dact1[i] *= gelu_grad(cache.pre1[i]);
  conv_backward<S>(c1, p[p.conv1_index()].ptr(), cache.col1.data(), dact1.data(), grads[p.conv1_index()].ptr(),
                   grads[p.conv1_index() + 1].ptr(), nullptr);
}

// ---------------------------------------------------------------------------
// Diagonal Gaussian policy

inline double clamp_log_std(double s) { return std::clamp(s, kLogStdMin, kLogStdMax); }

inline const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
inline const double kHalfLog2PiE = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

struct GaussianSample {
  RawAction raw{};
  double logprob = 0.0;
};

inline double gaussian_logprob(const std::array<double, 3>& mu, const std::array<double, 3>& log_std,
                               const RawAction& a) {
  double lp = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double ls = clamp_log_std(log_std[i]);
    const double z = (a[i] - mu[i]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi;
  }
  return lp;
}

inline double gaussian_entropy(const std::array<double, 3>& log_std) {
  double h = 0.0;
  for (double s : log_std) h += clamp_log_std(s) + kHalfLog2PiE;
  return h;
}

struct LogProbEntropy {
  double logprob;
  double entropy;
};

inline LogProbEntropy logprob_and_entropy(const std::array<double, 3>& mu, const std::array<double, 3>& log_std,
                                          const RawAction& a) {
  return {gaussian_logprob(mu, log_std, a), gaussian_entropy(log_std)};
}

template <typename Rng>
GaussianSample sample_action(const std::array<double, 3>& mu, const std::array<double, 3>& log_std, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  GaussianSample s;
  for (int i = 0; i < 3; ++i) s.raw[i] = mu[i] + std::exp(clamp_log_std(log_std[i])) * n01(rng);
  s.logprob = gaussian_logprob(mu, log_std, s.raw);
  return s;
}

/// Gradients of log π(a) with respect to μ and the unclamped log-std output.
struct LogProbGrad {
  std::array<double, 3> mu{};
  std::array<double, 3> log_std{};
};

inline LogProbGrad gaussian_logprob_grad(const std::array<double, 3>& mu, const std::array<double, 3>& log_std,
                                         const RawAction& a) {
  LogProbGrad g;
  for (int i = 0; i < 3; ++i) {
    const double ls = clamp_log_std(log_std[i]);
    const double inv_var = std::exp(-2.0 * ls);
    const double d = a[i] - mu[i];
    g.mu[i] = d * inv_var;
    const bool clamped = log_std[i] < kLogStdMin || log_std[i] > kLogStdMax;
    g.log_std[i] = clamped ? 0.0 : d * d * inv_var - 1.0;
  }
  return g;
}

/// d entropy / d log-std output (1 inside the clamp range, 0 outside).
inline std::array<double, 3> gaussian_entropy_grad(const std::array<double, 3>& log_std) {
  std::array<double, 3> g{};
  for (int i = 0; i < 3; ++i) g[i] = (log_std[i] < kLogStdMin || log_std[i] > kLogStdMax) ? 0.0 : 1.0;
  return g;
}

// ---------------------------------------------------------------------------
// Adam with bias correction

template <typename S>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor<S>> m, v;

  AdamState() = default;
  explicit AdamState(const PolicyParams<S>& p) {
    for (const auto& t : p.tensors) {
      m.emplace_back(t.shape);
      v.emplace_back(t.shape);
    }
  }
};

/// One bias-corrected Adam update; `lr(i)` gives the learning rate of tensor i.
template <typename S, typename LrFn>
void adam_step(PolicyParams<S>& params, const PolicyParams<S>& grads, AdamState<S>& st, LrFn&& lr) {
  if (st.m.size() != params.size()) throw std::invalid_argument("adam state does not match parameters");
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  const S b1 = static_cast<S>(st.beta1), b2 = static_cast<S>(st.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const S eta = static_cast<S>(lr(i));
    S* theta = params[i].ptr();
    const S* g = grads[i].ptr();
    S* m = st.m[i].ptr();
    S* v = st.v[i].ptr();
    const S ic1 = static_cast<S>(1.0 / c1), ic2 = static_cast<S>(1.0 / c2), eps = static_cast<S>(st.epsilon);
    for (std::size_t j = 0, n = params[i].size(); j < n; ++j) {
      m[j] = b1 * m[j] + (S(1) - b1) * g[j];
      v[j] = b2 * v[j] + (S(1) - b2) * g[j] * g[j];
      theta[j] -= eta * (m[j] * ic1) / (std::sqrt(v[j] * ic2) + eps);
    }
  }
}

}  // namespace furnish::nn
