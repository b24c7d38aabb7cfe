#pragma once

// Binary checkpoint: magic, format version, a JSON header (architecture plus
// caller metadata), then named tensors as (name, shape, little-endian f64).
//
//   "FURNCKPT" | u32 version | u64 header_len | header bytes
//   u32 tensor_count | per tensor: u32 name_len, name, u32 rank, u64 dims..., f64 data...

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "furnish/nn.hpp"

namespace furnish::nn {

inline constexpr char kCheckpointMagic[8] = {'F', 'U', 'R', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  PolicyParams<double> params;
  std::optional<AdamState<double>> adam;
  nlohmann::json metadata = nlohmann::json::object();
};

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) { put_le(out, std::bit_cast<std::uint64_t>(d)); }

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  template <typename T>
  T get(const std::string& what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  double f64(const std::string& what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }
  std::string bytes(std::size_t n, const std::string& what) {
    need(n, what);
    std::string r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  bool at_end() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n, const std::string& what) {
    if (s_.size() - pos_ < n) throw CheckpointError("checkpoint truncated while reading " + what);
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

inline void put_tensor(std::string& out, const std::string& name, const Tensor<double>& t) {
  put_le(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put_le(out, static_cast<std::uint32_t>(t.shape.size()));
  for (auto d : t.shape) put_le(out, static_cast<std::uint64_t>(d));
  for (double v : t.data) put_f64(out, v);
}

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string r = "[";
  for (std::size_t i = 0; i < s.size(); ++i) r += (i ? "," : "") + std::to_string(s[i]);
  return r + "]";
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  nlohmann::json header = {{"version", kCheckpointVersion},
                           {"architecture", to_json(ck.params.arch)},
                           {"metadata", ck.metadata},
                           {"has_adam", ck.adam.has_value()}};
  if (ck.adam) {
    header["adam"] = {{"beta1", ck.adam->beta1},
                      {"beta2", ck.adam->beta2},
                      {"epsilon", ck.adam->epsilon},
                      {"step", ck.adam->step}};
  }
  const std::string hs = header.dump();
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_le(out, kCheckpointVersion);
  detail::put_le(out, static_cast<std::uint64_t>(hs.size()));
  out += hs;
  const std::size_t n = ck.params.size();
  detail::put_le(out, static_cast<std::uint32_t>(ck.adam ? 3 * n : n));
  for (std::size_t i = 0; i < n; ++i) detail::put_tensor(out, ck.params.names[i], ck.params[i]);
  if (ck.adam) {
    for (std::size_t i = 0; i < n; ++i) detail::put_tensor(out, "adam_m/" + ck.params.names[i], ck.adam->m[i]);
    for (std::size_t i = 0; i < n; ++i) detail::put_tensor(out, "adam_v/" + ck.params.names[i], ck.adam->v[i]);
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
  detail::Reader r(bytes);
  if (r.bytes(sizeof kCheckpointMagic, "magic") != std::string(kCheckpointMagic, sizeof kCheckpointMagic))
    throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto hlen = r.get<std::uint64_t>("header length");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.bytes(hlen, "header"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }
  Checkpoint ck;
  try {
    ck.params = PolicyParams<double>(architecture_from_json(header.at("architecture")));
    ck.metadata = header.value("metadata", nlohmann::json::object());
    if (header.value("has_adam", false)) {
      AdamState<double> st(ck.params);
      const auto& a = header.at("adam");
      st.beta1 = a.at("beta1").get<double>();
      st.beta2 = a.at("beta2").get<double>();
      st.epsilon = a.at("epsilon").get<double>();
      st.step = a.at("step").get<std::uint64_t>();
      ck.adam = std::move(st);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  const std::size_t n = ck.params.size();
  const std::size_t expected = ck.adam ? 3 * n : n;
  const auto count = r.get<std::uint32_t>("tensor count");
  if (count != expected)
    throw CheckpointError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                          std::to_string(expected));
  for (std::size_t k = 0; k < expected; ++k) {
    const std::size_t i = k % n;
    const std::string prefix = k < n ? "" : (k < 2 * n ? "adam_m/" : "adam_v/");
    const std::string want = prefix + ck.params.names[i];
    Tensor<double>& dst = k < n ? ck.params[i] : (k < 2 * n ? ck.adam->m[i] : ck.adam->v[i]);
    const std::string where = "tensor '" + want + "'";
    const auto name_len = r.get<std::uint32_t>(where + " name");
    const std::string name = r.bytes(name_len, where + " name");
    if (name != want) throw CheckpointError("unexpected tensor '" + name + "' where '" + want + "' belongs");
    const auto rank = r.get<std::uint32_t>(where + " rank");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>(where + " shape"));
    if (shape != dst.shape)
      throw CheckpointError(where + " has shape " + detail::shape_str(shape) + ", expected " +
                            detail::shape_str(dst.shape));
    for (auto& v : dst.data) {
      v = r.f64(where + " payload");
      if (!std::isfinite(v)) throw CheckpointError(where + " contains a non-finite value");
    }
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes after the last tensor");
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open '" + path + "' for writing");
  const std::string bytes = serialize_checkpoint(ck);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("failed writing '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace furnish::nn
