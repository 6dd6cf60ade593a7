#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace rationeval {

// splitmix64; deterministic across platforms, unlike <random> distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Derives an independent stream, e.g. Rng(seed).fork(tag, index).
  Rng fork(uint64_t tag, uint64_t index = 0) const {
    Rng r(state_);
    r.state_ ^= 0x9e3779b97f4a7c15ULL * (tag + 1);
    r.next();
    r.state_ += index * 0xbf58476d1ce4e5b9ULL;
    r.next();
    return r;
  }

  // Named stream; the tag is FNV-1a hashed so call sites stay readable.
  Rng fork(std::string_view tag, uint64_t index = 0) const {
    uint64_t h = 1469598103934665603ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return fork(h, index);
  }

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Modulo bias is irrelevant here; determinism is not.
  uint64_t below(uint64_t n) { return next() % n; }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one draw per call.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + stddev * z;
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace rationeval
