#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "ristrack/common.hpp"

namespace ristrack {

// Deterministic stream derivation: every consumer of randomness owns a stream
// derived from the root seed and a path of integer tags
// (episode -> frame -> block -> purpose). Adding parallelism can therefore
// never change which numbers a given episode sees.
//
// The engine is std::mt19937_64 (bit-exact across platforms); the uniform and
// normal transforms are implemented here instead of <random> distributions,
// whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; caches the second deviate
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  // CN(0, 1): independent real/imag parts N(0, 1/2)
  cx_double cnormal() {
    const double s = 1.0 / std::sqrt(2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  cx_mat cnormal_mat(uword n_rows, uword n_cols) {
    cx_mat out(n_rows, n_cols);
    for (uword j = 0; j < n_cols; ++j)
      for (uword i = 0; i < n_rows; ++i) out(i, j) = cnormal();
    return out;
  }

  cx_vec cnormal_vec(uword n) {
    cx_vec out(n);
    for (uword i = 0; i < n; ++i) out(i) = cnormal();
    return out;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Mixes the root seed with a tag path into a child seed.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::splitmix64(root);
  for (std::uint64_t tag : path) h = detail::splitmix64(h ^ tag);
  return h;
}

inline RngStream derive_stream(std::uint64_t root,
                               std::initializer_list<std::uint64_t> path) {
  return RngStream(derive_seed(root, path));
}

// Fixed tags for the seed hierarchy.
namespace seed_tag {
inline constexpr std::uint64_t kMobility = 0x01;
inline constexpr std::uint64_t kStaticPaths = 0x02;
inline constexpr std::uint64_t kNlosInit = 0x03;
inline constexpr std::uint64_t kNlosEvolve = 0x04;
inline constexpr std::uint64_t kPilotNoise = 0x05;
inline constexpr std::uint64_t kHcNoise = 0x06;
inline constexpr std::uint64_t kFixedSensing = 0x07;
inline constexpr std::uint64_t kWeightInit = 0x08;
inline constexpr std::uint64_t kTrainEpisodes = 0x09;
inline constexpr std::uint64_t kValEpisodes = 0x0a;
inline constexpr std::uint64_t kEvalEpisodes = 0x0b;
inline constexpr std::uint64_t kBaseline = 0x0c;
}  // namespace seed_tag

}  // namespace ristrack
