#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace shilov {

/// Seeded source of all randomness in the library.
///
/// mt19937_64 for the bit stream; uniforms take the top 53 bits and normals
/// use Box-Muller, so a given seed yields the same stream on every platform
/// (std::normal_distribution is implementation-defined and is avoided).
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64+boxmuller/v1";

  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Independent stream for task `stream` under the same root seed.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed) ^ mix(stream + 0x9e3779b97f4a7c15ULL));
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  /// Standard complex Gaussian (independent real and imaginary parts, each N(0, 1/2)).
  std::complex<double> complex_normal() {
    const double s = M_SQRT1_2;
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  Eigen::MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace shilov
