#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace steer {

/// Pairwise (ascending index, recursive halving) summation. Used everywhere a
/// reported scalar must be reproducible bit for bit.
[[nodiscard]] double pairwise_sum(const double* data, Eigen::Index n);

[[nodiscard]] inline double pairwise_sum(const Eigen::VectorXd& v) {
  return pairwise_sum(v.data(), v.size());
}

/// Pairwise dot product of two equally sized vectors.
[[nodiscard]] double pairwise_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Amplitude decibel conversion, value = 10^(db/20).
[[nodiscard]] inline double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

[[nodiscard]] inline double linear_to_db(double value) { return 20.0 * std::log10(value); }

/// Shortest decimal string that parses back to exactly the same double.
/// Locale independent ('.' decimal separator).
[[nodiscard]] std::string format_double(double value);

/// Strict locale-independent parse; throws ParseError on malformed input.
[[nodiscard]] double parse_double(const std::string& token);

/// SplitMix64 mixing, used to derive independent child seeds from a master
/// seed and a stream index.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic standard normal generator: raw mt19937_64 draws (the engine
/// is specified bit for bit by the standard) mapped to uniforms in (0,1] and
/// fed through Box-Muller. No std::normal_distribution, whose output is
/// implementation defined.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  [[nodiscard]] double next();

 private:
  [[nodiscard]] double next_unit();  // uniform in (0, 1]

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace steer
