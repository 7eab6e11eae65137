#include "steer/numeric.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

#include "steer/types.hpp"

namespace steer {

namespace {

double pairwise_range(const double* data, Eigen::Index lo, Eigen::Index hi) {
  const Eigen::Index n = hi - lo;
  if (n <= 8) {
    double acc = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) acc += data[i];
    return acc;
  }
  const Eigen::Index mid = lo + n / 2;
  return pairwise_range(data, lo, mid) + pairwise_range(data, mid, hi);
}

}  // namespace

double pairwise_sum(const double* data, Eigen::Index n) {
  if (n == 0) return 0.0;
  return pairwise_range(data, 0, n);
}

double pairwise_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw DimensionError("pairwise_dot: size mismatch, " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  Eigen::VectorXd prod = a.cwiseProduct(b);
  return pairwise_sum(prod.data(), prod.size());
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("malformed number: '" + token + "'");
  return value;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double NormalSampler::next_unit() {
  // (0, 1]: 53 random bits, then shift away from zero so log() is safe.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1p-53;
}

double NormalSampler::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

}  // namespace steer
