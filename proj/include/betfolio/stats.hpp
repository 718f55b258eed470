#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <vector>

#include "betfolio/error.hpp"

namespace betfolio {

// 64-bit finalizer (the splitmix64 output mix). Used on its own to spread
// seeds and stream indices before they are combined.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// splitmix64: a tiny, fast, splittable generator with a golden-ratio
// increment. Deterministic across platforms, which the simulation
// reproducibility contract depends on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unit-rate exponential; log1p keeps small draws accurate.
  double exponential() { return -std::log1p(-uniform01()); }

 private:
  std::uint64_t state_;
};

// Independent stream for one simulation index under a master seed. Both
// inputs pass through the finalizer so neighbouring indices land in unrelated
// regions of the state space instead of overlapping sequences.
inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t a = mix64(seed ^ 0xA3C59AC2F0B2AD41ull);
  const std::uint64_t b = mix64(index * 0x9E3779B97F4A7C15ull + 0x1D8E4E27C47D124Full);
  return SplitMix64(a ^ b);
}

// Uniform draw from the (m-1)-simplex: normalized unit-rate exponentials,
// i.e. a Dirichlet draw with every parameter equal to 1.
inline std::vector<double> dirichlet_uniform(SplitMix64& rng, std::size_t m) {
  if (m == 0) fail(ErrorCode::InvalidInput, "cannot draw weights over zero bets");
  std::vector<double> weights(m);
  double total = 0.0;
  for (double& w : weights) {
    w = rng.exponential();
    total += w;
  }
  if (total <= 0.0) {
    // All draws zero has vanishing probability; fall back to uniform weights.
    for (double& w : weights) w = 1.0 / static_cast<double>(m);
    return weights;
  }
  for (double& w : weights) w /= total;
  return weights;
}

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) fail(ErrorCode::InvalidInput, "mean of an empty sample");
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator).
inline double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) fail(ErrorCode::InvalidInput, "sample sd needs at least two values");
  const double mean = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz iteration).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  fail(ErrorCode::Internal, "incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0))
    fail(ErrorCode::InvalidInput, "incomplete beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    fail(ErrorCode::InvalidInput, "incomplete beta argument outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                          (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Upper-tail probability P(T >= t) of Student's t with df degrees of freedom.
inline double student_t_upper_pvalue(double t, double df) {
  if (!(df > 0.0)) fail(ErrorCode::InvalidInput, "degrees of freedom must be positive");
  const double x = df / (df + t * t);
  const double tail = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, x);  // P(T >= |t|)
  return t >= 0.0 ? tail : 1.0 - tail;
}

// One-sided one-sample t test of "the mean is positive" (null: mean <= 0).
// Returns the upper-tail p-value, or nothing for fewer than two samples.
// A degenerate sample (zero spread) resolves by the sign of the mean.
inline std::optional<double> t_test_mean_positive(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::nullopt;
  const double mean = mean_of(xs);
  const double sd = sample_sd(xs);
  if (sd == 0.0) {
    if (mean > 0.0) return 0.0;
    if (mean < 0.0) return 1.0;
    return 0.5;
  }
  const double t = mean / (sd / std::sqrt(static_cast<double>(xs.size())));
  return student_t_upper_pvalue(t, static_cast<double>(xs.size() - 1));
}

// Linear-interpolation quantile (the common "type 7" definition), q in [0, 1].
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) fail(ErrorCode::InvalidInput, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::InvalidInput, "quantile level outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

}  // namespace betfolio
