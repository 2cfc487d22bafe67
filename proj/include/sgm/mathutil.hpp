#pragma once

#include <algorithm>
#include <cmath>

namespace sgm {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow for large |z|.
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// log sigma(z) = -softplus(-z)
inline double log_sigmoid(double z) { return -softplus(-z); }

inline double log_normal_pdf(double x, double mean, double sd) {
  double r = (x - mean) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * r * r;
}

inline double normal_pdf(double x, double mean, double sd) {
  return std::exp(log_normal_pdf(x, mean, sd));
}

inline double log_sum_exp(double a, double b) {
  double hi = std::max(a, b);
  if (!std::isfinite(hi)) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace sgm
