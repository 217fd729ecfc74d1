#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ctxpoe/errors.hpp"

namespace ctxpoe {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(x) with log(0) = -inf rather than a domain error.
inline double safe_log(double x) {
  return x > 0.0 ? std::log(x) : kNegInf;
}

// log(sum_i exp(v_i)) with max-subtraction. -inf entries drop out of the
// sum; if every entry is -inf the result is -inf.
inline double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) {
    if (x != kNegInf) s += std::exp(x - m);
  }
  return m + std::log(s);
}

// Stable softmax over fixed-size logits.
template <std::size_t N>
std::array<double, N> softmax(const std::array<double, N>& logits) {
  double m = kNegInf;
  for (double x : logits) m = std::max(m, x);
  if (m == kNegInf) throw InternalError("softmax: all logits are -inf");
  std::array<double, N> out{};
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& x : out) x /= s;
  return out;
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) throw InternalError("mean_of: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Population standard deviation (divide by N).
inline double population_std(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Dense row-major matrix of feature rows.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rs) {
    FeatureMatrix m(rs.size(), rs.empty() ? 0 : rs.front().size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (rs[i].size() != m.cols) throw InternalError("FeatureMatrix: ragged rows");
      std::copy(rs[i].begin(), rs[i].end(), m.row(i).begin());
    }
    return m;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

}  // namespace ctxpoe
