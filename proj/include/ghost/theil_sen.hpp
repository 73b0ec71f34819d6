#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ghost/error.hpp"

namespace ghost {

// Exact median; even counts average the two middle values. Reorders `values`.
inline double median_inplace(std::span<double> values) {
  if (values.empty()) throw Error("median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return lower + (upper - lower) / 2.0;
}

inline double median(std::vector<double> values) { return median_inplace(values); }

// y = slope * z + intercept
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;

  bool operator==(const LineFit&) const = default;
};

struct ZY {
  double z = 0.0;
  double y = 0.0;
};

struct TheilSenOptions {
  // Sample counts above this switch from all pairs to random pair sampling.
  std::size_t exact_limit = 500;
  // Pairs drawn in sampling mode; the exact-mode pair count at the limit.
  std::size_t sampled_pairs = 500 * 499 / 2;
  std::uint64_t seed = 0x7e11'5e17'0000'0001ULL;
};

// Theil-Sen line fit: slope is the median of all pairwise slopes with
// distinct z; intercept is the median of y_i - slope * z_i.
inline LineFit theil_sen(std::span<const ZY> samples,
                         const TheilSenOptions& opts = {}) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error("theil_sen: need at least 2 samples");

  std::vector<double> slopes;
  if (n <= opts.exact_limit) {
    slopes.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        // Orient each pair by z so the quotient does not depend on input order.
        const ZY* a = &samples[i];
        const ZY* b = &samples[j];
        if (a->z == b->z) continue;
        if (b->z < a->z) std::swap(a, b);
        slopes.push_back((b->y - a->y) / (b->z - a->z));
      }
    }
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    slopes.reserve(opts.sampled_pairs);
    for (std::size_t k = 0; k < opts.sampled_pairs; ++k) {
      const auto i = pick(rng);
      const auto j = pick(rng);
      const ZY* a = &samples[i];
      const ZY* b = &samples[j];
      if (a->z == b->z) continue;
      if (b->z < a->z) std::swap(a, b);
      slopes.push_back((b->y - a->y) / (b->z - a->z));
    }
    if (slopes.empty()) {
      // Extremely clustered z: fall back to a scan for any distinct pair.
      for (std::size_t i = 1; i < n && slopes.empty(); ++i) {
        if (samples[i].z != samples[0].z) {
          const ZY* a = &samples[0];
          const ZY* b = &samples[i];
          if (b->z < a->z) std::swap(a, b);
          slopes.push_back((b->y - a->y) / (b->z - a->z));
        }
      }
    }
  }
  if (slopes.empty()) throw Error("theil_sen: all z values are identical");

  LineFit fit;
  fit.slope = median_inplace(slopes);
  std::vector<double> intercepts;
  intercepts.reserve(n);
  for (const auto& s : samples) intercepts.push_back(s.y - fit.slope * s.z);
  fit.intercept = median_inplace(intercepts);
  return fit;
}

}  // namespace ghost
