#pragma once

// Asymmetric weighted negative log-likelihood on logits:
//
//   L(x, y) = -(y - eps) * max(log sigmoid(x), clip_floor) + C
//
// Positive pixels are weighted (1 - eps), background pixels -eps, so a missed
// positive costs (1 - eps) / eps times more than a spurious one.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ghost/error.hpp"
#include "ghost/grid.hpp"

namespace ghost {

struct LossConfig {
  double epsilon = 0.1;
  double clip_floor = -20.0;
  double offset_c = 2.0;

  static LossConfig with_min_offset(double epsilon, double clip_floor) {
    return {epsilon, clip_floor, epsilon * std::abs(clip_floor)};
  }

  // offset_c >= eps |clip_floor| keeps the loss nonnegative at the floor.
  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
      throw InvariantError("loss: epsilon must lie in (0, 0.5)");
    }
    if (!(clip_floor < 0.0)) throw InvariantError("loss: clip_floor must be < 0");
    if (!(offset_c >= epsilon * std::abs(clip_floor))) {
      throw InvariantError("loss: offset_c must be >= epsilon * |clip_floor| = " +
                           std::to_string(epsilon * std::abs(clip_floor)));
    }
  }
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow or cancellation.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

inline bool is_clipped(double x, const LossConfig& cfg) {
  return !(log_sigmoid(x) > cfg.clip_floor);
}

inline double asym_loss(double x, int y, const LossConfig& cfg = {}) {
  const double log_p = std::max(log_sigmoid(x), cfg.clip_floor);
  return -(y - cfg.epsilon) * log_p + cfg.offset_c;
}

// dL/dx = -(y - eps)(1 - sigmoid(x)) where unclipped, 0 inside the clip.
inline double asym_loss_grad(double x, int y, const LossConfig& cfg = {}) {
  if (is_clipped(x, cfg)) return 0.0;
  return -(y - cfg.epsilon) * sigmoid(-x);
}

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace detail

// Mean per-pixel loss. Logits and labels must share a shape; labels must be
// exactly 0 or 1.
inline double batch_loss(const Grid<double>& logits, const TrajectoryMask& labels,
                         const LossConfig& cfg = {}) {
  if (logits.width() != labels.width() || logits.height() != labels.height()) {
    throw Error("batch_loss: logits and labels differ in shape");
  }
  if (logits.empty()) throw Error("batch_loss: empty grid");
  const auto xs = logits.data();
  const auto ys = labels.data();
  std::vector<double> terms(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] != 0.0f && ys[i] != 1.0f) {
      throw Error("batch_loss: labels must be binary");
    }
    terms[i] = asym_loss(xs[i], ys[i] == 1.0f ? 1 : 0, cfg);
  }
  return detail::pairwise_sum(terms) / static_cast<double>(terms.size());
}

}  // namespace ghost
