#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ghost/error.hpp"

namespace ghost {

// Dense row-major image-plane grid. (x, y) = (column, row), origin top-left.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error("negative grid size");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Generated labels hold {0, 1}; predictions under evaluation hold [0, 1].
using TrajectoryMask = Grid<float>;

inline std::size_t count_positive(const TrajectoryMask& mask) {
  std::size_t n = 0;
  for (const float v : mask.data()) n += v > 0.0f;
  return n;
}

}  // namespace ghost
