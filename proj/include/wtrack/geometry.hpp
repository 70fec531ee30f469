#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace wtrack {

/// Axis-aligned box in (left, top, width, height) form, continuous pixels.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h) && w > 0.0 && h > 0.0;
  }

  BoundingBox translated(double dx, double dy) const { return {x + dx, y + dy, w, h}; }
  BoundingBox scaled(double s) const { return {x * s, y * s, w * s, h * s}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline BoundingBox box_from_center(double cx, double cy, double w, double h) {
  return {cx - 0.5 * w, cy - 0.5 * h, w, h};
}

/// Intersection over union. Touching boxes give 0.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  // Fixed operand order so iou(a, b) and iou(b, a) run identical arithmetic.
  const bool swap = std::tie(b.x, b.y, b.w, b.h) < std::tie(a.x, a.y, a.w, a.h);
  const BoundingBox& p = swap ? b : a;
  const BoundingBox& q = swap ? a : b;

  const double iw = std::min(p.right(), q.right()) - std::max(p.x, q.x);
  const double ih = std::min(p.bottom(), q.bottom()) - std::max(p.y, q.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = p.area() + q.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Dense row-major matrix of association costs.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_)
      throw std::invalid_argument("CostMatrix: value count does not match shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> values() const { return values_; }

  CostMatrix transposed() const {
    CostMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Entry (i, j) is 1 - iou(rows[i], cols[j]).
inline CostMatrix iou_distance_matrix(std::span<const BoundingBox> rows,
                                      std::span<const BoundingBox> cols) {
  CostMatrix m(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = 1.0 - iou(rows[i], cols[j]);
  return m;
}

}  // namespace wtrack
