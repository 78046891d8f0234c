#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>

namespace odta {

/// Simple temporal network over time points 0..n-1, where point 0 is the
/// reference "now". A constraint (from, to, w) means t_to - t_from <= w and is
/// stored as the edge from -> to with weight w. solve() runs Floyd-Warshall;
/// the network is consistent iff the distance graph has no negative cycle.
template <typename Scalar = double>
class TemporalNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  explicit TemporalNetwork(Eigen::Index points = 1) : edges_(Matrix::Constant(points, points, kInf)) {
    if (points < 1) throw std::invalid_argument("temporal network needs a reference point");
    edges_.diagonal().setZero();
  }

  Eigen::Index size() const { return edges_.rows(); }

  Eigen::Index add_point() {
    const Eigen::Index n = size();
    edges_.conservativeResize(n + 1, n + 1);
    edges_.row(n).setConstant(kInf);
    edges_.col(n).setConstant(kInf);
    edges_(n, n) = Scalar(0);
    solved_ = false;
    return n;
  }

  /// t_to - t_from <= w; parallel constraints keep the tightest bound.
  void add_constraint(Eigen::Index from, Eigen::Index to, Scalar w) {
    check(from);
    check(to);
    if (w < edges_(from, to)) edges_(from, to) = w;
    solved_ = false;
  }

  /// t_to - t_from >= gap
  void require_gap(Eigen::Index from, Eigen::Index to, Scalar gap) { add_constraint(to, from, -gap); }

  /// lo <= t_point - t_0 <= hi; pass +/-inf to leave a side open.
  void window(Eigen::Index point, Scalar lo, Scalar hi) {
    if (lo > -kInf) add_constraint(point, 0, -lo);
    if (hi < kInf) add_constraint(0, point, hi);
  }

  /// All-pairs shortest paths. `tolerance` absorbs rounding when deciding
  /// whether a diagonal entry is negative.
  bool solve(Scalar tolerance = Scalar(0)) {
    dist_ = edges_;
    const Eigen::Index n = size();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vector via_col = dist_.col(k);
      const RowVector via_row = dist_.row(k);
      dist_ = dist_.cwiseMin(via_col.replicate(1, n) + via_row.replicate(n, 1));
    }
    consistent_ = (dist_.diagonal().array() >= -tolerance).all();
    solved_ = true;
    return consistent_;
  }

  bool solved() const { return solved_; }
  bool consistent() const {
    require_solved();
    return consistent_;
  }

  const Matrix& edges() const { return edges_; }
  const Matrix& distances() const {
    require_solved();
    return dist_;
  }

  /// Earliest and latest offsets from the reference point.
  Scalar earliest(Eigen::Index point) const {
    require_solved();
    return -dist_(point, 0);
  }
  Scalar latest(Eigen::Index point) const {
    require_solved();
    return dist_(0, point);
  }

 private:
  void check(Eigen::Index p) const {
    if (p < 0 || p >= size()) throw std::out_of_range("time point out of range");
  }
  void require_solved() const {
    if (!solved_) throw std::logic_error("temporal network not solved");
  }

  Matrix edges_;
  Matrix dist_;
  bool solved_ = false;
  bool consistent_ = false;
};

}  // namespace odta
