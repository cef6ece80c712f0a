#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace dpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Stacked decision variable y in R^{np}, addressed per node block.
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(int n, int p) : n_(n), p_(p), data_(Vec::Zero(static_cast<Eigen::Index>(n) * p)) {}
  BlockVector(int n, int p, Vec data) : n_(n), p_(p), data_(std::move(data)) {
    if (data_.size() != static_cast<Eigen::Index>(n) * p) {
      throw std::invalid_argument("BlockVector: stacked size does not equal n*p");
    }
  }

  static BlockVector constant(int n, int p, double value) {
    return BlockVector(n, p, Vec::Constant(static_cast<Eigen::Index>(n) * p, value));
  }

  int n() const { return n_; }
  int p() const { return p_; }
  Eigen::Index dimension() const { return data_.size(); }

  auto block(int i) { return data_.segment(static_cast<Eigen::Index>(i) * p_, p_); }
  auto block(int i) const { return data_.segment(static_cast<Eigen::Index>(i) * p_, p_); }

  const Vec& stacked() const { return data_; }
  Vec& stacked() { return data_; }

  double norm() const { return data_.norm(); }
  bool conforms(int n, int p) const { return n_ == n && p_ == p; }
  bool all_finite() const { return data_.allFinite(); }

  BlockVector& operator+=(const BlockVector& o) {
    check(o);
    data_ += o.data_;
    return *this;
  }
  BlockVector& operator-=(const BlockVector& o) {
    check(o);
    data_ -= o.data_;
    return *this;
  }
  BlockVector& operator*=(double s) {
    data_ *= s;
    return *this;
  }

  friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
  friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
  friend BlockVector operator*(double s, BlockVector a) { return a *= s; }
  friend BlockVector operator-(BlockVector a) { return a *= -1.0; }

  bool operator==(const BlockVector& o) const {
    return n_ == o.n_ && p_ == o.p_ && data_ == o.data_;
  }

 private:
  void check(const BlockVector& o) const {
    if (n_ != o.n_ || p_ != o.p_) throw std::invalid_argument("BlockVector: shape mismatch");
  }

  int n_ = 0;
  int p_ = 0;
  Vec data_;
};

}  // namespace dpc
