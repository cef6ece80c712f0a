#pragma once

#include <functional>

#include "dpc/block_vector.hpp"

namespace dpc {

/// Vector-valued function of time together with its first two derivatives.
struct VectorSignal {
  int dimension = 0;
  std::function<Vec(double)> value;
  std::function<Vec(double)> rate;
  std::function<Vec(double)> acceleration;

  static VectorSignal zero(int dim);
  static VectorSignal constant(Vec v);
  /// Component-wise amplitude * cos(phase + omega * t).
  static VectorSignal cosine(Vec amplitude, Vec phase, double omega);
  /// Component-wise a + b * t.
  static VectorSignal affine(Vec offset, Vec slope);
};

}  // namespace dpc
