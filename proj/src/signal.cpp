#include "dpc/signal.hpp"

#include <stdexcept>

namespace dpc {

VectorSignal VectorSignal::zero(int dim) {
  return constant(Vec::Zero(dim));
}

VectorSignal VectorSignal::constant(Vec v) {
  const auto dim = static_cast<int>(v.size());
  return VectorSignal{dim, [v](double) { return v; },
                      [dim](double) { return Vec(Vec::Zero(dim)); },
                      [dim](double) { return Vec(Vec::Zero(dim)); }};
}

VectorSignal VectorSignal::cosine(Vec amplitude, Vec phase, double omega) {
  if (amplitude.size() != phase.size()) {
    throw std::invalid_argument("cosine signal: amplitude/phase size mismatch");
  }
  const auto dim = static_cast<int>(amplitude.size());
  return VectorSignal{
      dim,
      [=](double t) { return Vec(amplitude.array() * (phase.array() + omega * t).cos()); },
      [=](double t) { return Vec(-omega * amplitude.array() * (phase.array() + omega * t).sin()); },
      [=](double t) {
        return Vec(-omega * omega * amplitude.array() * (phase.array() + omega * t).cos());
      }};
}

VectorSignal VectorSignal::affine(Vec offset, Vec slope) {
  if (offset.size() != slope.size()) {
    throw std::invalid_argument("affine signal: offset/slope size mismatch");
  }
  const auto dim = static_cast<int>(offset.size());
  return VectorSignal{dim, [=](double t) { return Vec(offset + t * slope); },
                      [=](double) { return slope; },
                      [dim](double) { return Vec(Vec::Zero(dim)); }};
}

}  // namespace dpc
