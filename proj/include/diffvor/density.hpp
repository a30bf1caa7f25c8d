#pragma once

#include <memory>

#include "diffvor/autodiff.hpp"
#include "diffvor/geometry.hpp"
#include "diffvor/voronoi.hpp"

namespace diffvor {

// Analytic population density rho(x, y), evaluable both as plain numbers
// and as tape expressions so gradients flow through sample positions.
class DensityField {
 public:
  virtual ~DensityField() = default;
  virtual double value(Vec2 p) const = 0;
  virtual VarHandle emit(Tape& tape, const DiffPoint& p) const = 0;
};

class ConstantDensity final : public DensityField {
 public:
  explicit ConstantDensity(double level) : level_(level) {}
  double value(Vec2) const override { return level_; }
  VarHandle emit(Tape& tape, const DiffPoint&) const override {
    return tape.constant(level_);
  }

 private:
  double level_;
};

// rho(x, y) = sin(freq * x) + sin(freq * y) + offset
class SinusoidDensity final : public DensityField {
 public:
  explicit SinusoidDensity(double freq = 10.0, double offset = 2.0)
      : freq_(freq), offset_(offset) {}
  double value(Vec2 p) const override {
    return std::sin(freq_ * p.x) + std::sin(freq_ * p.y) + offset_;
  }
  VarHandle emit(Tape& tape, const DiffPoint& p) const override {
    const Expr x{tape, p.x}, y{tape, p.y};
    return (sin(freq_ * x) + sin(freq_ * y) + offset_).handle();
  }

 private:
  double freq_;
  double offset_;
};

}  // namespace diffvor
