#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "diffvor/error.hpp"

namespace diffvor {

// Elementary operations recordable on a Tape.
enum class Op : std::uint8_t {
  kLeaf,
  kConst,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kSqrt,
  kSin,
  kCos,
  kSquare,
};

// Names a scalar recorded on a specific tape generation. Using a handle on
// any other tape (or after a reset of its own tape) is an error.
struct VarHandle {
  std::uint32_t index = 0;
  std::uint32_t tape_id = 0;
};

// d(output)/d(leaf) for every leaf, in leaf creation order.
using GradientVector = std::vector<double>;

// Append-only record of scalar operations. Local partial derivatives are
// cached when an operation is recorded, so the reverse sweep is a single
// multiply-accumulate pass in anti-topological order. Every recorded value
// and cached partial must be finite; an operation that would produce a
// non-finite number throws instead of recording it.
//
// A tape is single-writer: all recording and backward passes on one tape
// belong to one thread of control. Distinct tapes are independent.
class Tape {
 public:
  // Magnitudes at or below this are treated as singular (division,
  // coincident points feeding a square root).
  static constexpr double kDivEps = 1e-12;

  Tape();

  // Gradient-tracked input variable.
  VarHandle leaf(double value);
  // Plain recorded number; participates in arithmetic but has no gradient slot.
  VarHandle constant(double value);

  VarHandle add(VarHandle a, VarHandle b);
  VarHandle sub(VarHandle a, VarHandle b);
  VarHandle mul(VarHandle a, VarHandle b);
  VarHandle div(VarHandle a, VarHandle b);
  VarHandle sqrt(VarHandle a);
  VarHandle sin(VarHandle a);
  VarHandle cos(VarHandle a);
  VarHandle square(VarHandle a);

  // Generic dispatch: two handles for add/sub/mul/div, one otherwise.
  VarHandle arith(Op op, std::span<const VarHandle> inputs);

  double value(VarHandle h) const;

  // Reverse sweep from `output`. Returns one partial per leaf; leaves the
  // tape unchanged.
  GradientVector backward(VarHandle output) const;

  // Discards every node, re-creates the leaves (in creation order) with
  // the given values, and bumps the tape generation so stale handles are
  // rejected. Capacity is kept, so per-iteration rebuilds do not grow
  // memory.
  void reset(std::span<const double> leaf_values);

  // Handle of the ordinal-th leaf under the current generation.
  VarHandle leaf_handle(std::size_t ordinal) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaf_nodes_.size(); }
  std::uint32_t id() const noexcept { return id_; }

 private:
  struct Node {
    Op op;
    std::uint32_t a = 0, b = 0;  // input node indices; unused for leaf/const
    double value = 0.0;
    double da = 0.0, db = 0.0;   // cached local partials
  };

  std::uint32_t index_of(VarHandle h) const;
  VarHandle push(Op op, std::uint32_t a, std::uint32_t b, double value,
                 double da, double db);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> leaf_nodes_;
  std::uint32_t id_ = 0;
};

// Thin wrapper so geometric formulas read like arithmetic. Doubles mixed
// into an expression are recorded as constants.
class Expr {
 public:
  Expr(Tape& tape, VarHandle h) : tape_(&tape), h_(h) {}
  static Expr constant(Tape& tape, double v) { return {tape, tape.constant(v)}; }

  VarHandle handle() const { return h_; }
  double value() const { return tape_->value(h_); }
  Tape& tape() const { return *tape_; }

  friend Expr operator+(Expr a, Expr b) { return {a.t(), a.t().add(a.h_, b.h_)}; }
  friend Expr operator-(Expr a, Expr b) { return {a.t(), a.t().sub(a.h_, b.h_)}; }
  friend Expr operator*(Expr a, Expr b) { return {a.t(), a.t().mul(a.h_, b.h_)}; }
  friend Expr operator/(Expr a, Expr b) { return {a.t(), a.t().div(a.h_, b.h_)}; }

  friend Expr operator+(Expr a, double c) { return a + constant(a.t(), c); }
  friend Expr operator+(double c, Expr a) { return constant(a.t(), c) + a; }
  friend Expr operator-(Expr a, double c) { return a - constant(a.t(), c); }
  friend Expr operator-(double c, Expr a) { return constant(a.t(), c) - a; }
  friend Expr operator*(Expr a, double c) { return a * constant(a.t(), c); }
  friend Expr operator*(double c, Expr a) { return constant(a.t(), c) * a; }
  friend Expr operator/(Expr a, double c) { return a / constant(a.t(), c); }
  friend Expr operator/(double c, Expr a) { return constant(a.t(), c) / a; }

  friend Expr sqrt(Expr a) { return {a.t(), a.t().sqrt(a.h_)}; }
  friend Expr sin(Expr a) { return {a.t(), a.t().sin(a.h_)}; }
  friend Expr cos(Expr a) { return {a.t(), a.t().cos(a.h_)}; }
  friend Expr square(Expr a) { return {a.t(), a.t().square(a.h_)}; }

 private:
  Tape& t() const { return *tape_; }

  Tape* tape_;
  VarHandle h_;
};

}  // namespace diffvor
