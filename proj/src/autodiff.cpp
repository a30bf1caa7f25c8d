#include "diffvor/autodiff.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace diffvor {

namespace {

std::atomic<std::uint32_t> g_next_tape_id{1};

std::uint32_t fresh_tape_id() {
  return g_next_tape_id.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

Tape::Tape() : id_(fresh_tape_id()) {}

std::uint32_t Tape::index_of(VarHandle h) const {
  if (h.tape_id != id_) {
    throw Error("variable handle does not belong to this tape");
  }
  if (h.index >= nodes_.size()) {
    throw Error("variable handle out of range");
  }
  return h.index;
}

VarHandle Tape::push(Op op, std::uint32_t a, std::uint32_t b, double value,
                     double da, double db) {
  if (!std::isfinite(value)) {
    throw NumericError("operation produced a non-finite value");
  }
  if (!std::isfinite(da) || !std::isfinite(db)) {
    throw NumericError("operation produced a non-finite derivative");
  }
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{op, a, b, value, da, db});
  return {index, id_};
}

VarHandle Tape::leaf(double value) {
  if (!std::isfinite(value)) {
    throw NumericError("leaf value must be finite");
  }
  VarHandle h = push(Op::kLeaf, 0, 0, value, 0.0, 0.0);
  leaf_nodes_.push_back(h.index);
  return h;
}

VarHandle Tape::constant(double value) {
  if (!std::isfinite(value)) {
    throw NumericError("constant value must be finite");
  }
  return push(Op::kConst, 0, 0, value, 0.0, 0.0);
}

VarHandle Tape::add(VarHandle a, VarHandle b) {
  const std::uint32_t ia = index_of(a), ib = index_of(b);
  return push(Op::kAdd, ia, ib, nodes_[ia].value + nodes_[ib].value, 1.0, 1.0);
}

VarHandle Tape::sub(VarHandle a, VarHandle b) {
  const std::uint32_t ia = index_of(a), ib = index_of(b);
  return push(Op::kSub, ia, ib, nodes_[ia].value - nodes_[ib].value, 1.0, -1.0);
}

VarHandle Tape::mul(VarHandle a, VarHandle b) {
  const std::uint32_t ia = index_of(a), ib = index_of(b);
  const double va = nodes_[ia].value, vb = nodes_[ib].value;
  return push(Op::kMul, ia, ib, va * vb, vb, va);
}

VarHandle Tape::div(VarHandle a, VarHandle b) {
  const std::uint32_t ia = index_of(a), ib = index_of(b);
  const double va = nodes_[ia].value, vb = nodes_[ib].value;
  if (std::abs(vb) <= kDivEps) {
    throw NumericError("division by near-zero denominator (|d| <= " +
                       std::to_string(kDivEps) + ")");
  }
  return push(Op::kDiv, ia, ib, va / vb, 1.0 / vb, -va / (vb * vb));
}

VarHandle Tape::sqrt(VarHandle a) {
  const std::uint32_t ia = index_of(a);
  const double va = nodes_[ia].value;
  if (va < 0.0) {
    throw NumericError("sqrt of negative value");
  }
  const double s = std::sqrt(va);
  // 0.5 / s is the cached partial; push() rejects it when s == 0.
  return push(Op::kSqrt, ia, 0, s, 0.5 / s, 0.0);
}

VarHandle Tape::sin(VarHandle a) {
  const std::uint32_t ia = index_of(a);
  const double va = nodes_[ia].value;
  return push(Op::kSin, ia, 0, std::sin(va), std::cos(va), 0.0);
}

VarHandle Tape::cos(VarHandle a) {
  const std::uint32_t ia = index_of(a);
  const double va = nodes_[ia].value;
  return push(Op::kCos, ia, 0, std::cos(va), -std::sin(va), 0.0);
}

VarHandle Tape::square(VarHandle a) {
  const std::uint32_t ia = index_of(a);
  const double va = nodes_[ia].value;
  return push(Op::kSquare, ia, 0, va * va, 2.0 * va, 0.0);
}

VarHandle Tape::arith(Op op, std::span<const VarHandle> inputs) {
  const auto need = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw Error("arith: wrong input count for operation");
    }
  };
  switch (op) {
    case Op::kAdd: need(2); return add(inputs[0], inputs[1]);
    case Op::kSub: need(2); return sub(inputs[0], inputs[1]);
    case Op::kMul: need(2); return mul(inputs[0], inputs[1]);
    case Op::kDiv: need(2); return div(inputs[0], inputs[1]);
    case Op::kSqrt: need(1); return sqrt(inputs[0]);
    case Op::kSin: need(1); return sin(inputs[0]);
    case Op::kCos: need(1); return cos(inputs[0]);
    case Op::kSquare: need(1); return square(inputs[0]);
    case Op::kLeaf:
    case Op::kConst:
      break;
  }
  throw Error("arith: not an arithmetic operation");
}

double Tape::value(VarHandle h) const { return nodes_[index_of(h)].value; }

GradientVector Tape::backward(VarHandle output) const {
  const std::uint32_t out = index_of(output);
  std::vector<double> adjoint(nodes_.size(), 0.0);
  adjoint[out] = 1.0;
  for (std::uint32_t i = out + 1; i-- > 0;) {
    const double seed = adjoint[i];
    if (seed == 0.0) continue;
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
        adjoint[n.a] += seed * n.da;
        adjoint[n.b] += seed * n.db;
        break;
      case Op::kSqrt:
      case Op::kSin:
      case Op::kCos:
      case Op::kSquare:
        adjoint[n.a] += seed * n.da;
        break;
    }
  }
  GradientVector grads(leaf_nodes_.size());
  for (std::size_t k = 0; k < leaf_nodes_.size(); ++k) {
    grads[k] = adjoint[leaf_nodes_[k]];
  }
  return grads;
}

void Tape::reset(std::span<const double> leaf_values) {
  if (leaf_values.size() != leaf_nodes_.size()) {
    throw Error("reset: leaf value count does not match leaf count");
  }
  for (double v : leaf_values) {
    if (!std::isfinite(v)) {
      throw NumericError("reset: leaf value must be finite");
    }
  }
  nodes_.clear();
  leaf_nodes_.clear();
  id_ = fresh_tape_id();
  for (double v : leaf_values) {
    leaf(v);
  }
}

VarHandle Tape::leaf_handle(std::size_t ordinal) const {
  if (ordinal >= leaf_nodes_.size()) {
    throw Error("leaf_handle: ordinal out of range");
  }
  return {leaf_nodes_[ordinal], id_};
}

}  // namespace diffvor
