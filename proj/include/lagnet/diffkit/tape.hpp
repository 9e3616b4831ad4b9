#pragma once

// Reverse-mode automatic differentiation on a per-thread tape.
//
// A Var is a double plus an index into the active tape. Constants carry
// kConstant and never occupy a tape slot, so expressions mixing parameters with
// plain data only record the parameter-dependent part. Nodes are n-ary: each
// records the local partial derivative to every non-constant parent.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace lagnet::diffkit {

struct Edge {
  std::uint32_t parent;
  double partial;
};

class Tape {
 public:
  std::uint32_t push_leaf();
  std::uint32_t push(std::span<const Edge> edges);

  /// Adjoint of every node with respect to `output` (d output / d node).
  std::vector<double> adjoints(std::uint32_t output) const;

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  void clear();

  /// Innermost tape of the calling thread; throws when no TapeScope is open.
  static Tape& active();

 private:
  friend class TapeScope;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<Edge> edges_;
};

/// Opens a fresh tape for the calling thread. Scopes nest; Vars belong to the
/// innermost scope that was open when they were created.
class TapeScope {
 public:
  TapeScope();
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

  Tape& tape() noexcept { return *tape_; }

 private:
  Tape* tape_;
};

class Var {
 public:
  static constexpr std::uint32_t kConstant = UINT32_MAX;

  Var() = default;
  Var(double value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Var(double value, std::uint32_t index) : value_(value), index_(index) {}

  /// New independent variable on the active tape.
  static Var leaf(double value) { return {value, Tape::active().push_leaf()}; }

  double value() const noexcept { return value_; }
  std::uint32_t index() const noexcept { return index_; }
  bool is_constant() const noexcept { return index_ == kConstant; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);

 private:
  double value_ = 0.0;
  std::uint32_t index_ = kConstant;
};

/// Builds a node with the given value and partials to `parents`. Constant
/// parents and zero partials are dropped; if nothing remains the result is a
/// constant.
Var make_node(double value, std::span<const Var> parents, std::span<const double> partials);

Var operator-(const Var& a);
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);

Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var pow(const Var& a, int n);

/// Σ w_k x_k recorded as a single node.
Var linear_combination(std::span<const Var> w, std::span<const Var> x);

/// Euclidean norm with the subgradient 0 at the origin.
Var norm2(std::span<const Var> x);

/// d output / d p for each p in `inputs`, by one backward sweep of the active tape.
std::vector<double> gradient_of(const Var& output, std::span<const Var> inputs);

}  // namespace lagnet::diffkit
