#include "lagnet/diffkit/tape.hpp"

#include <cmath>

#include "lagnet/diffkit/primitives.hpp"
#include "lagnet/errors.hpp"

namespace lagnet::diffkit {

namespace {

thread_local std::vector<std::unique_ptr<Tape>> tape_stack;
thread_local std::size_t tape_depth = 0;

// Appends edges for the non-constant parents, then closes the node.
class NodeBuilder {
 public:
  NodeBuilder() : tape_(Tape::active()) {}

  void add(const Var& parent, double partial) {
    if (parent.is_constant() || partial == 0.0) return;
    scratch_.push_back({parent.index(), partial});
  }

  Var finish(double value) {
    if (scratch_.empty()) return Var(value);
    return {value, tape_.push(scratch_)};
  }

 private:
  Tape& tape_;
  std::vector<Edge>& scratch_ = scratch();

  static std::vector<Edge>& scratch() {
    thread_local std::vector<Edge> buffer;
    buffer.clear();
    return buffer;
  }
};

Var unary(const Var& a, double value, double partial) {
  if (a.is_constant() || partial == 0.0) return Var(value);
  const Edge edge{a.index(), partial};
  return {value, Tape::active().push(std::span<const Edge>(&edge, 1))};
}

Var binary(double value, const Var& a, double da, const Var& b, double db) {
  Edge edges[2];
  std::size_t n = 0;
  if (!a.is_constant() && da != 0.0) edges[n++] = {a.index(), da};
  if (!b.is_constant() && db != 0.0) edges[n++] = {b.index(), db};
  if (n == 0) return Var(value);
  return {value, Tape::active().push(std::span<const Edge>(edges, n))};
}

}  // namespace

std::uint32_t Tape::push_leaf() {
  offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
  return static_cast<std::uint32_t>(offsets_.size() - 2);
}

std::uint32_t Tape::push(std::span<const Edge> edges) {
  edges_.insert(edges_.end(), edges.begin(), edges.end());
  offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
  return static_cast<std::uint32_t>(offsets_.size() - 2);
}

std::vector<double> Tape::adjoints(std::uint32_t output) const {
  std::vector<double> adj(size(), 0.0);
  if (output == Var::kConstant) return adj;
  adj[output] = 1.0;
  for (std::size_t i = output + 1; i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    for (std::uint32_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
      adj[edges_[e].parent] += edges_[e].partial * a;
    }
  }
  return adj;
}

void Tape::clear() {
  offsets_.assign(1, 0);
  edges_.clear();
}

Tape& Tape::active() {
  if (tape_depth == 0) throw UsageError("no TapeScope is open on this thread");
  return *tape_stack[tape_depth - 1];
}

TapeScope::TapeScope() {
  if (tape_stack.size() <= tape_depth) tape_stack.push_back(std::make_unique<Tape>());
  tape_ = tape_stack[tape_depth].get();
  tape_->clear();
  ++tape_depth;
}

TapeScope::~TapeScope() { --tape_depth; }

Var& Var::operator+=(const Var& o) { return *this = *this + o; }
Var& Var::operator-=(const Var& o) { return *this = *this - o; }
Var& Var::operator*=(const Var& o) { return *this = *this * o; }
Var& Var::operator/=(const Var& o) { return *this = *this / o; }

Var make_node(double value, std::span<const Var> parents, std::span<const double> partials) {
  NodeBuilder node;
  for (std::size_t k = 0; k < parents.size(); ++k) node.add(parents[k], partials[k]);
  return node.finish(value);
}

Var operator-(const Var& a) { return unary(a, -a.value(), -1.0); }

Var operator+(const Var& a, const Var& b) {
  if (b.is_constant() && b.value() == 0.0) return a;
  if (a.is_constant() && a.value() == 0.0) return b;
  return binary(a.value() + b.value(), a, 1.0, b, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  if (b.is_constant() && b.value() == 0.0) return a;
  return binary(a.value() - b.value(), a, 1.0, b, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  if (a.is_constant()) {
    if (a.value() == 0.0) return Var(0.0);
    if (a.value() == 1.0) return b;
  }
  if (b.is_constant()) {
    if (b.value() == 0.0) return Var(0.0);
    if (b.value() == 1.0) return a;
  }
  return binary(a.value() * b.value(), a, b.value(), b, a.value());
}

Var operator/(const Var& a, const Var& b) {
  const double q = a.value() / b.value();
  return binary(q, a, 1.0 / b.value(), b, -q / b.value());
}

Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return unary(a, e, e);
}

Var log(const Var& a) { return unary(a, std::log(a.value()), 1.0 / a.value()); }

Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return unary(a, t, 1.0 - t * t);
}

Var sin(const Var& a) { return unary(a, std::sin(a.value()), std::cos(a.value())); }

Var cos(const Var& a) { return unary(a, std::cos(a.value()), -std::sin(a.value())); }

Var sigmoid(const Var& a) {
  const double s = diffkit::sigmoid(a.value());
  return unary(a, s, s * (1.0 - s));
}

Var softplus(const Var& a) {
  return unary(a, diffkit::softplus(a.value()), diffkit::sigmoid(a.value()));
}

Var pow(const Var& a, int n) {
  if (n == 0) return Var(1.0);
  return unary(a, diffkit::pow(a.value(), n), n * diffkit::pow(a.value(), n - 1));
}

Var linear_combination(std::span<const Var> w, std::span<const Var> x) {
  NodeBuilder node;
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sum += w[k].value() * x[k].value();
    node.add(w[k], x[k].value());
    node.add(x[k], w[k].value());
  }
  return node.finish(sum);
}

Var norm2(std::span<const Var> x) {
  double sq = 0.0;
  for (const Var& v : x) sq += v.value() * v.value();
  const double r = std::sqrt(sq);
  if (r == 0.0) return Var(0.0);
  NodeBuilder node;
  for (const Var& v : x) node.add(v, v.value() / r);
  return node.finish(r);
}

std::vector<double> gradient_of(const Var& output, std::span<const Var> inputs) {
  std::vector<double> grad(inputs.size(), 0.0);
  if (output.is_constant()) return grad;
  const auto adj = Tape::active().adjoints(output.index());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!inputs[k].is_constant()) grad[k] = adj[inputs[k].index()];
  }
  return grad;
}

}  // namespace lagnet::diffkit
