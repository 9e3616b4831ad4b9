#include "lagnet/eldyn/lagrangian.hpp"

#include "lagnet/errors.hpp"

namespace lagnet::eldyn {

Lagrangian::Lagrangian(std::size_t dof, ValueFn value, BundleFn bundle)
    : dof_(dof), value_(std::move(value)), bundle_(std::move(bundle)) {
  if (dof_ == 0) throw UsageError("a Lagrangian needs at least one degree of freedom");
}

void Lagrangian::check(const PhaseState& s) const {
  s.validate();
  if (s.dof() != dof_) {
    throw UsageError("state has " + std::to_string(s.dof()) + " coordinates, Lagrangian expects " +
                     std::to_string(dof_));
  }
}

double Lagrangian::operator()(const PhaseState& s) const {
  check(s);
  return value_(s);
}

diffkit::DerivativeBundle Lagrangian::bundle(const PhaseState& s) const {
  check(s);
  return bundle_(s);
}

Lagrangian operator*(double c, const Lagrangian& l) {
  return Lagrangian(
      l.dof_, [c, v = l.value_](const PhaseState& s) { return c * v(s); },
      [c, b = l.bundle_](const PhaseState& s) {
        auto out = b(s);
        out.value *= c;
        for (double& g : out.gradient) g *= c;
        for (double& h : out.hessian.data()) h *= c;
        return out;
      });
}

Lagrangian operator+(const Lagrangian& a, const Lagrangian& b) {
  if (a.dof_ != b.dof_) throw UsageError("cannot add Lagrangians of different dimension");
  return Lagrangian(
      a.dof_, [va = a.value_, vb = b.value_](const PhaseState& s) { return va(s) + vb(s); },
      [ba = a.bundle_, bb = b.bundle_](const PhaseState& s) {
        auto out = ba(s);
        const auto other = bb(s);
        out.value += other.value;
        for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] += other.gradient[i];
        for (std::size_t k = 0; k < out.hessian.data().size(); ++k) out.hessian.data()[k] += other.hessian.data()[k];
        return out;
      });
}

}  // namespace lagnet::eldyn
