#include "lagnet/eldyn/types.hpp"

#include <cmath>

#include "lagnet/errors.hpp"

namespace lagnet::eldyn {

std::vector<double> PhaseState::packed() const {
  std::vector<double> z(q);
  z.insert(z.end(), q_dot.begin(), q_dot.end());
  return z;
}

PhaseState PhaseState::unpack(std::span<const double> z) {
  if (z.size() % 2 != 0) throw UsageError("packed phase state must have even length");
  const std::size_t d = z.size() / 2;
  return {{z.begin(), z.begin() + d}, {z.begin() + d, z.end()}};
}

void PhaseState::validate() const {
  if (q.empty()) throw UsageError("phase state must have at least one coordinate");
  if (q.size() != q_dot.size()) {
    throw UsageError("q has " + std::to_string(q.size()) + " entries but q_dot has " +
                     std::to_string(q_dot.size()));
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i]) || !std::isfinite(q_dot[i])) throw UsageError("phase state has non-finite entries");
  }
}

void Trajectory::validate() const {
  if (times.size() != states.size() || accels.size() != states.size()) {
    throw UsageError("trajectory arrays differ in length");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::fabs(times[k] - times[k - 1] - h) > 1e-12) {
      throw UsageError("non-uniform timestep at sample " + std::to_string(k));
    }
  }
}

}  // namespace lagnet::eldyn
