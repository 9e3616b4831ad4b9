// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Exit status is 0 only when every criterion passes, or when the failing set
// equals the one named with --expect-fail (a known, analyzed failure; a
// criterion that unexpectedly passes also makes the run fail).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lagnet/eldyn/eldyn.hpp"
#include "lagnet/gridlag/grid.hpp"
#include "lagnet/refsys/integrate.hpp"
#include "lagnet/refsys/systems.hpp"
#include "lagnet/trainer/trainer.hpp"

namespace {

using namespace lagnet;
using eldyn::Lagrangian;
using eldyn::PhaseState;
using eldyn::Trajectory;
using refsys::ReferenceSystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

const std::vector<std::string> kParticleSystems{"free_particle", "harmonic", "pendulum", "double_pendulum"};

// 1: accelerations from the analytic Lagrangians match the closed forms.
Outcome closed_form_accelerations() {
  double worst = 0.0;
  std::string parts;
  for (const auto& name : kParticleSystems) {
    const auto sys = ReferenceSystem::make(name);
    std::mt19937_64 rng(1000 + parts.size());
    double w = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto s = sys.sample(rng);
      w = std::max(w, max_abs_diff(eldyn::accel(sys.lagrangian(), s).q_ddot, sys.true_accel(s)));
    }
    worst = std::max(worst, w);
    parts += fmt(" %s=%.2e", name.c_str(), w);
  }
  return {worst <= 1e-8, fmt("max |a - a_true| over 4x1000 states%s (tol 1e-8)", parts.c_str())};
}

// 2: scaling and total time derivatives leave the accelerations unchanged.
Outcome invariances() {
  double worst_scale = 0.0, worst_gauge = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (const auto& name : kParticleSystems) {
    const auto sys = ReferenceSystem::make(name);
    const std::size_t d = sys.dof();
    const Lagrangian half_norm = sys.lagrangian() + Lagrangian::from_expression(d, [d](auto q, auto qd) {
                                   auto s = q[0] * qd[0];
                                   for (std::size_t i = 1; i < d; ++i) s = s + q[i] * qd[i];
                                   return s;
                                 });
    std::vector<Lagrangian> gauged{half_norm};
    if (d >= 2) {
      gauged.push_back(sys.lagrangian() +
                       Lagrangian::from_expression(d, [](auto q, auto qd) { return qd[0] * q[1] + q[0] * qd[1]; }));
    }
    std::mt19937_64 rng(77);
    std::size_t found = 0;
    while (found < 200) {
      const auto s = sys.sample(rng);
      const auto base = eldyn::accel(sys.lagrangian(), s);
      if (base.degenerate) {
        ++skipped;
        continue;
      }
      ++found;
      for (double c : {0.5, 2.0, 10.0}) {
        worst_scale = std::max(worst_scale, max_abs_diff(eldyn::accel(c * sys.lagrangian(), s).q_ddot, base.q_ddot));
      }
      for (const auto& g : gauged) {
        worst_gauge = std::max(worst_gauge, max_abs_diff(eldyn::accel(g, s).q_ddot, base.q_ddot));
      }
    }
    checked += found;
  }
  return {std::max(worst_scale, worst_gauge) <= 1e-9,
          fmt("%zu states (%zu degenerate skipped): scaling %.2e, gauge %.2e (tol 1e-9)", checked, skipped,
              worst_scale, worst_gauge)};
}

// 3: reverse-mode batch gradient against central differences, and symmetric input Hessians.
Outcome gradient_check() {
  const auto data = refsys::make_dataset(ReferenceSystem::make("double_pendulum"), 2, 0.01, 10, 5);
  const auto samples = trainer::samples_of(data.trajectories);
  const netcore::Network net(netcore::NetworkConfig{4, {8, 8}, netcore::Activation::softplus, 23});
  const trainer::ParticleModel model(net);
  const auto init = netcore::init(net.config());
  const std::vector<double> theta(init.flat().begin(), init.flat().end());
  const std::vector<std::size_t> batch{1, 6, 12, 19};
  const auto g = trainer::batch_gradient(model, theta, samples, batch);

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, theta.size() - 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t p = pick(rng);
    auto plus = theta, minus = theta;
    plus[p] += h;
    minus[p] -= h;
    const double fd = (trainer::batch_loss(model, plus, samples, batch).value -
                       trainer::batch_loss(model, minus, samples, batch).value) /
                      (2 * h);
    const double denom = std::max({std::fabs(fd), std::fabs(g.gradient[p]), 1e-3});
    worst = std::max(worst, std::fabs(g.gradient[p] - fd) / denom);
  }

  double asym = 0.0;
  for (const auto& s : samples) {
    const auto b = net.lagrangian_bundle(init, s.state);
    const std::size_t n = b.gradient.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) asym = std::max(asym, std::fabs(b.hessian(i, j) - b.hessian(j, i)));
    }
  }
  return {worst <= 1e-4 && asym <= 1e-12,
          fmt("20 parameters of %zu, max rel err %.2e (tol 1e-4); Hessian asymmetry %.1e over %zu states (tol 1e-12)",
              theta.size(), worst, asym, samples.size())};
}

gridlag::GridField random_field(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  gridlag::GridField f;
  for (std::size_t i = 0; i < n; ++i) f.phi.push_back(u(rng));
  for (std::size_t i = 0; i < n; ++i) f.phi_dot.push_back(u(rng));
  return f;
}

// 4: banded solve equals the dense solve; one-hot fields give the five-point pattern.
Outcome banded_field() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (std::size_t n : {8u, 16u, 33u}) {
    const auto st = gridlag::StencilSet::symmetric(n);
    for (int k = 0; k < 50; ++k) {
      const auto f = random_field(rng, n);
      worst = std::max(worst, max_abs_diff(gridlag::field_accel_banded(gridlag::WaveDensity{}, f, st),
                                           gridlag::field_accel_dense(gridlag::WaveDensity{}, f, st)));
    }
  }
  double worst_hot = 0.0;
  for (std::size_t n : {8u, 16u, 33u}) {
    const auto st = gridlag::StencilSet::symmetric(n);
    for (double dx : {1.0, 0.5}) {
      for (std::size_t j = 0; j < n; ++j) {
        gridlag::GridField f{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), dx};
        f.phi[j] = 1.0;
        std::vector<double> expected(n, 0.0);
        // φ̈_i = (φ_{i+2} − 2φ_i + φ_{i−2}) / (4Δx²), written out for a single bump
        expected[j] += -2.0 / (4 * dx * dx);
        expected[(j + 2) % n] += 1.0 / (4 * dx * dx);
        expected[(j + n - 2) % n] += 1.0 / (4 * dx * dx);
        worst_hot = std::max(worst_hot, max_abs_diff(gridlag::field_accel_banded(gridlag::WaveDensity{}, f, st), expected));
        worst_hot = std::max(worst_hot, max_abs_diff(gridlag::field_accel_dense(gridlag::WaveDensity{}, f, st), expected));
      }
    }
  }
  return {worst <= 1e-10 && worst_hot <= 1e-10,
          fmt("150 random fields n in {8,16,33}: max |banded - dense| %.2e; one-hot pattern %.2e (tol 1e-10)", worst,
              worst_hot)};
}

// 5: RK4 over one harmonic period: global error and energy drift both shrink ~16x per halving.
Outcome rk4_order() {
  const auto harmonic = ReferenceSystem::make("harmonic");
  auto one_period = [&](std::size_t n) {
    const double h = 2 * std::numbers::pi / static_cast<double>(n);
    const PhaseState x0{{1.0}, {0.0}};
    const auto t = refsys::integrate_reference(harmonic, x0, h, n);
    const auto& end = t.states.back();
    const double err = std::hypot(end.q[0] - 1.0, end.q_dot[0]);
    const double e0 = eldyn::learned_energy(harmonic.lagrangian(), x0);
    double drift = 0.0;
    for (const auto& s : t.states) drift = std::max(drift, std::fabs(eldyn::learned_energy(harmonic.lagrangian(), s) - e0));
    return std::pair{err, drift / std::fabs(e0)};
  };
  const auto [e50, d50] = one_period(50);
  const auto [e100, d100] = one_period(100);
  const double err_ratio = e50 / e100, drift_ratio = d50 / d100;
  const bool err_ok = err_ratio >= 12 && err_ratio <= 20;
  const bool drift_ok = drift_ratio >= 12 && drift_ratio <= 20;

  // pendulum, for information: the same comparison at amplitude 1
  const auto pendulum = ReferenceSystem::make("pendulum");
  auto pend = [&](double h, std::size_t n) {
    const PhaseState x0{{1.0}, {0.0}};
    const auto coarse = refsys::integrate_reference(pendulum, x0, h, n);
    const auto fine = refsys::integrate_reference(pendulum, x0, h / 64, n * 64);
    const double e0 = eldyn::learned_energy(pendulum.lagrangian(), x0);
    return std::pair{std::hypot(coarse.states.back().q[0] - fine.states.back().q[0],
                                coarse.states.back().q_dot[0] - fine.states.back().q_dot[0]),
                     std::fabs(eldyn::learned_energy(pendulum.lagrangian(), coarse.states.back()) - e0)};
  };
  const auto [pe1, pd1] = pend(0.2, 37);
  const auto [pe2, pd2] = pend(0.1, 74);
  return {err_ok && drift_ok,
          fmt("harmonic h=2pi/50 vs 2pi/100: error ratio %.2f [%s], energy drift ratio %.2f [%s] (band [12,20]); "
              "pendulum info: error %.2f, drift %.2f",
              err_ratio, err_ok ? "ok" : "out", drift_ratio, drift_ok ? "ok" : "out", pe1 / pe2, pd1 / pd2)};
}

struct Trained {
  refsys::Dataset data;
  trainer::TrainResult result;
};

Trained train_pendulum() {
  Trained t{refsys::make_dataset(ReferenceSystem::make("pendulum"), 200, 0.01, 100, 1), {}};
  trainer::TrainConfig tc;
  tc.epochs = 1000;
  tc.max_steps = 2000;
  tc.batch_size = 32;
  tc.lr_initial = 1e-3;
  tc.seed = 3;
  t.result = trainer::train(netcore::NetworkConfig::desk(2, 11), {trainer::ModelKind::particle, 1}, t.data, tc);
  return t;
}

// 6: validation loss drops tenfold in 2000 steps and a rerun reproduces the curves bit for bit.
Outcome training_smoke(Trained& first) {
  first = train_pendulum();
  const auto second = train_pendulum();
  const auto& r = first.result.report;
  const double ratio = r.val_loss.back() / r.initial_val_loss;
  const bool same = r.train_loss == second.result.report.train_loss && r.val_loss == second.result.report.val_loss &&
                    r.initial_val_loss == second.result.report.initial_val_loss &&
                    first.result.checkpoint.parameters == second.result.checkpoint.parameters;
  return {ratio <= 0.1 && same,
          fmt("desk 2x64, 200 trajectories, %zu steps: val %.4g -> %.4g (ratio %.4f, need <= 0.1); rerun %s", r.steps,
              r.initial_val_loss, r.val_loss.back(), ratio, same ? "bitwise identical" : "DIFFERS")};
}

double relative_drift(const Lagrangian& l, const Trajectory& t) {
  const double e0 = eldyn::learned_energy(l, t.states.front());
  double m = 0.0;
  for (const auto& s : t.states) m = std::max(m, std::fabs(eldyn::learned_energy(l, s) - e0));
  return m / std::fabs(e0);
}

// 7: learned energy is roughly conserved along a learned rollout from a held-out state.
Outcome energy_conservation(const Trained& trained) {
  const auto split = trainer::split_trajectories(trained.data.trajectories.size(), trained.result.report.config.split,
                                                 trained.result.report.config.seed);
  const auto pendulum = ReferenceSystem::make("pendulum");
  // first held-out start whose energy is not close to zero, so the relative drift means something
  const PhaseState* x0 = nullptr;
  std::size_t which = 0;
  for (std::size_t k : split.validation) {
    const auto& s = trained.data.trajectories[k].states.front();
    if (std::fabs(eldyn::learned_energy(pendulum.lagrangian(), s)) >= 0.1) {
      x0 = &s;
      which = k;
      break;
    }
  }
  if (x0 == nullptr) return {false, "no held-out trajectory with |H0| >= 0.1"};
  const auto learned = trainer::learned_lagrangian({trainer::ModelKind::particle, 1}, trained.result.checkpoint,
                                                   trained.data.meta);
  const auto learned_path = refsys::rollout(learned, *x0, 0.01, 500);
  const double learned_drift = relative_drift(learned, learned_path);
  const auto control_path = refsys::rollout(pendulum.lagrangian(), *x0, 0.01, 500);
  const double control_drift = relative_drift(pendulum.lagrangian(), control_path);
  const double truth_drift = relative_drift(pendulum.lagrangian(), learned_path);
  return {learned_drift <= 0.2 && control_drift <= 1e-6,
          fmt("held-out trajectory %zu, q0=%.3f qd0=%.3f, 500 steps dt 0.01: learned energy drift %.2e (tol 0.2), "
              "analytic control %.2e (tol 1e-6); true energy along learned path %.2e",
              which, x0->q[0], x0->q_dot[0], learned_drift, control_drift, truth_drift)};
}

Trajectory exact_harmonic(double h, double span) {
  Trajectory t;
  t.h = h;
  const auto n = static_cast<std::size_t>(std::lround(span / h)) + 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double time = static_cast<double>(k) * h;
    t.times.push_back(time);
    t.states.push_back({{std::cos(time)}, {-std::sin(time)}});
    t.accels.push_back({-std::cos(time)});
  }
  return t;
}

// 8: the Euler–Lagrange residual is O(h²) on exact paths and large on perturbed ones.
Outcome residual_diagnostic() {
  const auto l = ReferenceSystem::make("harmonic").lagrangian();
  std::vector<double> r;
  for (double h : {0.04, 0.02, 0.01, 0.005}) r.push_back(eldyn::max_residual_norm(eldyn::el_residual(l, exact_harmonic(h, 3.0))));
  bool ratios_ok = true;
  std::string ratios;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double q = r[i] / r[i + 1];
    ratios_ok = ratios_ok && q >= 3.5 && q <= 4.5;
    ratios += fmt(" %.3f", q);
  }
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1e-3);
  double smallest = INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    auto t = exact_harmonic(0.01, 3.0);
    for (auto& s : t.states) {
      s.q[0] += noise(rng);
      s.q_dot[0] += noise(rng);
    }
    smallest = std::min(smallest, eldyn::max_residual_norm(eldyn::el_residual(l, t)));
  }
  return {ratios_ok && smallest > 1e-2,
          fmt("exact path, h 0.04..0.005: residual %.2e, halving ratios%s (band [3.5,4.5]); 20 paths with 1e-3 noise: "
              "min residual %.2e (need > 1e-2)",
              r.back(), ratios.c_str(), smallest)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks", "acceptance"};
  std::vector<int> expect_fail;
  app.add_option("--expect-fail", expect_fail, "criteria known to fail (see the decisions log)");
  CLI11_PARSE(app, argc, argv);

  Trained trained;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form accelerations", closed_form_accelerations},
      {"scaling and gauge invariance", invariances},
      {"gradient check", gradient_check},
      {"banded field solve", banded_field},
      {"RK4 fourth-order signature", rk4_order},
      {"training smoke", [&] { return training_smoke(trained); }},
      {"learned energy conservation", [&] { return energy_conservation(trained); }},
      {"residual diagnostic", residual_diagnostic},
  };

  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) failed.insert(id);
    std::printf("%s C%d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  if (failed.empty()) return 0;
  if (failed == expected) {
    std::printf("failing criteria match --expect-fail; see the decisions log for the analysis\n");
    return 0;
  }
  return 1;
}
