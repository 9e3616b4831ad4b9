#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "lagnet/eldyn/eldyn.hpp"
#include "lagnet/refsys/dataset_io.hpp"
#include "lagnet/refsys/integrate.hpp"
#include "lagnet/refsys/systems.hpp"
#include "lagnet/textio.hpp"
#include "oracles.hpp"

namespace lagnet::refsys {
namespace {

using eldyn::PhaseState;
using testing::max_abs_diff;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "lagnet_refsys_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

PhaseState harmonic_exact(double t) { return {{std::cos(t)}, {-std::sin(t)}}; }

double state_error(const PhaseState& a, const PhaseState& b) {
  return std::max(max_abs_diff(a.q, b.q), max_abs_diff(a.q_dot, b.q_dot));
}

PhaseState integrate_harmonic(double h, std::size_t steps) {
  const auto sys = ReferenceSystem::make("harmonic");
  return integrate_reference(sys, {{1.0}, {0.0}}, h, steps).states.back();
}

TEST(RefsysSystems, TrueAccelExamples) {
  const auto pend = ReferenceSystem::make("pendulum");
  EXPECT_EQ(pend.true_accel({{0.0}, {3.7}})[0], 0.0);
  EXPECT_NEAR(pend.true_accel({{std::numbers::pi / 2}, {0.0}})[0], -1.0, 1e-15);
  EXPECT_EQ(ReferenceSystem::make("harmonic").true_accel({{2.0}, {0.0}})[0], -2.0);
  EXPECT_EQ(ReferenceSystem::make("free_particle").true_accel({{1.0, 2.0}, {3.0, 4.0}}),
            (std::vector<double>{0.0, 0.0}));
}

TEST(RefsysSystems, ConstantsEnterClosedForms) {
  const auto pend = ReferenceSystem::make("pendulum", {1.0, 2.0, 9.81, 1.0});
  EXPECT_NEAR(pend.true_accel({{0.5}, {0.0}})[0], -(9.81 / 2.0) * std::sin(0.5), 1e-15);
  const auto harm = ReferenceSystem::make("harmonic", {2.0, 1.0, 1.0, 8.0});
  EXPECT_NEAR(harm.true_accel({{0.5}, {0.0}})[0], -2.0, 1e-15);
}

TEST(RefsysSystems, UnknownNameListsValidOnes) {
  try {
    ReferenceSystem::make("quantum");
    FAIL();
  } catch (const UsageError& e) {
    for (const auto& n : ReferenceSystem::names()) EXPECT_NE(std::string(e.what()).find(n), std::string::npos) << n;
  }
  EXPECT_EQ(ReferenceSystem::names().size(), 5u);
}

TEST(RefsysSystems, DoublePendulumAgreesWithActionDifferences) {
  // independent oracle: EL equations from long-double differences of the Lagrangian
  auto lag = [](const std::vector<long double>& z) {
    const long double t1 = z[0], t2 = z[1], w1 = z[2], w2 = z[3];
    return w1 * w1 + 0.5L * w2 * w2 + w1 * w2 * std::cos(t1 - t2) + 2.0L * std::cos(t1) + std::cos(t2);
  };
  const auto sys = ReferenceSystem::make("double_pendulum");
  std::mt19937_64 rng(11);
  for (int k = 0; k < 25; ++k) {
    const auto s = sys.sample(rng);
    const auto fd = testing::fd_euler_lagrange(lag, s.q, s.q_dot);
    EXPECT_LE(max_abs_diff(sys.true_accel(s), fd), 1e-8);
  }
}

TEST(RefsysSystems, SelfConsistencyAllSystems) {
  for (const auto& name : ReferenceSystem::names()) {
    const auto sys = ReferenceSystem::make(name);
    std::mt19937_64 rng(99);
    const int count = name == "wave1d" ? 100 : 1000;
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
      const auto s = sys.sample(rng);
      worst = std::max(worst, max_abs_diff(eldyn::accel(sys.lagrangian(), s).q_ddot, sys.true_accel(s)));
    }
    EXPECT_LE(worst, 1e-8) << name;
  }
}

TEST(RefsysSystems, SamplersStayInDeclaredRanges) {
  for (const auto& name : {"free_particle", "harmonic", "pendulum", "double_pendulum"}) {
    const auto sys = ReferenceSystem::make(name);
    ASSERT_EQ(sys.sampler().size(), 2u) << name;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 500; ++k) {
      const auto s = sys.sample(rng);
      ASSERT_EQ(s.dof(), sys.dof());
      for (std::size_t i = 0; i < s.dof(); ++i) {
        EXPECT_GE(s.q[i], sys.sampler()[0].lo);
        EXPECT_LE(s.q[i], sys.sampler()[0].hi);
        EXPECT_GE(s.q_dot[i], sys.sampler()[1].lo);
        EXPECT_LE(s.q_dot[i], sys.sampler()[1].hi);
      }
    }
  }
  const auto wave = ReferenceSystem::make("wave1d", {}, {12, 0.5});
  std::mt19937_64 rng(1);
  EXPECT_EQ(wave.sample(rng).dof(), 12u);
}

TEST(RefsysRk4, ZeroAccelerationAdvancesExactly) {
  const AccelFn zero = [](const PhaseState& s) { return std::vector<double>(s.dof(), 0.0); };
  const PhaseState s{{0.25, -1.0}, {2.0, 0.5}};
  const auto next = rk4_step(zero, s, 0.125);
  EXPECT_EQ(next.q, (std::vector<double>{0.25 + 2.0 * 0.125, -1.0 + 0.5 * 0.125}));
  EXPECT_EQ(next.q_dot, s.q_dot);
}

TEST(RefsysRk4, ZeroStepIsIdentity) {
  const auto sys = ReferenceSystem::make("double_pendulum");
  const AccelFn f = [&](const PhaseState& s) { return sys.true_accel(s); };
  const PhaseState s{{0.3, -0.7}, {0.4, -0.2}};
  const auto next = rk4_step(f, s, 0.0);
  EXPECT_EQ(next.q, s.q);
  EXPECT_EQ(next.q_dot, s.q_dot);
}

TEST(RefsysRk4, LocalErrorIsFifthOrder) {
  const auto sys = ReferenceSystem::make("harmonic");
  const AccelFn f = [&](const PhaseState& s) { return sys.true_accel(s); };
  for (double h : {0.2, 0.1, 0.05}) {
    const double e1 = state_error(rk4_step(f, {{1.0}, {0.0}}, h), harmonic_exact(h));
    const double e2 = state_error(rk4_step(f, {{1.0}, {0.0}}, h / 2), harmonic_exact(h / 2));
    EXPECT_GE(e1 / e2, 28.0) << h;
    EXPECT_LE(e1 / e2, 36.0) << h;
  }
}

TEST(RefsysRk4, NonFiniteThrows) {
  const AccelFn bad = [](const PhaseState&) { return std::vector<double>{std::nan("")}; };
  EXPECT_THROW(rk4_step(bad, {{0.0}, {0.0}}, 0.1), NumericError);
  const AccelFn wrong = [](const PhaseState&) { return std::vector<double>{0.0, 0.0}; };
  EXPECT_THROW(rk4_step(wrong, {{0.0}, {0.0}}, 0.1), UsageError);
}

TEST(RefsysGenerate, HarmonicOnePeriod) {
  const std::size_t n = 6283;  // h ≈ 1.00004e-3, an exact period
  EXPECT_LE(state_error(integrate_harmonic(kTwoPi / n, n), harmonic_exact(0.0)), 1e-10);
}

TEST(RefsysGenerate, GlobalErrorIsFourthOrder) {
  // coarse enough that roundoff does not mask the truncation error
  for (std::size_t n : {25u, 50u, 100u}) {
    const double e1 = state_error(integrate_harmonic(kTwoPi / n, n), harmonic_exact(0.0));
    const double e2 = state_error(integrate_harmonic(kTwoPi / (2 * n), 2 * n), harmonic_exact(0.0));
    EXPECT_GE(e1 / e2, 12.0) << n;
    EXPECT_LE(e1 / e2, 20.0) << n;
  }
}

TEST(RefsysGenerate, Deterministic) {
  const auto sys = ReferenceSystem::make("double_pendulum");
  const auto a = generate_trajectories(sys, 4, 0.01, 50, 7);
  const auto b = generate_trajectories(sys, 4, 0.01, 50, 7);
  const auto c = generate_trajectories(sys, 4, 0.01, 50, 8);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].states.front().q, b[k].states.front().q);
    EXPECT_EQ(a[k].states.back().q_dot, b[k].states.back().q_dot);
    EXPECT_NE(a[k].states.front().q, c[k].states.front().q);
    EXPECT_EQ(a[k].seed, mix64(7u ^ k));
    EXPECT_EQ(a[k].size(), 51u);
    EXPECT_NO_THROW(a[k].validate());
  }
}

TEST(RefsysGenerate, SameSeedGivesIdenticalFiles) {
  const auto sys = ReferenceSystem::make("pendulum");
  const auto p1 = scratch("a.csv"), p2 = scratch("b.csv");
  write_dataset(p1, make_dataset(sys, 3, 0.01, 20, 7));
  write_dataset(p2, make_dataset(sys, 3, 0.01, 20, 7));
  EXPECT_EQ(read_text_file(p1), read_text_file(p2));
  EXPECT_EQ(read_text_file(sidecar_path(p1)), read_text_file(sidecar_path(p2)));
}

TEST(RefsysGenerate, Preconditions) {
  const auto sys = ReferenceSystem::make("harmonic");
  EXPECT_TRUE(generate_trajectories(sys, 0, 0.01, 10, 1).empty());
  EXPECT_THROW(generate_trajectories(sys, 1, 0.01, 1, 1), UsageError);
  EXPECT_THROW(generate_trajectories(sys, 1, 0.0, 10, 1), UsageError);
  EXPECT_THROW(generate_trajectories(sys, 1, -0.1, 10, 1), UsageError);
}

TEST(RefsysGenerate, AccelsRecordedAtEverySample) {
  const auto sys = ReferenceSystem::make("pendulum");
  const auto t = generate_trajectories(sys, 1, 0.05, 30, 3).front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_EQ(t.accels[k], sys.true_accel(t.states[k]));
    EXPECT_DOUBLE_EQ(t.times[k], 0.05 * static_cast<double>(k));
  }
}

TEST(RefsysGenerate, EnergyConservedOverTenPeriods) {
  struct Case {
    const char* name;
    PhaseState init;
    double period;
  };
  // pendulum from rest at θ₀ = 1: T = 4 K(sin(θ₀/2)) ≈ 7.4163
  const Case cases[] = {{"harmonic", {{0.8}, {0.3}}, kTwoPi}, {"pendulum", {{1.0}, {0.0}}, 7.4163}};
  for (const auto& c : cases) {
    const auto sys = ReferenceSystem::make(c.name);
    const auto steps = static_cast<std::size_t>(std::ceil(10.0 * c.period / 1e-3));
    const auto traj = integrate_reference(sys, c.init, 1e-3, steps);
    const double h0 = eldyn::learned_energy(sys.lagrangian(), traj.states.front());
    double drift = 0.0;
    for (std::size_t k = 0; k < traj.size(); k += 10) {
      drift = std::max(drift, std::fabs(eldyn::learned_energy(sys.lagrangian(), traj.states[k]) - h0));
    }
    EXPECT_LE(drift / std::fabs(h0), 1e-6) << c.name;
  }
}

TEST(RefsysGenerate, BlowUpNamesTrajectory) {
  // ω h = 30 is far outside RK4's stability interval; |R| ≈ 3e4 per step
  const auto sys = ReferenceSystem::make("harmonic", {1.0, 1.0, 1.0, 100.0});
  try {
    generate_trajectories(sys, 3, 3.0, 400, 1);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.trajectory(), 0u);
    EXPECT_GT(e.last_finite(), 20u);
    EXPECT_LT(e.last_finite(), 400u);
    EXPECT_NE(std::string(e.what()).find("trajectory 0"), std::string::npos);
  }
}

TEST(RefsysRollout, MatchesGeneratedPendulum) {
  const auto sys = ReferenceSystem::make("pendulum");
  const auto gen = generate_trajectories(sys, 2, 0.01, 200, 42);
  for (const auto& t : gen) {
    const auto r = rollout(sys.lagrangian(), t.states.front(), 0.01, 200);
    ASSERT_EQ(r.size(), t.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, state_error(r.states[k], t.states[k]));
    EXPECT_LE(worst, 1e-12);
  }
}

TEST(RefsysRollout, FreeParticleIsStraightLine) {
  const auto sys = ReferenceSystem::make("free_particle");
  const PhaseState init{{0.5, -0.25}, {1.25, -0.75}};
  const auto r = rollout(sys.lagrangian(), init, 0.01, 300);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double t = r.times[k];
    EXPECT_NEAR(r.states[k].q[0], 0.5 + 1.25 * t, 1e-12);
    EXPECT_NEAR(r.states[k].q[1], -0.25 - 0.75 * t, 1e-12);
  }
}

TEST(RefsysRollout, ZeroStepsAndStats) {
  const auto sys = ReferenceSystem::make("harmonic");
  RolloutStats stats;
  const auto r = rollout(sys.lagrangian(), {{1.0}, {0.0}}, 0.01, 0, &stats);
  EXPECT_EQ(r.size(), 1u);
  EXPECT_EQ(stats.accel_calls, 1u);
  rollout(sys.lagrangian(), {{1.0}, {0.0}}, 0.01, 10, &stats);
  EXPECT_EQ(stats.accel_calls, 11u + 3u * 10u);
  EXPECT_EQ(stats.degenerate_events, 0u);
}

TEST(RefsysRollout, DegenerateLagrangianCounted) {
  const auto flat = eldyn::Lagrangian::from_expression(1, [](auto q, auto) { return -0.5 * q[0] * q[0]; });
  RolloutStats stats;
  rollout(flat, {{1.0}, {0.0}}, 0.1, 5, &stats);
  EXPECT_EQ(stats.degenerate_events, stats.accel_calls);
}

TEST(RefsysDataset, RoundTripIsLossless) {
  for (const auto& name : ReferenceSystem::names()) {
    const auto sys = ReferenceSystem::make(name, {}, {8, 0.75});
    const auto data = make_dataset(sys, 3, 0.01, 10, 5);
    const auto path = scratch(name + ".csv");
    write_dataset(path, data);
    const auto back = read_dataset(path);
    EXPECT_EQ(back.meta.system, name);
    EXPECT_EQ(back.meta.d, sys.dof());
    EXPECT_EQ(back.meta.seed, 5u);
    EXPECT_EQ(back.meta.h, 0.01);
    ASSERT_EQ(back.trajectories.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& a = data.trajectories[k];
      const auto& b = back.trajectories[k];
      EXPECT_EQ(a.times, b.times);
      EXPECT_EQ(a.accels, b.accels);
      EXPECT_EQ(a.seed, b.seed);
      for (std::size_t s = 0; s < a.size(); ++s) {
        EXPECT_EQ(a.states[s].q, b.states[s].q);
        EXPECT_EQ(a.states[s].q_dot, b.states[s].q_dot);
      }
    }
    EXPECT_EQ(dataset_csv(back), dataset_csv(data));
  }
}

TEST(RefsysDataset, HeaderAndRowCount) {
  const auto data = make_dataset(ReferenceSystem::make("double_pendulum"), 2, 0.01, 4, 1);
  const auto csv = dataset_csv(data);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "traj,t,q0,q1,qd0,qd1,a0,a1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 5);
}

TEST(RefsysDataset, WithoutSidecarInfersStep) {
  const auto data = make_dataset(ReferenceSystem::make("harmonic"), 2, 0.02, 5, 1);
  const auto back = parse_dataset(dataset_csv(data), nullptr);
  EXPECT_EQ(back.meta.d, 1u);
  EXPECT_NEAR(back.meta.h, 0.02, 1e-15);
  EXPECT_EQ(back.samples(), 12u);
}

TEST(RefsysDataset, MalformedRowsNameTheLine) {
  const std::string good = "traj,t,q0,qd0,a0\n0,0,1,0,-1\n0,0.1,0.99,-0.1,-0.99\n";
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_dataset(text, nullptr);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(good), 0u);
  EXPECT_EQ(line_of(good + "0,0.2,0.98\n"), 4u);
  EXPECT_EQ(line_of(good + "0,0.2,abc,0,0\n"), 4u);
  EXPECT_EQ(line_of("traj,t,q0,qd0,a0\n0,0,1,0,-1\n2,0,1,0,-1\n"), 3u);
  EXPECT_EQ(line_of("traj,t,x,qd0,a0\n"), 1u);
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("traj,t,q0,qd0,a0\n0,0,nan,0,0\n"), 2u);
  EXPECT_THROW(read_dataset(scratch("does_not_exist.csv")), IoError);
}

TEST(RefsysDataset, MetadataDimensionMismatch) {
  DatasetMeta meta;
  meta.d = 2;
  EXPECT_THROW(parse_dataset("traj,t,q0,qd0,a0\n0,0,1,0,-1\n", &meta), FormatError);
}

}  // namespace
}  // namespace lagnet::refsys
