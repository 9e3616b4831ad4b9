#include "lagnet/cli/lagcli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lagnet/cli/config.hpp"
#include "lagnet/errors.hpp"
#include "lagnet/netcore/checkpoint.hpp"
#include "lagnet/refsys/dataset_io.hpp"
#include "lagnet/refsys/integrate.hpp"
#include "lagnet/textio.hpp"
#include "lagnet/trainer/report.hpp"
#include "lagnet/trainer/trainer.hpp"

namespace lagnet::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

fs::path dataset_file(const std::string& data) {
  const fs::path p(data);
  return fs::is_directory(p) ? p / "data.csv" : p;
}

void require_given(CLI::Option* opt) {
  if (opt->count() == 0) throw UsageError(opt->get_name() + " is required");
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, ',')) {
    const auto first = cell.find_first_not_of(' ');
    const auto last = cell.find_last_not_of(' ');
    if (first == std::string::npos) throw UsageError(std::string(what) + " has an empty entry");
    const double v = parse_double(cell.substr(first, last - first + 1));
    if (!std::isfinite(v)) throw UsageError(std::string(what) + " must be finite");
    out.push_back(v);
  }
  if (!text.empty() && text.back() == ',') throw UsageError(std::string(what) + " has an empty entry");
  return out;
}

struct PhysicalOptions {
  double m = 1.0, l = 1.0, g = 1.0, k = 1.0;
  std::size_t sites = 16;
  double dx = 1.0;

  void add(CLI::App* app, bool with_sites) {
    app->add_option("--m", m, "Mass")->capture_default_str();
    app->add_option("--l", l, "Pendulum length")->capture_default_str();
    app->add_option("--g", g, "Gravitational acceleration")->capture_default_str();
    app->add_option("--k", k, "Spring constant")->capture_default_str();
    if (with_sites) app->add_option("--sites", sites, "Lattice sites (wave1d)")->capture_default_str();
    app->add_option("--dx", dx, "Lattice spacing (wave1d)")->capture_default_str();
  }
  void put(ordered_json& j, bool with_sites) const {
    j["m"] = m;
    j["l"] = l;
    j["g"] = g;
    j["k"] = k;
    if (with_sites) j["sites"] = sites;
    j["dx"] = dx;
  }
  refsys::Constants constants() const { return {m, l, g, k}; }
};

// ---- gen ----

struct GenCommand {
  std::string config, system, out;
  std::size_t count = 10, steps = 100;
  double dt = 0.01;
  std::uint64_t seed = 0;
  PhysicalOptions phys;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--config", config, "TOML or JSON run configuration");
    app->add_option("--system", system, "free_particle | harmonic | pendulum | double_pendulum | wave1d");
    app->add_option("--count", count, "Number of trajectories")->capture_default_str();
    app->add_option("--steps", steps, "RK4 steps per trajectory (samples = steps + 1)")->capture_default_str();
    app->add_option("--dt", dt, "Timestep")->capture_default_str();
    seed_opt = app->add_option("--seed", seed, "Random seed (required)");
    app->add_option("--out", out, "Output directory");
    phys.add(app, true);
  }

  int run(CLI::App* app, std::ostream& os) {
    require_given(app->get_option("--system"));
    require_given(seed_opt);
    require_given(app->get_option("--out"));
    const auto sys = refsys::ReferenceSystem::make(system, phys.constants(), {phys.sites, phys.dx});
    const auto data = refsys::make_dataset(sys, count, dt, steps, seed);
    const fs::path dir(out);
    ordered_json resolved;
    resolved["system"] = system;
    resolved["count"] = count;
    resolved["steps"] = steps;
    resolved["dt"] = dt;
    resolved["seed"] = seed;
    resolved["out"] = out;
    phys.put(resolved, true);
    write_text_file(dir / "gen_config.json", dump(resolved));
    refsys::write_dataset(dir / "data.csv", data);
    os << "wrote " << data.samples() << " samples (" << count << " trajectories) to " << (dir / "data.csv").string()
       << "\n";
    return kExitOk;
  }
};

// ---- train ----

struct TrainCommand {
  std::string config, data, preset = "desk", activation = "softplus", out;
  std::vector<std::size_t> hidden;
  std::size_t half_width = 1;
  trainer::TrainConfig tc;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* app) {
    tc.epochs = 10;
    app->add_option("--config", config, "TOML or JSON run configuration");
    app->add_option("--data", data, "Dataset CSV, or a directory holding data.csv");
    app->add_option("--preset", preset, "desk (2x64) | paper (4x500)")->capture_default_str();
    app->add_option("--hidden", hidden, "Hidden layer widths, overriding the preset");
    app->add_option("--activation", activation, "softplus | tanh | sigmoid")->capture_default_str();
    app->add_option("--half-width", half_width, "Stencil half width for lattice densities")->capture_default_str();
    app->add_option("--epochs", tc.epochs)->capture_default_str();
    seed_opt = app->add_option("--seed", tc.seed, "Seed for initialization, split and shuffling (required)");
    app->add_option("--batch-size", tc.batch_size)->capture_default_str();
    app->add_option("--lr", tc.lr_initial, "Initial learning rate")->capture_default_str();
    app->add_option("--lr-decay", tc.lr_decay, "Learning-rate factor per epoch")->capture_default_str();
    app->add_option("--split", tc.split, "Training fraction of trajectories")->capture_default_str();
    app->add_option("--max-steps", tc.max_steps, "Optimizer step limit (0 = none)")->capture_default_str();
    app->add_option("--workers", tc.workers, "Threads per batch")->capture_default_str();
    app->add_option("--standardize", tc.standardize, "Standardize network inputs (true/false)")->capture_default_str();
    app->add_option("--out", out, "Output directory");
  }

  int run(CLI::App* app, std::ostream& os, std::ostream& es) {
    require_given(app->get_option("--data"));
    require_given(seed_opt);
    require_given(app->get_option("--out"));
    tc.validate();
    const auto dataset = refsys::read_dataset(dataset_file(data));
    if (dataset.trajectories.empty()) throw UsageError("dataset has no rows");

    trainer::ModelSpec spec = trainer::default_model_spec(dataset.meta);
    spec.half_width = half_width;
    auto net = netcore::NetworkConfig::preset(preset, trainer::model_input_dim(spec, dataset.meta), tc.seed);
    if (!hidden.empty()) net.hidden_layers = hidden;
    net.activation = netcore::parse_activation(activation);
    net.validate();

    const fs::path dir(out);
    ordered_json resolved;
    resolved["data"] = data;
    resolved["preset"] = preset;
    resolved["hidden"] = net.hidden_layers;
    resolved["activation"] = activation;
    resolved["half-width"] = half_width;
    resolved["epochs"] = tc.epochs;
    resolved["seed"] = tc.seed;
    resolved["batch-size"] = tc.batch_size;
    resolved["lr"] = tc.lr_initial;
    resolved["lr-decay"] = tc.lr_decay;
    resolved["split"] = tc.split;
    resolved["max-steps"] = tc.max_steps;
    resolved["workers"] = tc.workers;
    resolved["standardize"] = tc.standardize;
    resolved["out"] = out;
    write_text_file(dir / "train_config.json", dump(resolved));

    try {
      const auto result = trainer::train(net, spec, dataset, tc, {dir / "checkpoint.json"});
      trainer::write_report(result.report, dir / "report.json", dir / "loss_curve.csv");
      const auto& r = result.report;
      os << "trained " << r.steps << " steps; validation loss " << format_double(r.initial_val_loss) << " -> "
         << (r.val_loss.empty() ? format_double(r.initial_val_loss) : format_double(r.val_loss.back())) << "\n";
      if (r.degenerate_events) es << "degenerate Hessian events: " << r.degenerate_events << "\n";
    } catch (const trainer::TrainingDiverged& e) {
      trainer::write_report(e.result().report, dir / "report.json", dir / "loss_curve.csv");
      es << e.what() << "\nlast good checkpoint: " << (dir / "checkpoint.json").string() << "\n";
      return kExitDiverged;
    }
    return kExitOk;
  }
};

// ---- eval ----

struct EvalCommand {
  std::string config, checkpoint, data, out;
  std::size_t rollouts = 3, rollout_steps = 100;

  void add(CLI::App* app) {
    app->add_option("--config", config, "TOML or JSON run configuration");
    app->add_option("--checkpoint", checkpoint, "Checkpoint JSON");
    app->add_option("--data", data, "Dataset CSV, or a directory holding data.csv");
    app->add_option("--rollouts", rollouts, "Learned rollouts used for energy drift")->capture_default_str();
    app->add_option("--rollout-steps", rollout_steps, "Steps per learned rollout")->capture_default_str();
    app->add_option("--out", out, "Output directory");
  }

  int run(CLI::App* app, std::ostream& os) {
    require_given(app->get_option("--checkpoint"));
    require_given(app->get_option("--data"));
    require_given(app->get_option("--out"));
    const auto cp = netcore::load_checkpoint(checkpoint);
    const auto dataset = refsys::read_dataset(dataset_file(data));
    if (dataset.trajectories.empty()) throw UsageError("dataset has no rows");
    const auto spec = trainer::infer_model_spec(cp.config, dataset.meta);
    const auto model = trainer::make_model(spec, cp.network(), dataset.meta);
    const auto samples = trainer::samples_of(dataset.trajectories);
    const auto loss = trainer::evaluate(*model, cp.parameters.flat(), samples);

    const auto lagrangian = trainer::learned_lagrangian(spec, cp, dataset.meta);
    std::vector<double> drifts;
    std::size_t diverged = 0;
    const std::size_t n_roll = std::min(rollouts, dataset.trajectories.size());
    for (std::size_t k = 0; k < n_roll && dataset.meta.h > 0.0; ++k) {
      const auto& traj = dataset.trajectories[k];
      const std::size_t steps = std::min(rollout_steps, traj.size() - 1);
      if (steps == 0) continue;
      try {
        const auto path = refsys::rollout(lagrangian, traj.states.front(), dataset.meta.h, steps);
        const double h0 = eldyn::learned_energy(lagrangian, path.states.front());
        double worst = 0.0;
        for (const auto& s : path.states) worst = std::max(worst, std::fabs(eldyn::learned_energy(lagrangian, s) - h0));
        drifts.push_back(worst / std::max(std::fabs(h0), 1e-12));
      } catch (const NumericError&) {
        ++diverged;
      }
    }
    double mean_drift = 0.0, max_drift = 0.0;
    for (double d : drifts) {
      mean_drift += d / static_cast<double>(drifts.size());
      max_drift = std::max(max_drift, d);
    }

    ordered_json metrics;
    metrics["format_version"] = 1;
    metrics["checkpoint"] = checkpoint;
    metrics["data"] = data;
    metrics["system"] = dataset.meta.system;
    metrics["model_kind"] = std::string(trainer::to_string(spec.kind));
    metrics["samples"] = samples.size();
    metrics["mean_loss"] = loss.value;
    metrics["degenerate_events"] = loss.degenerate_events;
    metrics["rollouts"] = drifts.size();
    metrics["rollout_steps"] = rollout_steps;
    metrics["diverged_rollouts"] = diverged;
    metrics["energy_drift_mean"] = mean_drift;
    metrics["energy_drift_max"] = max_drift;

    std::string csv = "metric,value\n";
    csv += "samples," + std::to_string(samples.size()) + "\n";
    csv += "mean_loss," + format_double(loss.value) + "\n";
    csv += "degenerate_events," + std::to_string(loss.degenerate_events) + "\n";
    csv += "rollouts," + std::to_string(drifts.size()) + "\n";
    csv += "diverged_rollouts," + std::to_string(diverged) + "\n";
    csv += "energy_drift_mean," + format_double(mean_drift) + "\n";
    csv += "energy_drift_max," + format_double(max_drift) + "\n";

    ordered_json resolved;
    resolved["checkpoint"] = checkpoint;
    resolved["data"] = data;
    resolved["rollouts"] = rollouts;
    resolved["rollout-steps"] = rollout_steps;
    resolved["out"] = out;

    const fs::path dir(out);
    write_text_file(dir / "eval_config.json", dump(resolved));
    write_text_file(dir / "metrics.json", dump(metrics));
    write_text_file(dir / "metrics.csv", csv);
    os << "mean loss " << format_double(loss.value) << " over " << samples.size() << " samples\n";
    return kExitOk;
  }
};

// ---- rollout ----

struct RolloutCommand {
  std::string config, checkpoint, analytic, init, out;
  double dt = 0.01;
  std::size_t steps = 100;
  PhysicalOptions phys;

  void add(CLI::App* app) {
    app->add_option("--config", config, "TOML or JSON run configuration");
    auto* c = app->add_option("--checkpoint", checkpoint, "Learned Lagrangian checkpoint");
    auto* a = app->add_option("--analytic", analytic, "Reference system name");
    c->excludes(a);
    app->add_option("--init", init, "Initial state q0,..,qd0,.. (comma separated)");
    app->add_option("--dt", dt)->capture_default_str();
    app->add_option("--steps", steps)->capture_default_str();
    app->add_option("--out", out, "Output CSV");
    phys.add(app, false);
  }

  int run(CLI::App* app, std::ostream& os, std::ostream& es) {
    if (checkpoint.empty() == analytic.empty()) throw UsageError("give exactly one of --checkpoint or --analytic");
    require_given(app->get_option("--init"));
    require_given(app->get_option("--out"));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("--dt must be positive");
    const auto values = parse_list(init, "--init");
    if (values.empty() || values.size() % 2 != 0) {
      throw UsageError("--init needs 2·d numbers (coordinates then velocities), got " + std::to_string(values.size()));
    }
    const auto state = eldyn::PhaseState::unpack(values);
    const std::size_t d = state.dof();

    std::optional<eldyn::Lagrangian> lagrangian;
    if (!analytic.empty()) {
      const auto sys = refsys::ReferenceSystem::make(analytic, phys.constants(), {d, phys.dx});
      if (sys.dof() != d) {
        throw UsageError(analytic + " has " + std::to_string(sys.dof()) + " coordinates but --init gives " +
                         std::to_string(d));
      }
      lagrangian = sys.lagrangian();
    } else {
      const auto cp = netcore::load_checkpoint(checkpoint);
      refsys::DatasetMeta meta;
      meta.d = d;
      meta.system = cp.config.input_dim == 2 * d ? "particle" : "wave1d";
      meta.grid = {d, phys.dx};
      lagrangian = trainer::learned_lagrangian(trainer::infer_model_spec(cp.config, meta), cp, meta);
    }

    ordered_json resolved;
    if (!checkpoint.empty()) resolved["checkpoint"] = checkpoint;
    if (!analytic.empty()) resolved["analytic"] = analytic;
    resolved["init"] = init;
    resolved["dt"] = dt;
    resolved["steps"] = steps;
    resolved["out"] = out;
    phys.put(resolved, false);
    fs::path config_path(out);
    config_path.replace_extension(".config.json");
    write_text_file(config_path, dump(resolved));

    refsys::RolloutStats stats;
    eldyn::Trajectory path;
    try {
      path = refsys::rollout(*lagrangian, state, dt, steps, &stats);
    } catch (const refsys::DivergenceError& e) {
      es << "rollout diverged; " << e.last_finite() + 1 << " finite rows: " << e.what() << "\n";
      return kExitDiverged;
    }

    std::string csv = "t";
    for (const char* prefix : {"q", "qd"}) {
      for (std::size_t i = 0; i < d; ++i) csv += "," + std::string(prefix) + std::to_string(i);
    }
    csv += ",H\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
      csv += format_double(path.times[k]);
      for (double v : path.states[k].q) csv += "," + format_double(v);
      for (double v : path.states[k].q_dot) csv += "," + format_double(v);
      csv += "," + format_double(eldyn::learned_energy(*lagrangian, path.states[k])) + "\n";
    }
    write_text_file(out, csv);
    es << "acceleration solves: " << stats.accel_calls << ", degenerate: " << stats.degenerate_events
       << ", max Hessian condition: " << format_double(stats.max_condition) << "\n";
    os << "wrote " << path.size() << " rows to " << out << "\n";
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn Lagrangians from trajectories: generate data, train, evaluate, roll out.", "lagcli"};
  app.require_subcommand(1);
  GenCommand gen;
  TrainCommand train;
  EvalCommand eval;
  RolloutCommand roll;
  auto* gen_app = app.add_subcommand("gen", "Generate a reference dataset");
  auto* train_app = app.add_subcommand("train", "Train a network Lagrangian");
  auto* eval_app = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  auto* roll_app = app.add_subcommand("rollout", "Integrate a learned or analytic Lagrangian");
  gen.add(gen_app);
  train.add(train_app);
  eval.add(eval_app);
  roll.add(roll_app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto with_config = [](CLI::App* sub, const std::string& path) {
      if (!path.empty()) apply_config(*sub, load_config(path, sub->get_name()));
    };
    if (gen_app->parsed()) {
      with_config(gen_app, gen.config);
      return gen.run(gen_app, out);
    }
    if (train_app->parsed()) {
      with_config(train_app, train.config);
      return train.run(train_app, out, err);
    }
    if (eval_app->parsed()) {
      with_config(eval_app, eval.config);
      return eval.run(eval_app, out);
    }
    with_config(roll_app, roll.config);
    return roll.run(roll_app, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric divergence: " << e.what() << "\n";
    return kExitDiverged;
  }
}

}  // namespace lagnet::cli
