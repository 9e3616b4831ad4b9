#include "lagnet/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace lagnet::trainer {

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch_size must be at least 1");
  if (!(lr_initial > 0.0) || !std::isfinite(lr_initial)) throw UsageError("lr_initial must be positive");
  if (!(lr_decay > 0.0) || lr_decay > 1.0) throw UsageError("lr_decay must lie in (0, 1]");
  if (!(split > 0.0 && split < 1.0)) throw UsageError("split must lie strictly between 0 and 1");
  if (workers < 1) throw UsageError("workers must be at least 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0)) {
    throw UsageError("invalid Adam constants");
  }
}

Adam::Adam(std::size_t size, AdamConstants c) : c_(c), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> theta, std::span<const double> gradient, double lr) {
  if (theta.size() != m_.size() || gradient.size() != m_.size()) throw UsageError("Adam state size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = c_.beta1 * m_[i] + (1.0 - c_.beta1) * gradient[i];
    v_[i] = c_.beta2 * v_[i] + (1.0 - c_.beta2) * gradient[i] * gradient[i];
    theta[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + c_.eps);
  }
}

DataSplit split_trajectories(std::size_t count, double split, std::uint64_t seed) {
  DataSplit out;
  if (count == 0) return out;
  if (count == 1) return {{0}, {0}};
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(refsys::mix64(seed ^ 0x5eed5eedULL));
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(split * static_cast<double>(count)));
  n_train = std::clamp<std::size_t>(n_train, 1, count - 1);
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

ModelSpec default_model_spec(const refsys::DatasetMeta& meta) {
  if (meta.system == "wave1d") return {ModelKind::field_density, 1};
  return {ModelKind::particle, 1};
}

namespace {

std::vector<Sample> gather(const refsys::Dataset& data, const std::vector<std::size_t>& which) {
  std::vector<eldyn::Trajectory> picked;
  picked.reserve(which.size());
  for (std::size_t k : which) picked.push_back(data.trajectories.at(k));
  return samples_of(picked);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainResult train(const netcore::NetworkConfig& network_config, const ModelSpec& model_spec,
                  const refsys::Dataset& data, const TrainConfig& config, const TrainOutputs& outputs) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  network_config.validate();
  if (data.trajectories.empty() || data.samples() == 0) throw UsageError("dataset is empty");
  for (const auto& t : data.trajectories) {
    for (const auto& s : t.states) {
      if (s.dof() != data.meta.d) throw UsageError("dataset states do not match d = " + std::to_string(data.meta.d));
    }
  }

  const auto split = split_trajectories(data.trajectories.size(), config.split, config.seed);
  const auto train_set = gather(data, split.train);
  const auto val_set = gather(data, split.validation);

  netcore::InputTransform transform;
  if (config.standardize) transform = netcore::InputTransform::standardize(network_inputs(model_spec, train_set, 4096));
  const netcore::Network network(network_config, transform);
  const auto model = make_model(model_spec, network, data.meta);

  TrainResult result;
  auto& report = result.report;
  report.config = config;
  report.network = network_config;
  report.model = model_spec;
  report.system = data.meta.system;
  report.train_samples = train_set.size();
  report.val_samples = val_set.size();
  result.checkpoint = {network_config, transform, netcore::init(network_config)};

  auto finish = [&] {
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  auto save = [&] {
    if (!outputs.checkpoint.empty()) netcore::save_checkpoint(result.checkpoint, outputs.checkpoint);
  };
  auto diverge = [&](const std::string& why) {
    report.status = "diverged";
    report.message = why;
    finish();
    save();
    throw TrainingDiverged("training diverged: " + why, result);
  };

  std::vector<double> theta(result.checkpoint.parameters.flat().begin(), result.checkpoint.parameters.flat().end());
  try {
    report.initial_val_loss = evaluate(*model, theta, val_set).value;
    report.initial_train_loss = evaluate(*model, theta, train_set).value;
  } catch (const NumericError& e) {
    diverge(std::string("initial loss: ") + e.what());
  }
  save();

  Adam adam(theta.size(), config.adam);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.max_steps && report.steps >= config.max_steps) break;
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(refsys::mix64(config.seed ^ (0x9e3779b97f4a7c15ULL * (epoch + 1))));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = config.lr_initial * std::pow(config.lr_decay, static_cast<double>(epoch));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      if (config.max_steps && report.steps >= config.max_steps) break;
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      LossGradient g;
      try {
        g = batch_gradient(*model, theta, train_set, batch, config.workers);
      } catch (const NumericError& e) {
        diverge(std::string("step ") + std::to_string(report.steps + 1) + ": " + e.what());
      }
      if (!std::isfinite(g.value) || !all_finite(g.gradient)) {
        diverge("step " + std::to_string(report.steps + 1) + ": non-finite loss or gradient");
      }
      adam.step(theta, g.gradient, lr);
      if (!all_finite(theta)) diverge("step " + std::to_string(report.steps + 1) + ": non-finite parameters");
      loss_sum += g.value;
      report.degenerate_events += g.degenerate_events;
      ++batches;
      ++report.steps;
    }

    double val = 0.0;
    try {
      val = evaluate(*model, theta, val_set).value;
    } catch (const NumericError& e) {
      diverge("validation after epoch " + std::to_string(epoch + 1) + ": " + e.what());
    }
    result.checkpoint.parameters = netcore::ParameterSet(network_config, theta);
    report.train_loss.push_back(batches ? loss_sum / static_cast<double>(batches) : 0.0);
    report.val_loss.push_back(val);
    save();
  }
  finish();
  return result;
}

}  // namespace lagnet::trainer
