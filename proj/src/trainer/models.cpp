#include "lagnet/trainer/models.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace lagnet::trainer {

using diffkit::Var;
using eldyn::PhaseState;

std::vector<Sample> samples_of(const std::vector<eldyn::Trajectory>& trajectories) {
  std::vector<Sample> out;
  for (const auto& t : trajectories) {
    for (std::size_t k = 0; k < t.size(); ++k) out.push_back({t.states[k], t.accels[k]});
  }
  return out;
}

std::string_view to_string(ModelKind k) { return k == ModelKind::particle ? "particle" : "field_density"; }

ParticleModel::ParticleModel(netcore::Network network) : network_(std::move(network)) {}

eldyn::BasicAccel<double> ParticleModel::predict(std::span<const double> theta, const PhaseState& s) const {
  if (theta.size() != parameter_count()) throw UsageError("parameter vector does not match the network");
  if (s.dof() != dof()) throw UsageError("state dimension does not match the model");
  const auto z = s.packed();
  const auto bundle = diffkit::with_jet_width(z.size(), [&]<int N>() {
    const auto jets = diffkit::seed_jets<N, double>(z);
    return diffkit::bundle_from_jet(network_.apply(theta, std::span<const diffkit::Jet<double, N>>(jets)), z.size());
  });
  return eldyn::solve_euler_lagrange(bundle, s.q_dot);
}

eldyn::BasicAccel<Var> ParticleModel::predict(std::span<const Var> theta, const PhaseState& s) const {
  if (s.dof() != dof()) throw UsageError("state dimension does not match the model");
  return eldyn::solve_euler_lagrange(network_.lagrangian_bundle(theta, s), s.q_dot);
}

FieldDensityModel::FieldDensityModel(netcore::Network network, std::size_t sites, double dx, std::size_t half_width)
    : network_(std::move(network)),
      sites_(sites),
      dx_(dx),
      half_width_(half_width),
      stencils_(gridlag::StencilSet::symmetric(sites, half_width)) {
  if (network_.config().input_dim != 2 * (2 * half_width + 1)) {
    throw UsageError("density network input must be 2·(2·half_width + 1) = " +
                     std::to_string(2 * (2 * half_width + 1)));
  }
}

eldyn::BasicAccel<double> FieldDensityModel::predict(std::span<const double> theta, const PhaseState& s) const {
  if (theta.size() != parameter_count()) throw UsageError("parameter vector does not match the network");
  const gridlag::NetworkDensity<double> local{&network_, theta};
  return gridlag::field_accel_assembled<double>(local, gridlag::GridField::from_state(s, dx_), stencils_);
}

eldyn::BasicAccel<Var> FieldDensityModel::predict(std::span<const Var> theta, const PhaseState& s) const {
  const gridlag::NetworkDensity<Var> local{&network_, theta};
  return gridlag::field_accel_assembled<Var>(local, gridlag::GridField::from_state(s, dx_), stencils_);
}

ModelSpec infer_model_spec(const netcore::NetworkConfig& config, const refsys::DatasetMeta& meta) {
  if (config.input_dim == 2 * meta.d) return {ModelKind::particle, 1};
  const std::size_t window = config.input_dim / 2;
  if (meta.system == "wave1d" && window % 2 == 1 && window >= 3 && window <= meta.d && meta.d >= gridlag::kMinSites) return {ModelKind::field_density, window / 2};
  throw UsageError("network input dimension " + std::to_string(config.input_dim) + " does not fit data with d = " +
                   std::to_string(meta.d) + " (a particle model needs 2·d = " + std::to_string(2 * meta.d) + ")");
}

std::size_t model_input_dim(const ModelSpec& spec, const refsys::DatasetMeta& meta) {
  return spec.kind == ModelKind::particle ? 2 * meta.d : 2 * (2 * spec.half_width + 1);
}

std::unique_ptr<AccelModel> make_model(const ModelSpec& spec, const netcore::Network& network,
                                       const refsys::DatasetMeta& meta) {
  if (network.config().input_dim != model_input_dim(spec, meta)) {
    throw UsageError("network input dimension " + std::to_string(network.config().input_dim) +
                     " does not match the data (expected " + std::to_string(model_input_dim(spec, meta)) + ")");
  }
  if (spec.kind == ModelKind::particle) return std::make_unique<ParticleModel>(network);
  return std::make_unique<FieldDensityModel>(network, meta.d, meta.grid.dx, spec.half_width);
}

namespace {

// NetworkDensity only borrows; rollouts need the Lagrangian to own its pieces.
struct OwnedDensity {
  std::shared_ptr<const netcore::Network> network;
  std::shared_ptr<const std::vector<double>> theta;

  template <class S>
  S operator()(std::span<const S> phi, std::span<const S> phi_dot, double dx) const {
    return gridlag::NetworkDensity<double>{network.get(), *theta}(phi, phi_dot, dx);
  }
};

}  // namespace

eldyn::Lagrangian learned_lagrangian(const ModelSpec& spec, const netcore::Checkpoint& checkpoint,
                                     const refsys::DatasetMeta& meta) {
  auto net = checkpoint.network();
  if (net.config().input_dim != model_input_dim(spec, meta)) throw UsageError("checkpoint does not match the data");
  if (spec.kind == ModelKind::particle) return net.as_lagrangian(checkpoint.parameters);
  const auto flat = checkpoint.parameters.flat();
  OwnedDensity local{std::make_shared<const netcore::Network>(std::move(net)),
                     std::make_shared<const std::vector<double>>(flat.begin(), flat.end())};
  return gridlag::field_lagrangian(std::move(local), meta.grid.dx, gridlag::StencilSet::symmetric(meta.d, spec.half_width));
}

std::vector<std::vector<double>> network_inputs(const ModelSpec& spec, std::span<const Sample> samples,
                                                std::size_t max_rows) {
  std::vector<std::vector<double>> rows;
  const std::size_t stride = std::max<std::size_t>(1, samples.size() / std::max<std::size_t>(1, max_rows));
  for (std::size_t k = 0; k < samples.size() && rows.size() < max_rows; k += stride) {
    const auto& s = samples[k].state;
    if (spec.kind == ModelKind::particle) {
      rows.push_back(s.packed());
      continue;
    }
    const auto stencils = gridlag::StencilSet::symmetric(s.dof(), spec.half_width);
    for (std::size_t i = 0; i < s.dof(); ++i) {
      std::vector<double> row;
      for (std::size_t j : stencils.at(i)) row.push_back(s.q[j]);
      for (std::size_t j : stencils.at(i)) row.push_back(s.q_dot[j]);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

double prediction_loss(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw UsageError("prediction and target differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s);
}

Var prediction_loss(std::span<const Var> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw UsageError("prediction and target differ in dimension");
  std::vector<Var> diff(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) diff[i] = pred[i] - truth[i];
  return diffkit::norm2(diff);
}

double sample_loss(const AccelModel& model, std::span<const double> theta, const Sample& sample,
                   std::size_t* degenerate_events) {
  const auto pred = model.predict(theta, sample.state);
  if (degenerate_events && pred.info.degenerate) ++*degenerate_events;
  const double loss = prediction_loss(pred.q_ddot, sample.accel);
  if (!std::isfinite(loss)) throw NumericError("non-finite sample loss", sample.state.packed());
  return loss;
}

namespace {

std::vector<std::size_t> sorted_batch(std::span<const Sample> samples, std::span<const std::size_t> batch) {
  if (batch.empty()) throw UsageError("batch is empty");
  std::vector<std::size_t> idx(batch.begin(), batch.end());
  std::sort(idx.begin(), idx.end());
  if (idx.back() >= samples.size()) throw UsageError("batch index out of range");
  return idx;
}

struct SampleGradient {
  double value = 0.0;
  std::vector<double> gradient;
  bool degenerate = false;
};

SampleGradient one_gradient(const AccelModel& model, std::span<const double> theta, const Sample& sample) {
  SampleGradient out;
  const auto vg = diffkit::parameter_gradient(
      [&](std::span<const Var> th) {
        const auto pred = model.predict(th, sample.state);
        out.degenerate = pred.info.degenerate;
        return prediction_loss(pred.q_ddot, sample.accel);
      },
      theta);
  out.value = vg.value;
  out.gradient = vg.gradient;
  return out;
}

}  // namespace

LossValue batch_loss(const AccelModel& model, std::span<const double> theta, std::span<const Sample> samples,
                     std::span<const std::size_t> batch) {
  const auto idx = sorted_batch(samples, batch);
  LossValue out;
  double sum = 0.0;
  for (std::size_t k : idx) sum += sample_loss(model, theta, samples[k], &out.degenerate_events);
  out.value = sum / static_cast<double>(idx.size());
  return out;
}

LossGradient batch_gradient(const AccelModel& model, std::span<const double> theta, std::span<const Sample> samples,
                            std::span<const std::size_t> batch, std::size_t workers) {
  const auto idx = sorted_batch(samples, batch);
  if (theta.size() != model.parameter_count()) throw UsageError("parameter vector does not match the model");
  workers = std::clamp<std::size_t>(workers, 1, idx.size());

  LossGradient out;
  out.gradient.assign(theta.size(), 0.0);
  double sum = 0.0;
  auto accumulate = [&](const SampleGradient& g) {
    sum += g.value;
    for (std::size_t p = 0; p < g.gradient.size(); ++p) out.gradient[p] += g.gradient[p];
    if (g.degenerate) ++out.degenerate_events;
  };

  if (workers == 1) {
    for (std::size_t k : idx) accumulate(one_gradient(model, theta, samples[k]));
  } else {
    // chunks of `workers` samples; each thread has its own tape
    std::vector<SampleGradient> chunk(workers);
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t start = 0; start < idx.size(); start += workers) {
      const std::size_t len = std::min(workers, idx.size() - start);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < len; ++w) {
        pool.emplace_back([&, w] {
          try {
            chunk[w] = one_gradient(model, theta, samples[idx[start + w]]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (std::size_t w = 0; w < len; ++w) {
        if (errors[w]) std::rethrow_exception(errors[w]);
        accumulate(chunk[w]);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  out.value = sum / static_cast<double>(idx.size());
  for (double& g : out.gradient) g *= inv;
  return out;
}

LossValue evaluate(const AccelModel& model, std::span<const double> theta, std::span<const Sample> samples) {
  if (samples.empty()) throw UsageError("cannot evaluate on an empty dataset");
  LossValue out;
  double sum = 0.0;
  for (const auto& s : samples) sum += sample_loss(model, theta, s, &out.degenerate_events);
  out.value = sum / static_cast<double>(samples.size());
  return out;
}

}  // namespace lagnet::trainer
