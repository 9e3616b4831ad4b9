#pragma once

// Acceleration models and the per-sample loss ‖q̈_pred − q̈_true‖₂.
//
// A model maps parameters θ and a phase state to predicted accelerations. Two
// kinds exist: a network Lagrangian over (q, q̇) and a network Lagrangian
// density summed over a periodic lattice. Both come in a plain double form and
// a taped form whose result is differentiable in θ.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lagnet/diffkit/diffkit.hpp"
#include "lagnet/eldyn/eldyn.hpp"
#include "lagnet/gridlag/grid.hpp"
#include "lagnet/netcore/checkpoint.hpp"
#include "lagnet/netcore/network.hpp"
#include "lagnet/refsys/dataset_io.hpp"

namespace lagnet::trainer {

struct Sample {
  eldyn::PhaseState state;
  std::vector<double> accel;
};

/// Every recorded sample, trajectory by trajectory.
std::vector<Sample> samples_of(const std::vector<eldyn::Trajectory>& trajectories);

class AccelModel {
 public:
  virtual ~AccelModel() = default;

  virtual std::size_t dof() const = 0;
  virtual std::size_t parameter_count() const = 0;
  virtual eldyn::BasicAccel<double> predict(std::span<const double> theta, const eldyn::PhaseState& s) const = 0;
  /// Records the prediction on the calling thread's active tape.
  virtual eldyn::BasicAccel<diffkit::Var> predict(std::span<const diffkit::Var> theta,
                                                  const eldyn::PhaseState& s) const = 0;
};

enum class ModelKind { particle, field_density };

std::string_view to_string(ModelKind k);

/// L_θ(q, q̇) given directly by the network; input_dim = 2·dof.
class ParticleModel : public AccelModel {
 public:
  explicit ParticleModel(netcore::Network network);

  std::size_t dof() const override { return network_.dof(); }
  std::size_t parameter_count() const override { return network_.config().parameter_count(); }
  eldyn::BasicAccel<double> predict(std::span<const double> theta, const eldyn::PhaseState& s) const override;
  eldyn::BasicAccel<diffkit::Var> predict(std::span<const diffkit::Var> theta,
                                          const eldyn::PhaseState& s) const override;

  const netcore::Network& network() const noexcept { return network_; }

 private:
  netcore::Network network_;
};

/// L_θ = Σ_i ℓ_θ(φ and φ̇ on the stencil of site i) over n periodic sites with
/// a symmetric stencil; input_dim = 2·(2·half_width + 1).
class FieldDensityModel : public AccelModel {
 public:
  FieldDensityModel(netcore::Network network, std::size_t sites, double dx, std::size_t half_width);

  std::size_t dof() const override { return sites_; }
  std::size_t parameter_count() const override { return network_.config().parameter_count(); }
  eldyn::BasicAccel<double> predict(std::span<const double> theta, const eldyn::PhaseState& s) const override;
  eldyn::BasicAccel<diffkit::Var> predict(std::span<const diffkit::Var> theta,
                                          const eldyn::PhaseState& s) const override;

  const netcore::Network& network() const noexcept { return network_; }
  std::size_t half_width() const noexcept { return half_width_; }
  double dx() const noexcept { return dx_; }

 private:
  netcore::Network network_;
  std::size_t sites_;
  double dx_;
  std::size_t half_width_;
  gridlag::StencilSet stencils_;
};

/// What a checkpoint's network means for a given dataset.
struct ModelSpec {
  ModelKind kind = ModelKind::particle;
  std::size_t half_width = 1;  // field_density only
};

/// particle when the network input is 2·d; field_density for wave1d data when
/// the input is 2·(2s + 1). Throws UsageError on a dimension mismatch.
ModelSpec infer_model_spec(const netcore::NetworkConfig& config, const refsys::DatasetMeta& meta);

/// Network input dimension required by `spec` on data described by `meta`.
std::size_t model_input_dim(const ModelSpec& spec, const refsys::DatasetMeta& meta);

std::unique_ptr<AccelModel> make_model(const ModelSpec& spec, const netcore::Network& network,
                                       const refsys::DatasetMeta& meta);

/// The learned Lagrangian as an eldyn::Lagrangian over the data's coordinates
/// (the lattice total for field densities), for rollouts and energies.
eldyn::Lagrangian learned_lagrangian(const ModelSpec& spec, const netcore::Checkpoint& checkpoint,
                                     const refsys::DatasetMeta& meta);

/// Input-standardization rows the model's network sees on these samples.
std::vector<std::vector<double>> network_inputs(const ModelSpec& spec, std::span<const Sample> samples,
                                                std::size_t max_rows);

/// ‖pred − truth‖₂. Throws UsageError on a size mismatch.
double prediction_loss(std::span<const double> pred, std::span<const double> truth);
diffkit::Var prediction_loss(std::span<const diffkit::Var> pred, std::span<const double> truth);

struct LossValue {
  double value = 0.0;
  std::size_t degenerate_events = 0;
};

double sample_loss(const AccelModel& model, std::span<const double> theta, const Sample& sample,
                   std::size_t* degenerate_events = nullptr);

/// Mean of the sample losses, summed in ascending index order. Throws
/// UsageError on an empty batch or an out-of-range index.
LossValue batch_loss(const AccelModel& model, std::span<const double> theta, std::span<const Sample> samples,
                     std::span<const std::size_t> batch);

struct LossGradient {
  double value = 0.0;
  std::vector<double> gradient;
  std::size_t degenerate_events = 0;
};

/// Value and ∂/∂θ of batch_loss. Per-sample gradients are computed on
/// separate tapes, up to `workers` at a time, and always summed in ascending
/// index order, so the result does not depend on the worker count.
LossGradient batch_gradient(const AccelModel& model, std::span<const double> theta, std::span<const Sample> samples,
                            std::span<const std::size_t> batch, std::size_t workers = 1);

/// Mean sample loss over all samples.
LossValue evaluate(const AccelModel& model, std::span<const double> theta, std::span<const Sample> samples);

}  // namespace lagnet::trainer
