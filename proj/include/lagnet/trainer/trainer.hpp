#pragma once

// Minibatch training of an acceleration model with Adam.
//
// Trajectories (not samples) are split into training and validation sets so
// validation states never share a path with training states. Each epoch
// reshuffles the training samples with a generator seeded from (seed, epoch)
// and steps through batches of `batch_size` (the last batch may be smaller).
// The learning rate in epoch e (0-based) is lr_initial·lr_decay^e.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lagnet/errors.hpp"
#include "lagnet/netcore/checkpoint.hpp"
#include "lagnet/refsys/dataset_io.hpp"
#include "lagnet/trainer/models.hpp"

namespace lagnet::trainer {

struct AdamConstants {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr_initial = 1e-3;
  double lr_decay = 0.99;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  double split = 0.9;
  /// Stop after this many optimizer steps in total; 0 means no limit. The
  /// epoch in which the limit is reached is recorded as a (short) epoch.
  std::size_t max_steps = 0;
  std::size_t workers = 1;
  bool standardize = false;
  AdamConstants adam;

  /// Throws UsageError: 0 < split < 1, lr_initial > 0, 0 < lr_decay ≤ 1, batch_size ≥ 1, workers ≥ 1.
  void validate() const;
};

class Adam {
 public:
  Adam(std::size_t size, AdamConstants c);
  void step(std::span<double> theta, std::span<const double> gradient, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamConstants c_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

struct DataSplit {
  std::vector<std::size_t> train;       // trajectory indices
  std::vector<std::size_t> validation;  // trajectory indices
};

/// Seeded shuffle of the trajectory indices, then the first round(split·count)
/// train (at least one trajectory on each side when count ≥ 2). With a single
/// trajectory both sides hold it.
DataSplit split_trajectories(std::size_t count, double split, std::uint64_t seed);

struct TrainReport {
  TrainConfig config;
  netcore::NetworkConfig network;
  ModelSpec model;
  std::string system;
  std::string status = "ok";  // ok | diverged
  std::string message;
  std::vector<double> train_loss;  // mean minibatch loss per epoch
  std::vector<double> val_loss;    // evaluate() on the validation set after each epoch
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  std::size_t steps = 0;
  std::size_t degenerate_events = 0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  TrainReport report;
  netcore::Checkpoint checkpoint;  // last parameters with a finite loss
};

/// Where train() writes its checkpoint (after initialization and after every
/// epoch). Empty means nothing is written.
struct TrainOutputs {
  std::filesystem::path checkpoint;
};

/// Raised when a loss or gradient goes non-finite. The result holds the last
/// good checkpoint, which has also been written to TrainOutputs::checkpoint.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainResult result)
      : NumericError(what), result_(std::move(result)) {}
  const TrainResult& result() const noexcept { return result_; }

 private:
  TrainResult result_;
};

/// Model kind for a dataset: field_density (half width 1) for wave1d, particle otherwise.
ModelSpec default_model_spec(const refsys::DatasetMeta& meta);

TrainResult train(const netcore::NetworkConfig& network, const ModelSpec& model, const refsys::Dataset& data,
                  const TrainConfig& config, const TrainOutputs& outputs = {});

}  // namespace lagnet::trainer
