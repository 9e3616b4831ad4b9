#pragma once

// Fully connected network L_θ(q, q̇) → ℝ.
//
// Flat parameter layout (layer-major): for each layer l with n_in inputs and
// n_out outputs, the weights W_l[o][i] in row-major order, then the biases
// b_l[o]. Hidden layers apply the activation; the output layer is linear.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagnet/diffkit/diffkit.hpp"
#include "lagnet/eldyn/lagrangian.hpp"
#include "lagnet/eldyn/types.hpp"

namespace lagnet::netcore {

/// Only activations with a second derivative that is not identically zero;
/// the acceleration solve differentiates the network twice.
enum class Activation { softplus, tanh, sigmoid };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

struct NetworkConfig {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_layers{64, 64};
  Activation activation = Activation::softplus;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t parameter_count() const;

  /// 2 hidden layers × 64 units, softplus.
  static NetworkConfig desk(std::size_t input_dim, std::uint64_t seed);
  /// 4 hidden layers × 500 units, softplus.
  static NetworkConfig paper(std::size_t input_dim, std::uint64_t seed);
  static NetworkConfig preset(std::string_view name, std::size_t input_dim, std::uint64_t seed);
};

struct LayerShape {
  std::size_t in;
  std::size_t out;
  std::size_t offset;  // first weight in the flat view; biases follow the in·out weights

  std::size_t bias_offset() const noexcept { return offset + in * out; }
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

std::vector<LayerShape> layer_shapes(const NetworkConfig& config);

class ParameterSet {
 public:
  ParameterSet() = default;
  /// All-zero parameters shaped for `config`.
  explicit ParameterSet(const NetworkConfig& config);
  ParameterSet(const NetworkConfig& config, std::vector<double> flat);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> flat() const noexcept { return values_; }
  std::span<double> flat() noexcept { return values_; }
  double operator[](std::size_t k) const { return values_.at(k); }
  void set(std::size_t k, double v) { values_.at(k) = v; }

  const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  double weight(std::size_t layer, std::size_t out, std::size_t in) const;
  double bias(std::size_t layer, std::size_t out) const;
  void set_weight(std::size_t layer, std::size_t out, std::size_t in, double v);
  void set_bias(std::size_t layer, std::size_t out, double v);

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<LayerShape> layers_;
  std::vector<double> values_;
};

/// Weights ~ N(0, 2/(n_in + n_out)), biases 0, reproducible from config.seed.
ParameterSet init(const NetworkConfig& config);

/// Fixed affine map applied to the inputs before the first layer.
struct InputTransform {
  std::vector<double> mean;
  std::vector<double> scale;

  bool empty() const noexcept { return mean.empty(); }
  /// Per-feature mean and standard deviation (scale 1 for constant features).
  static InputTransform standardize(const std::vector<std::vector<double>>& rows);
};

class Network {
 public:
  explicit Network(NetworkConfig config, InputTransform transform = {});

  const NetworkConfig& config() const noexcept { return config_; }
  const InputTransform& transform() const noexcept { return transform_; }
  const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  std::size_t dof() const noexcept { return config_.input_dim / 2; }

  /// Network output for parameter scalar P and input scalar X (double, Var,
  /// Jet<double, N> or Jet<Var, N>).
  template <class P, class X>
  X apply(std::span<const P> theta, std::span<const X> x) const;

  double forward(const ParameterSet& theta, const eldyn::PhaseState& state) const;
  diffkit::DerivativeBundle lagrangian_bundle(const ParameterSet& theta, const eldyn::PhaseState& state) const;
  /// Bundle whose entries are recorded on the active tape as functions of θ.
  diffkit::BasicBundle<diffkit::Var> lagrangian_bundle(std::span<const diffkit::Var> theta,
                                                        const eldyn::PhaseState& state) const;

  eldyn::Lagrangian as_lagrangian(ParameterSet theta) const;

 private:
  void check_state(const eldyn::PhaseState& state) const;

  NetworkConfig config_;
  InputTransform transform_;
  std::vector<LayerShape> layers_;
};

template <class X>
X activate(Activation a, const X& x) {
  using diffkit::sigmoid;
  using diffkit::softplus;
  using diffkit::tanh;
  switch (a) {
    case Activation::softplus: return softplus(x);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  return x;
}

template <class P, class X>
X Network::apply(std::span<const P> theta, std::span<const X> x) const {
  using diffkit::linear_combination;
  std::vector<X> a(x.begin(), x.end());
  if (!transform_.empty()) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] - P(transform_.mean[i])) * P(1.0 / transform_.scale[i]);
  }
  std::vector<X> z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerShape& shape = layers_[l];
    z.resize(shape.out);
    for (std::size_t o = 0; o < shape.out; ++o) {
      z[o] = linear_combination(theta.subspan(shape.offset + o * shape.in, shape.in), std::span<const X>(a)) +
             theta[shape.bias_offset() + o];
    }
    if (l + 1 == layers_.size()) break;
    for (X& v : z) v = activate(config_.activation, v);
    a.swap(z);
  }
  return z[0];
}

}  // namespace lagnet::netcore
