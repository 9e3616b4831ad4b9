#include "lagnet/netcore/network.hpp"

#include <cmath>
#include <random>

#include "lagnet/errors.hpp"

namespace lagnet::netcore {

Activation parse_activation(std::string_view name) {
  if (name == "softplus") return Activation::softplus;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu" || name == "leaky_relu" || name == "identity" || name == "linear") {
    throw UsageError("activation '" + std::string(name) +
                     "' has a zero second derivative almost everywhere; use softplus, tanh or sigmoid");
  }
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::softplus: return "softplus";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

void NetworkConfig::validate() const {
  if (input_dim == 0 || input_dim % 2 != 0) {
    throw UsageError("input_dim must be a positive even number (q and q_dot), got " + std::to_string(input_dim));
  }
  if (hidden_layers.empty()) throw UsageError("network needs at least one hidden layer");
  for (std::size_t w : hidden_layers) {
    if (w == 0) throw UsageError("hidden layer width must be positive");
  }
}

std::size_t NetworkConfig::parameter_count() const {
  std::size_t total = 0;
  for (const auto& s : layer_shapes(*this)) total += (s.in + 1) * s.out;
  return total;
}

NetworkConfig NetworkConfig::desk(std::size_t input_dim, std::uint64_t seed) {
  return {input_dim, {64, 64}, Activation::softplus, seed};
}

NetworkConfig NetworkConfig::paper(std::size_t input_dim, std::uint64_t seed) {
  return {input_dim, {500, 500, 500, 500}, Activation::softplus, seed};
}

NetworkConfig NetworkConfig::preset(std::string_view name, std::size_t input_dim, std::uint64_t seed) {
  if (name == "desk") return desk(input_dim, seed);
  if (name == "paper") return paper(input_dim, seed);
  throw UsageError("unknown network preset '" + std::string(name) + "' (expected desk or paper)");
}

std::vector<LayerShape> layer_shapes(const NetworkConfig& config) {
  config.validate();
  std::vector<LayerShape> shapes;
  std::size_t in = config.input_dim;
  std::size_t offset = 0;
  auto add = [&](std::size_t out) {
    shapes.push_back({in, out, offset});
    offset += (in + 1) * out;
    in = out;
  };
  for (std::size_t w : config.hidden_layers) add(w);
  add(1);
  return shapes;
}

ParameterSet::ParameterSet(const NetworkConfig& config) : layers_(layer_shapes(config)) {
  values_.assign(config.parameter_count(), 0.0);
}

ParameterSet::ParameterSet(const NetworkConfig& config, std::vector<double> flat) : layers_(layer_shapes(config)) {
  const std::size_t expected = config.parameter_count();
  if (flat.size() != expected) {
    throw UsageError("parameter vector has " + std::to_string(flat.size()) + " entries, network expects " +
                     std::to_string(expected));
  }
  values_ = std::move(flat);
}

double ParameterSet::weight(std::size_t layer, std::size_t out, std::size_t in) const {
  const auto& s = layers_.at(layer);
  if (out >= s.out || in >= s.in) throw UsageError("weight index out of range");
  return values_[s.offset + out * s.in + in];
}

double ParameterSet::bias(std::size_t layer, std::size_t out) const {
  const auto& s = layers_.at(layer);
  if (out >= s.out) throw UsageError("bias index out of range");
  return values_[s.bias_offset() + out];
}

void ParameterSet::set_weight(std::size_t layer, std::size_t out, std::size_t in, double v) {
  const auto& s = layers_.at(layer);
  if (out >= s.out || in >= s.in) throw UsageError("weight index out of range");
  values_[s.offset + out * s.in + in] = v;
}

void ParameterSet::set_bias(std::size_t layer, std::size_t out, double v) {
  const auto& s = layers_.at(layer);
  if (out >= s.out) throw UsageError("bias index out of range");
  values_[s.bias_offset() + out] = v;
}

ParameterSet init(const NetworkConfig& config) {
  ParameterSet theta(config);
  std::mt19937_64 rng(config.seed);
  auto flat = theta.flat();
  for (const auto& s : theta.layers()) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(s.in + s.out)));
    for (std::size_t k = 0; k < s.in * s.out; ++k) flat[s.offset + k] = normal(rng);
  }
  return theta;
}

InputTransform InputTransform::standardize(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw UsageError("cannot standardize an empty set of inputs");
  const std::size_t dim = rows.front().size();
  InputTransform t;
  t.mean.assign(dim, 0.0);
  t.scale.assign(dim, 0.0);
  for (const auto& r : rows) {
    if (r.size() != dim) throw UsageError("inconsistent input dimensions");
    for (std::size_t i = 0; i < dim; ++i) t.mean[i] += r[i];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : t.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < dim; ++i) t.scale[i] += (r[i] - t.mean[i]) * (r[i] - t.mean[i]);
  }
  for (double& s : t.scale) {
    s = std::sqrt(s / n);
    if (!(s > 1e-12)) s = 1.0;
  }
  return t;
}

Network::Network(NetworkConfig config, InputTransform transform)
    : config_(std::move(config)), transform_(std::move(transform)), layers_(layer_shapes(config_)) {
  if (!transform_.empty()) {
    if (transform_.mean.size() != config_.input_dim || transform_.scale.size() != config_.input_dim) {
      throw UsageError("input transform dimension does not match input_dim");
    }
    for (double s : transform_.scale) {
      if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("input transform scales must be positive and finite");
    }
  }
}

void Network::check_state(const eldyn::PhaseState& state) const {
  state.validate();
  if (2 * state.dof() != config_.input_dim) {
    throw UsageError("state has " + std::to_string(2 * state.dof()) + " inputs, network expects " +
                     std::to_string(config_.input_dim));
  }
}

double Network::forward(const ParameterSet& theta, const eldyn::PhaseState& state) const {
  check_state(state);
  if (theta.size() != config_.parameter_count()) throw UsageError("parameter set does not match network shape");
  const auto z = state.packed();
  return apply(theta.flat(), std::span<const double>(z));
}

diffkit::DerivativeBundle Network::lagrangian_bundle(const ParameterSet& theta,
                                                     const eldyn::PhaseState& state) const {
  check_state(state);
  if (theta.size() != config_.parameter_count()) throw UsageError("parameter set does not match network shape");
  const auto z = state.packed();
  return diffkit::with_jet_width(z.size(), [&]<int N>() {
    const auto jets = diffkit::seed_jets<N, double>(z);
    const auto y = apply(theta.flat(), std::span<const diffkit::Jet<double, N>>(jets));
    return diffkit::bundle_from_jet(y, z.size());
  });
}

diffkit::BasicBundle<diffkit::Var> Network::lagrangian_bundle(std::span<const diffkit::Var> theta,
                                                              const eldyn::PhaseState& state) const {
  using diffkit::Var;
  check_state(state);
  if (theta.size() != config_.parameter_count()) throw UsageError("parameter set does not match network shape");
  const auto z = state.packed();
  const std::vector<Var> zv(z.begin(), z.end());
  return diffkit::with_jet_width(z.size(), [&]<int N>() {
    const auto jets = diffkit::seed_jets<N, Var>(zv);
    const auto y = apply(theta, std::span<const diffkit::Jet<Var, N>>(jets));
    return diffkit::bundle_from_jet(y, z.size());
  });
}

eldyn::Lagrangian Network::as_lagrangian(ParameterSet theta) const {
  if (theta.size() != config_.parameter_count()) throw UsageError("parameter set does not match network shape");
  auto net = std::make_shared<const Network>(*this);
  auto params = std::make_shared<const ParameterSet>(std::move(theta));
  return eldyn::Lagrangian(
      dof(), [net, params](const eldyn::PhaseState& s) { return net->forward(*params, s); },
      [net, params](const eldyn::PhaseState& s) { return net->lagrangian_bundle(*params, s); });
}

}  // namespace lagnet::netcore
