#include "lagnet/trainer/report.hpp"

#include <json.hpp>

#include "lagnet/textio.hpp"

namespace lagnet::trainer {

std::string report_json(const TrainReport& r) {
  nlohmann::ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  j["system"] = r.system;
  j["seed"] = r.config.seed;
  const auto& c = r.config;
  j["config"] = {{"batch_size", c.batch_size},
                 {"lr_initial", c.lr_initial},
                 {"lr_decay", c.lr_decay},
                 {"epochs", c.epochs},
                 {"split", c.split},
                 {"max_steps", c.max_steps},
                 {"workers", c.workers},
                 {"standardize", c.standardize},
                 {"loss_reduction", "per_sample_norm_mean"},
                 {"optimizer", {{"name", "adam"}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}}};
  j["model"] = {{"kind", std::string(to_string(r.model.kind))},
                {"input_dim", r.network.input_dim},
                {"hidden_layers", r.network.hidden_layers},
                {"activation", std::string(netcore::to_string(r.network.activation))},
                {"parameter_count", r.network.parameter_count()},
                {"network_seed", r.network.seed}};
  if (r.model.kind == ModelKind::field_density) j["model"]["half_width"] = r.model.half_width;
  j["train_samples"] = r.train_samples;
  j["val_samples"] = r.val_samples;
  j["initial_train_loss"] = r.initial_train_loss;
  j["initial_val_loss"] = r.initial_val_loss;
  j["train_loss"] = r.train_loss;
  j["val_loss"] = r.val_loss;
  j["steps"] = r.steps;
  j["degenerate_events"] = r.degenerate_events;
  j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

std::string loss_curve_csv(const TrainReport& r) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(r.train_loss[e]) + "," + format_double(r.val_loss[e]) + "\n";
  }
  return out;
}

void write_report(const TrainReport& report, const std::filesystem::path& json, const std::filesystem::path& csv) {
  write_text_file(json, report_json(report));
  write_text_file(csv, loss_curve_csv(report));
}

}  // namespace lagnet::trainer
