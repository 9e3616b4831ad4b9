#pragma once

// TrainReport as JSON plus the loss curve as CSV `epoch,train_loss,val_loss`
// (epochs numbered from 1, doubles at 17 significant digits).

#include <filesystem>
#include <string>

#include "lagnet/trainer/trainer.hpp"

namespace lagnet::trainer {

inline constexpr int kReportFormatVersion = 1;

std::string report_json(const TrainReport& report);
std::string loss_curve_csv(const TrainReport& report);

/// Throws IoError.
void write_report(const TrainReport& report, const std::filesystem::path& json, const std::filesystem::path& csv);

}  // namespace lagnet::trainer
