#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "orthonet/trainers.hpp"

namespace orthonet {

/// CSV with header `step,t,loss,generator_norm,max_layer_defect,product_defect`,
/// one row per record, values at 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

/// Writes each record's product as `<prefix>_<step>.txt` in the matrix text
/// format, creating `dir` if needed.
void save_trajectory_checkpoints(const std::filesystem::path& dir, std::string_view prefix,
                                 const Trajectory& trajectory);

}  // namespace orthonet
