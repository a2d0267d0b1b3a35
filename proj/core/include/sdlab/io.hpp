#pragma once

// Report serialization: JSON summaries, CSV tables, COO matrices and binary
// trajectory dumps. Doubles in CSV carry 17 significant digits.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlab/carleman.hpp"
#include "sdlab/coefficients.hpp"
#include "sdlab/control.hpp"
#include "sdlab/evolution.hpp"
#include "sdlab/hardy.hpp"
#include "sdlab/spaces.hpp"

namespace sdlab::io {

using nlohmann::json;

/// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

json to_json(const HypothesisAudit& a);
json to_json(const HardyReport& r);
json to_json(const CoercivityReport& r);
json to_json(const CarlemanReport& r);
json to_json(const ObservabilityReport& r);
/// {terminal_norm, cost, cost_ratio, cg_iters, epsilon, converged, functional}
json to_json(const ControlResult& r);
/// {max_ratio, min_ratio, s0, c1, c2, reports}
json carleman_summary(const std::vector<CarlemanReport>& scan, double s0, const CarlemanWeight& w);

void write_json(const std::filesystem::path& path, const json& j);

/// Columns with a header row; all columns must have equal length.
void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<std::span<const double>>& columns);

/// One node per line.
void write_mesh_csv(const std::filesystem::path& path, const Mesh& mesh);

/// "row col value" per stored entry (both triangles), zero-based.
void write_coo(const std::filesystem::path& path, const SymTridiagonal& a);

/// Rows (t, x, value) over all mesh nodes, eliminated nodes as 0.
void write_trajectory_csv(const std::filesystem::path& path, const DiscreteOperator& op, const TimeGrid& tg,
                          const Trajectory& traj, const std::string& value_name = "value");

/// uint64 n_steps, uint64 n_dof, then (n_steps+1) * n_dof little-endian doubles.
void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_binary(const std::filesystem::path& path, TrajectoryKind kind);

void write_carleman_csv(const std::filesystem::path& path, const std::vector<CarlemanReport>& scan);

}  // namespace sdlab::io
