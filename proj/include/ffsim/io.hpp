// File formats: density-matrix / state JSON, count CSV, sweep CSV + JSON
// sidecar, timing and loss tables.

#pragma once

#include "ffsim/config.hpp"
#include "ffsim/feedforward.hpp"
#include "ffsim/montecarlo.hpp"
#include "ffsim/tomography.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ffsim {

/// {"dim": n, "entries": [[[re, im], ...], ...]} with row-major entries.
nlohmann::json to_json(const DensityMatrix& rho);
/// Inverse of to_json; throws InputError on malformed or unphysical input.
DensityMatrix density_from_json(const nlohmann::json& j);

/// {"h": [re, im], "v": [re, im]} in the canonical phase gauge.
nlohmann::json to_json(const PureState2& state);
PureState2 state_from_json(const nlohmann::json& j);

/// Fixed six-decimal rendering used by every text output.
std::string format_fixed(double x);

inline constexpr const char* kCountsHeader =
    "setting_id,arm,hwp_deg,qwp_deg,idler_hwp_deg,idler_qwp_deg,c_hh,c_hv,c_vh,c_vv";

/// One row per record. Two-qubit rows carry arm "both"; single-qubit rows
/// carry `single_arm`, leave the idler columns and c_vh, c_vv empty, and put
/// c_h, c_v in c_hh, c_hv.
void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records,
                      Arm single_arm = Arm::signal);

struct CountsFile {
  std::vector<CountRecord> records;
  int dim = 2;  // 2 or 4, uniform across the file
};

/// Throws InputError naming the line on any format violation, mixed
/// dimensions or an empty file.
CountsFile read_counts_csv(std::istream& in, const std::string& origin = "<counts>");
CountsFile read_counts_csv(const std::filesystem::path& path);

/// "bloch_angle_deg,fid_mean,fid_sigma,purity_mean", six decimals.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
/// Sidecar: sweep settings plus per-point target, reconstructed and simulated
/// density matrices.
nlohmann::json sweep_to_json(const SweepResult& result, const SweepSpec& spec);
/// "sweep_<plane>_ff<on|off>" (without extension).
std::string sweep_file_stem(Plane plane, bool feedforward);

nlohmann::json tomography_to_json(const TomographyResult& result);

std::string format_timing_table(const TimingBudget& budget, const TimingReport& report);
std::string format_loss_table(const std::vector<LossComponent>& losses);
nlohmann::json timing_to_json(const TimingBudget& budget, const TimingReport& report,
                              const std::vector<LossComponent>& losses);

/// Writes to a temporary sibling and renames it over `path`. Throws
/// std::runtime_error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ffsim
