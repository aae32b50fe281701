// Measurement-and-feed-forward protocol engine: projective-measurement
// station, two-switch routing with crosstalk, correction unitaries, remote
// state preparation, and the timing / loss / rate budgets of the link.

#pragma once

#include "ffsim/polar.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ffsim {

/// Waveplates in front of the projective-measurement PBS. The idler passes
/// the QWP (if present) first, then the HWP.
struct PmSetting {
  double hwp_angle_deg = 0.0;
  bool qwp_present = false;
  double qwp_angle_deg = 45.0;

  static PmSetting meridian(double hwp_deg) { return {normalize_angle_deg(hwp_deg), false, 45.0}; }
  static PmSetting equatorial(double hwp_deg) { return {normalize_angle_deg(hwp_deg), true, 45.0}; }

  /// Jones matrix from the idler input to the PBS.
  Unitary2 station_unitary() const;
};

struct SwitchModel {
  double isolation_db = 20.0;
  double insertion_loss_db = 1.3;
  double response_time_ns = 60.0;
  double max_duty_cycle_hz = 1.0e6;

  double leak_probability() const;
  void validate() const;
};

struct TimingBudget {
  double detector_to_ttm_ns = 160.0;
  double ttm_processing_ns = 300.0;
  double signal_propagation_ns = 100.0;
  double delay_fiber_m = 162.0;
  double fiber_index = 1.468;
  double gate_duration_ns = 700.0;
  double detector_deadtime_ns = 50.0;

  void validate() const;
};

/// Idler state transmitted by the PBS: (station unitary)^dagger |H>.
PureState2 pm_projector(const PmSetting& setting);

/// Feed-forward correction for the plane: i sigma_y (meridian) or sigma_z
/// (equatorial).
Unitary2 correction_unitary(Plane plane);

/// Waveplate angles {QWP, HWP, QWP} of the U_B bench; the realized operator
/// is qwp(a[0]) * hwp(a[1]) * qwp(a[2]).
std::array<double, 3> correction_angles(Plane plane);

/// The waveplate product realizing the correction. `offset_deg` is a
/// calibration error added with alternating sign (+, -, +) to the three
/// angles; a common offset on all three plates would only conjugate the stack
/// by a rotation, which leaves i sigma_y invariant.
Unitary2 correction_stack(Plane plane, double offset_deg = 0.0);

enum class Herald { transmitted, reflected };

struct HeraldBranch {
  Herald herald;
  double probability = 0.0;
  std::optional<DensityMatrix> state;  // empty: impossible outcome
};

struct RspOutcome {
  PureState2 target;
  std::array<HeraldBranch, 2> branches;  // transmitted, reflected
  DensityMatrix unconditional;

  const HeraldBranch& branch(Herald h) const { return branches[h == Herald::transmitted ? 0 : 1]; }
};

struct RspOptions {
  Plane plane = Plane::meridian;
  bool feedforward = true;
  SwitchModel switch_model{};
  // Overrides switch_model.leak_probability() when set.
  std::optional<double> leak_probability;
  Unitary2 u_a = Unitary2::identity();
  std::optional<Unitary2> u_b;  // defaults to correction_unitary(plane)
  // Miscalibration of the U_B waveplates, degrees.
  std::optional<double> miscalibration_deg;

  Unitary2 effective_u_b() const;
  double leak() const;
};

/// Runs one remote-state-preparation configuration on a two-qubit state.
///
/// Transmission at the PM PBS projects the idler onto pm_projector(setting)
/// and fires both switches into the cross state (U_B path); reflection leaves
/// them in the bar state (U_A). With feed-forward off the bar state is used
/// for both outcomes. Crosstalk sends the photon down the other path with the
/// leak probability, mixed incoherently.
RspOutcome run_rsp(const DensityMatrix& rho4, const PmSetting& setting, const RspOptions& opts);

struct TimingReport {
  double latency_ns = 0.0;
  double photon_delay_ns = 0.0;
  double slack_ns = 0.0;
  double switch_settled_ns = 0.0;  // latency + switch response
  double gate_closes_ns = 0.0;     // latency + gate duration
  bool arrival_within_gate = false;
  bool feasible = false;
  double max_herald_rate_hz = 0.0;
};

inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

TimingReport timing_report(const TimingBudget& budget, const SwitchModel& sw = {});

struct LossComponent {
  std::string name;
  double loss_db = 0.0;
};

/// The link losses quoted for the setup: two switches and one u-bench.
std::vector<LossComponent> default_loss_components();
double loss_budget(const std::vector<LossComponent>& components);
double db_to_transmission(double loss_db);
double transmission_to_db(double transmission);

struct RateEstimate {
  double singles_signal_hz = 0.0;
  double singles_idler_hz = 0.0;
  double coincidence_hz = 0.0;
};

/// Multiplicative rate model: singles = pair rate x arm transmission,
/// coincidences = pair rate x both transmissions; each figure is capped at
/// the herald-rate limit of the budget.
RateEstimate rate_estimate(const TimingBudget& budget, const SwitchModel& sw, double pair_rate_hz,
                           double transmission_signal, double transmission_idler);

}  // namespace ffsim
