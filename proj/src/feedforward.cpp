#include "ffsim/feedforward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ffsim {

Unitary2 PmSetting::station_unitary() const {
  const Unitary2 hwp = hwp_unitary(hwp_angle_deg);
  return qwp_present ? hwp * qwp_unitary(qwp_angle_deg) : hwp;
}

double SwitchModel::leak_probability() const { return std::pow(10.0, -isolation_db / 10.0); }

void SwitchModel::validate() const {
  if (!(isolation_db > 0.0)) throw std::invalid_argument("switch: isolation_db must be > 0");
  if (!(insertion_loss_db >= 0.0)) throw std::invalid_argument("switch: insertion_loss_db must be >= 0");
  if (!(response_time_ns >= 0.0)) throw std::invalid_argument("switch: response_time_ns must be >= 0");
  if (!(max_duty_cycle_hz > 0.0)) throw std::invalid_argument("switch: max_duty_cycle_hz must be > 0");
}

void TimingBudget::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"detector_to_ttm_ns", detector_to_ttm_ns}, {"ttm_processing_ns", ttm_processing_ns},
      {"signal_propagation_ns", signal_propagation_ns}, {"delay_fiber_m", delay_fiber_m},
      {"fiber_index", fiber_index}, {"gate_duration_ns", gate_duration_ns},
      {"detector_deadtime_ns", detector_deadtime_ns}};
  for (const auto& [name, value] : fields) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string("timing: ") + name + " must be finite and >= 0");
    }
  }
}

PureState2 pm_projector(const PmSetting& setting) {
  return setting.station_unitary().adjoint() * PureState2::H();
}

Unitary2 correction_unitary(Plane plane) {
  return plane == Plane::meridian ? i_sigma_y() : pauli_z();
}

std::array<double, 3> correction_angles(Plane plane) {
  return plane == Plane::meridian ? std::array<double, 3>{90.0, 45.0, 0.0}
                                  : std::array<double, 3>{90.0, 0.0, 0.0};
}

Unitary2 correction_stack(Plane plane, double offset_deg) {
  const auto a = correction_angles(plane);
  return qwp_unitary(a[0] + offset_deg) * hwp_unitary(a[1] - offset_deg) *
         qwp_unitary(a[2] + offset_deg);
}

Unitary2 RspOptions::effective_u_b() const {
  Unitary2 u = u_b.value_or(correction_unitary(plane));
  if (miscalibration_deg && *miscalibration_deg != 0.0) {
    const Unitary2 error = correction_stack(plane, 0.0).adjoint() * correction_stack(plane, *miscalibration_deg);
    u = u * error;
  }
  return u;
}

double RspOptions::leak() const {
  const double p = leak_probability.value_or(switch_model.leak_probability());
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("leak probability must lie in [0, 1)");
  return p;
}

namespace {

Eigen::MatrixXcd route(const DensityMatrix& in, const Unitary2& intended, const Unitary2& wrong,
                       double leak) {
  const Eigen::Matrix2cd& ui = intended.matrix();
  const Eigen::Matrix2cd& uw = wrong.matrix();
  return (1.0 - leak) * ui * in.matrix() * ui.adjoint() + leak * uw * in.matrix() * uw.adjoint();
}

}  // namespace

RspOutcome run_rsp(const DensityMatrix& rho4, const PmSetting& setting, const RspOptions& opts) {
  if (rho4.dim() != 4) throw std::invalid_argument("run_rsp: requires a two-qubit state");
  const PureState2 target = pm_projector(setting);
  const double leak = opts.leak();
  const Unitary2 u_b = opts.effective_u_b();

  const Projection transmitted = project_arm(rho4, Arm::idler, target);
  const Projection reflected = project_arm(rho4, Arm::idler, target.orthogonal());

  std::array<HeraldBranch, 2> branches{HeraldBranch{Herald::transmitted, transmitted.probability, {}},
                                       HeraldBranch{Herald::reflected, reflected.probability, {}}};
  Eigen::MatrixXcd mixture = Eigen::MatrixXcd::Zero(2, 2);
  const Projection* projections[2] = {&transmitted, &reflected};
  for (int k = 0; k < 2; ++k) {
    const Projection& proj = *projections[k];
    if (proj.impossible()) continue;
    const bool cross = opts.feedforward && k == 0;
    const Eigen::MatrixXcd out = cross ? route(*proj.conditional, u_b, opts.u_a, leak)
                                       : route(*proj.conditional, opts.u_a, u_b, leak);
    branches[k].state = DensityMatrix::from_unnormalized(out);
    mixture += proj.probability * branches[k].state->matrix();
  }
  return RspOutcome{target, branches, DensityMatrix::from_unnormalized(mixture)};
}

TimingReport timing_report(const TimingBudget& budget, const SwitchModel& sw) {
  budget.validate();
  sw.validate();
  TimingReport r;
  r.latency_ns = budget.detector_to_ttm_ns + budget.ttm_processing_ns + budget.signal_propagation_ns;
  r.photon_delay_ns = budget.delay_fiber_m * budget.fiber_index / kSpeedOfLightMPerNs;
  r.slack_ns = r.photon_delay_ns - r.latency_ns;
  r.switch_settled_ns = r.latency_ns + sw.response_time_ns;
  r.gate_closes_ns = r.latency_ns + budget.gate_duration_ns;
  r.arrival_within_gate = r.photon_delay_ns >= r.switch_settled_ns && r.photon_delay_ns <= r.gate_closes_ns;
  // Feasible when the switches have settled before the photon arrives and
  // the cross state outlasts the switching transient. The upper gate edge is
  // reported separately so feasibility stays monotone in the delay length.
  r.feasible = r.switch_settled_ns <= r.photon_delay_ns && budget.gate_duration_ns > sw.response_time_ns;

  const double inf = std::numeric_limits<double>::infinity();
  const double gate_cap = budget.gate_duration_ns > 0.0 ? 1e9 / budget.gate_duration_ns : inf;
  const double dead_cap = budget.detector_deadtime_ns > 0.0 ? 1e9 / budget.detector_deadtime_ns : inf;
  r.max_herald_rate_hz = std::min({sw.max_duty_cycle_hz, gate_cap, dead_cap});
  return r;
}

std::vector<LossComponent> default_loss_components() {
  return {{"switch", 1.3}, {"switch", 1.3}, {"u-bench", 0.7}};
}

double loss_budget(const std::vector<LossComponent>& components) {
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.loss_db >= 0.0)) {
      throw std::invalid_argument("loss_budget: component '" + c.name + "' has negative loss");
    }
    total += c.loss_db;
  }
  return total;
}

double db_to_transmission(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

double transmission_to_db(double transmission) {
  if (!(transmission > 0.0)) throw std::invalid_argument("transmission_to_db: transmission must be > 0");
  return -10.0 * std::log10(transmission);
}

RateEstimate rate_estimate(const TimingBudget& budget, const SwitchModel& sw, double pair_rate_hz,
                           double transmission_signal, double transmission_idler) {
  if (!(pair_rate_hz >= 0.0)) throw std::invalid_argument("rate_estimate: pair rate must be >= 0");
  for (double t : {transmission_signal, transmission_idler}) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("rate_estimate: transmissions must lie in [0, 1]");
  }
  const double cap = timing_report(budget, sw).max_herald_rate_hz;
  RateEstimate r;
  r.singles_signal_hz = std::min(cap, pair_rate_hz * transmission_signal);
  r.singles_idler_hz = std::min(cap, pair_rate_hz * transmission_idler);
  r.coincidence_hz = std::min(cap, pair_rate_hz * transmission_signal * transmission_idler);
  return r;
}

}  // namespace ffsim
