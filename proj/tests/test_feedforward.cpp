#include "ffsim/feedforward.hpp"
#include "ffsim/source.hpp"

#include <doctest.h>

using namespace ffsim;

namespace {

RspOptions no_leak(Plane plane, bool feedforward = true) {
  RspOptions o;
  o.plane = plane;
  o.feedforward = feedforward;
  o.leak_probability = 0.0;
  return o;
}

}  // namespace

TEST_CASE("meridian projector: theta = 4 t") {
  CHECK(equal_up_to_phase(pm_projector(PmSetting::meridian(0.0)), PureState2::H()));
  CHECK(equal_up_to_phase(pm_projector(PmSetting::meridian(22.5)), PureState2::D()));
  for (double t = 0.0; t <= 90.0; t += 1.25) {
    CAPTURE(t);
    CHECK(equal_up_to_phase(pm_projector(PmSetting::meridian(t)), PureState2::from_bloch(deg_to_rad(4 * t), 0.0)));
    CHECK(equal_up_to_phase(hwp_unitary(t) * PureState2::H(),
                            PureState2(std::cos(deg_to_rad(2 * t)), std::sin(deg_to_rad(2 * t)))));
  }
}

TEST_CASE("equatorial projector: phi = 4 (t - 22.5)") {
  CHECK(equal_up_to_phase(pm_projector(PmSetting::equatorial(45.0)), PureState2::L()));
  for (double t = 0.0; t <= 180.0; t += 1.25) {
    CAPTURE(t);
    CHECK(equal_up_to_phase(pm_projector(PmSetting::equatorial(t)),
                            PureState2::from_bloch(kPi / 2, deg_to_rad(4 * (t - 22.5)))));
  }
}

TEST_CASE("correction unitaries match the waveplate stacks") {
  CHECK(equal_up_to_phase(correction_unitary(Plane::meridian), i_sigma_y(), 1e-12));
  CHECK(equal_up_to_phase(correction_unitary(Plane::equatorial), pauli_z(), 1e-12));
  CHECK(equal_up_to_phase(pauli_z(), Unitary2(-pauli_z().matrix()), 1e-12));
  CHECK_FALSE(equal_up_to_phase(pauli_z(), pauli_x()));
  for (Plane p : {Plane::meridian, Plane::equatorial}) {
    CHECK(phase_distance(correction_stack(p), correction_unitary(p)) < 1e-12);
    CHECK(phase_distance(correction_stack(p, 0.5), correction_unitary(p)) > 1e-3);
  }
  // i sigma_y (cos|V> - sin|H>) = cos|H> + sin|V>.
  const double th = 0.8;
  const PureState2 collapsed(-std::sin(th / 2), std::cos(th / 2));
  CHECK(equal_up_to_phase(i_sigma_y() * collapsed, PureState2(std::cos(th / 2), std::sin(th / 2))));
}

TEST_CASE("equatorial collapse corrected by sigma_z (explicit projection)") {
  for (double phi : {0.3, 1.7, 4.0}) {
    const PureState2 psi = PureState2::from_bloch(kPi / 2, phi);
    const Projection p = project_arm(singlet(), Arm::idler, psi);
    REQUIRE_FALSE(p.impossible());
    const Eigen::Matrix2cd out = pauli_z().matrix() * p.conditional->matrix() * pauli_z().matrix();
    CHECK(std::abs(psi.vector().dot(out * psi.vector()) - 1.0) < 1e-12);
  }
}

TEST_CASE("remote preparation is exact for the ideal singlet") {
  for (Plane plane : {Plane::meridian, Plane::equatorial}) {
    for (double t = 0.0; t < 180.0; t += 3.7) {
      const PmSetting s = plane == Plane::meridian ? PmSetting::meridian(t) : PmSetting::equatorial(t);
      const RspOutcome out = run_rsp(singlet(), s, no_leak(plane));
      for (const auto& b : out.branches) {
        CHECK(b.probability == doctest::Approx(0.5).epsilon(1e-12));
        REQUIRE(b.state.has_value());
        CHECK(std::abs(fidelity_pure(*b.state, out.target) - 1.0) < 1e-10);
      }
      CHECK(std::abs(fidelity_pure(out.unconditional, out.target) - 1.0) < 1e-10);
      CHECK(out.branches[0].probability + out.branches[1].probability == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("without feed-forward the output is maximally mixed") {
  for (Plane plane : {Plane::meridian, Plane::equatorial}) {
    for (double t : {0.0, 11.0, 22.5, 60.0}) {
      const PmSetting s = plane == Plane::meridian ? PmSetting::meridian(t) : PmSetting::equatorial(t);
      RspOptions o;
      o.plane = plane;
      o.feedforward = false;
      const RspOutcome out = run_rsp(singlet(), s, o);
      CHECK((out.unconditional.matrix() - Eigen::MatrixXcd::Identity(2, 2) / 2.0).norm() < 1e-12);
      CHECK(fidelity_pure(out.unconditional, out.target) == doctest::Approx(0.5));
    }
  }
}

TEST_CASE("unconditional state is the weighted mixture of branches") {
  const DensityMatrix rho = apply_pdl(apply_birefringence(dephase_singlet(0.8), 0.4, Arm::signal), 0.05, Arm::signal);
  for (bool ff : {true, false}) {
    RspOptions o;
    o.plane = Plane::equatorial;
    o.feedforward = ff;
    o.miscalibration_deg = 0.5;
    const RspOutcome out = run_rsp(rho, PmSetting::equatorial(31.0), o);
    Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(2, 2);
    for (const auto& b : out.branches) mix += b.probability * b.state->matrix();
    CHECK((mix - out.unconditional.matrix()).norm() < 1e-10);
    CHECK(out.branch(Herald::transmitted).probability + out.branch(Herald::reflected).probability ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("crosstalk oracle at hwp 22.5 deg") {
  // Hand mixture: transmitted branch holds Psi' = Psi_perp, routed to U_B with
  // 1-p and left alone with p; reflected branch holds Psi, left alone with
  // 1-p and sent through U_B with p.
  SwitchModel sw;
  sw.isolation_db = 20.0;
  const double p = sw.leak_probability();
  CHECK(p == doctest::Approx(0.01));
  for (Plane plane : {Plane::meridian, Plane::equatorial}) {
    const PmSetting s = plane == Plane::meridian ? PmSetting::meridian(22.5) : PmSetting::equatorial(22.5);
    const PureState2 psi = PureState2::D();
    const PureState2 perp = psi.orthogonal();
    const Eigen::Matrix2cd ub = correction_unitary(plane).matrix();
    const double wrong_t = std::norm(psi.vector().dot(perp.vector()));
    const double wrong_r = std::norm(psi.vector().dot(ub * psi.vector()));
    const double expected = 0.5 * ((1 - p) + p * wrong_t) + 0.5 * ((1 - p) + p * wrong_r);
    RspOptions o;
    o.plane = plane;
    o.switch_model = sw;
    const RspOutcome out = run_rsp(singlet(), s, o);
    CHECK(equal_up_to_phase(out.target, psi));
    CHECK(fidelity_pure(out.unconditional, out.target) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(1 - p));
  }
}

TEST_CASE("impossible herald outcome is tagged") {
  // Signal V, idler H: the idler is never reflected at hwp = 0.
  const Eigen::Vector4cd vh = kron(PureState2::V().vector(), PureState2::H().vector());
  const RspOutcome out =
      run_rsp(DensityMatrix::pure(Eigen::VectorXcd(vh)), PmSetting::meridian(0.0), no_leak(Plane::meridian));
  CHECK_FALSE(out.branch(Herald::reflected).state.has_value());
  CHECK(out.branch(Herald::transmitted).probability == doctest::Approx(1.0));
  CHECK(fidelity_pure(out.unconditional, PureState2::H()) == doctest::Approx(1.0));
}

TEST_CASE("miscalibrated correction lowers fidelity slightly") {
  RspOptions o = no_leak(Plane::meridian);
  o.miscalibration_deg = 0.5;
  const RspOutcome out = run_rsp(singlet(), PmSetting::meridian(10.0), o);
  const double f = fidelity_pure(out.unconditional, out.target);
  CHECK(f < 1.0 - 1e-6);
  CHECK(f > 0.99);
  o.miscalibration_deg = 0.0;
  CHECK(std::abs(fidelity_pure(run_rsp(singlet(), PmSetting::meridian(10.0), o).unconditional, out.target) - 1) < 1e-10);
}

TEST_CASE("timing budget") {
  const TimingReport r = timing_report(TimingBudget{});
  CHECK(r.latency_ns == doctest::Approx(560.0));
  CHECK(r.photon_delay_ns == doctest::Approx(162.0 * 1.468 / 0.299792458));
  CHECK(r.photon_delay_ns > 780.0);
  CHECK(r.photon_delay_ns < 820.0);
  CHECK(r.slack_ns == doctest::Approx(233.27).epsilon(1e-4));
  CHECK(r.feasible);
  CHECK(r.arrival_within_gate);
  CHECK(r.max_herald_rate_hz == doctest::Approx(1e6));

  TimingBudget short_fiber;
  short_fiber.delay_fiber_m = 100.0;
  const TimingReport s = timing_report(short_fiber);
  CHECK(s.photon_delay_ns == doctest::Approx(489.67).epsilon(1e-4));
  CHECK_FALSE(s.feasible);

  TimingBudget bad;
  bad.gate_duration_ns = -1.0;
  CHECK_THROWS_AS(timing_report(bad), std::invalid_argument);
}

TEST_CASE("feasibility is monotone in the delay length") {
  bool seen = false;
  for (double m = 0.0; m <= 1000.0; m += 0.5) {
    TimingBudget b;
    b.delay_fiber_m = m;
    const bool f = timing_report(b).feasible;
    CHECK_FALSE((seen && !f));
    seen = seen || f;
  }
  CHECK(seen);
}

TEST_CASE("herald rate cap takes the tightest limit") {
  TimingBudget b;
  b.gate_duration_ns = 2000.0;
  CHECK(timing_report(b).max_herald_rate_hz == doctest::Approx(5e5));
  b.gate_duration_ns = 700.0;
  b.detector_deadtime_ns = 4000.0;
  CHECK(timing_report(b).max_herald_rate_hz == doctest::Approx(2.5e5));
}

TEST_CASE("loss budget") {
  CHECK(loss_budget(default_loss_components()) == doctest::Approx(3.3));
  CHECK(std::abs(loss_budget(default_loss_components()) - 3.0) <= 0.5);
  CHECK(loss_budget({}) == 0.0);
  CHECK(db_to_transmission(3.0) == doctest::Approx(0.501).epsilon(1e-3));
  CHECK(transmission_to_db(db_to_transmission(4.2)) == doctest::Approx(4.2));
  CHECK_THROWS_AS(loss_budget({{"bad", -0.1}}), std::invalid_argument);
}

TEST_CASE("rate estimate") {
  const TimingBudget b;
  const SwitchModel sw;
  const RateEstimate unit = rate_estimate(b, sw, 17000.0, 1.0, 1.0);
  CHECK(unit.coincidence_hz == doctest::Approx(17000.0));
  const RateEstimate capped = rate_estimate(b, sw, 5e6, 1.0, 1.0);
  CHECK(capped.coincidence_hz == doctest::Approx(1e6));
  CHECK(capped.singles_signal_hz == doctest::Approx(1e6));
  // 3 dB signal arm, PM-station coupling of 0.4 on the idler.
  const RateEstimate lab = rate_estimate(b, sw, 17000.0, db_to_transmission(3.0), 0.4);
  CHECK(lab.coincidence_hz >= 1500.0);
  CHECK(lab.coincidence_hz <= 4500.0);
  CHECK_THROWS_AS(rate_estimate(b, sw, 1.0, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("switch validation") {
  SwitchModel sw;
  sw.isolation_db = 0.0;
  CHECK_THROWS_AS(sw.validate(), std::invalid_argument);
  RspOptions o;
  o.leak_probability = 1.0;
  CHECK_THROWS_AS(o.leak(), std::invalid_argument);
}
