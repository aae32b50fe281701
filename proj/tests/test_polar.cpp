#include "ffsim/polar.hpp"

#include <doctest.h>

#include <random>

using namespace ffsim;

namespace {

const cplx kI{0.0, 1.0};

Eigen::Matrix2cd mat(cplx a, cplx b, cplx c, cplx d) {
  Eigen::Matrix2cd m;
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("waveplate matrices at reference angles") {
  CHECK(equal_up_to_phase(hwp_unitary(0.0), pauli_z(), 1e-12));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(equal_up_to_phase(hwp_unitary(22.5), Unitary2(mat(s, s, s, -s)), 1e-12));
  CHECK(equal_up_to_phase(hwp_unitary(45.0), pauli_x(), 1e-12));
  // Retardance sign of the quarter-wave plate.
  CHECK(equal_up_to_phase(qwp_unitary(0.0), Unitary2(mat(1.0, 0.0, 0.0, -kI)), 1e-12));
  CHECK(equal_up_to_phase(qwp_unitary(45.0) * PureState2::H(), PureState2::normalized(1.0, kI), 1e-12));
}

TEST_CASE("waveplate algebra holds at every angle") {
  for (double t = -180.0; t <= 180.0; t += 7.3) {
    CAPTURE(t);
    CHECK(equal_up_to_phase(hwp_unitary(t) * hwp_unitary(t), Unitary2::identity(), 1e-12));
    CHECK(equal_up_to_phase(qwp_unitary(t) * qwp_unitary(t), hwp_unitary(t), 1e-12));
    CHECK(equal_up_to_phase(hwp_unitary(t + 180.0), hwp_unitary(t), 1e-12));
    CHECK(equal_up_to_phase(qwp_unitary(t + 180.0), qwp_unitary(t), 1e-12));
  }
}

TEST_CASE("correction products from three waveplates") {
  CHECK(phase_distance(qwp_unitary(90) * hwp_unitary(45) * qwp_unitary(0), i_sigma_y()) < 1e-12);
  CHECK(phase_distance(qwp_unitary(90) * hwp_unitary(0) * qwp_unitary(0), pauli_z()) < 1e-12);
}

TEST_CASE("angle normalization") {
  CHECK(normalize_angle_deg(-22.5) == doctest::Approx(157.5));
  CHECK(normalize_angle_deg(180.0) == doctest::Approx(0.0));
  CHECK(normalize_angle_deg(112.5) == doctest::Approx(112.5));
  CHECK(WaveplateSetting::make(PlateKind::hwp, 202.5).angle_deg == doctest::Approx(22.5));
}

TEST_CASE("pure state construction and gauge") {
  CHECK_THROWS_AS(PureState2(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PureState2::normalized(0.0, 0.0), std::invalid_argument);
  const PureState2 d = PureState2::D();
  CHECK(std::abs(d.amp_h() - 1.0 / std::sqrt(2.0)) < 1e-15);

  const PureState2 shifted = PureState2::normalized(std::polar(1.0, 1.1), std::polar(1.0, 2.0));
  const PureState2 c = shifted.canonical();
  CHECK(c.amp_h().imag() == doctest::Approx(0.0));
  CHECK(c.amp_h().real() > 0.0);
  CHECK(equal_up_to_phase(c, shifted));

  CHECK(PureState2::V().canonical().amp_v().real() == doctest::Approx(1.0));
  CHECK(std::abs(PureState2::L().orthogonal().vector().dot(PureState2::L().vector())) < 1e-15);
  CHECK(equal_up_to_phase(PureState2::from_bloch(kPi / 2, kPi / 2), PureState2::L()));
  CHECK(equal_up_to_phase(PureState2::from_bloch(kPi, 0.3), PureState2::V()));
}

TEST_CASE("global phase is invisible") {
  const Unitary2 u = qwp_unitary(17.0) * hwp_unitary(33.0);
  const Unitary2 v(std::polar(1.0, 0.77) * u.matrix());
  CHECK(equal_up_to_phase(u, v));
  CHECK(phase_distance(u, v) < 1e-7);
  CHECK_FALSE(equal_up_to_phase(u, hwp_unitary(33.0)));
  CHECK_THROWS_AS(Unitary2(mat(1.0, 1.0, 0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix(Eigen::MatrixXcd::Identity(3, 3) / 3.0), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix(Eigen::MatrixXcd::Identity(2, 2)), std::invalid_argument);
  Eigen::MatrixXcd neg(2, 2);
  neg << 1.1, 0.0, 0.0, -0.1;
  CHECK_THROWS_AS(DensityMatrix{neg}, std::invalid_argument);
  Eigen::MatrixXcd nonherm(2, 2);
  nonherm << 0.5, 0.1, 0.0, 0.5;
  CHECK_THROWS_AS(DensityMatrix{nonherm}, std::invalid_argument);
  CHECK(purity(DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.25));
}

TEST_CASE("singlet metrics") {
  const DensityMatrix s = singlet();
  CHECK(purity(s) == doctest::Approx(1.0));
  CHECK(fidelity_pure(s, Eigen::VectorXcd(singlet_vector())) == doctest::Approx(1.0));
  const DensityMatrix red = reduced_state(s, Arm::signal);
  CHECK((red.matrix() - Eigen::MatrixXcd::Identity(2, 2) / 2.0).norm() < 1e-15);
  CHECK(trace_distance(s, DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.75));
  CHECK_THROWS_AS(fidelity_pure(s, PureState2::H()), std::invalid_argument);
  // Invariant under U (x) U.
  const Eigen::Matrix2cd u = (qwp_unitary(12.0) * hwp_unitary(71.0)).matrix();
  CHECK(fidelity(s.conjugated(kron(u, u)), s) == doctest::Approx(1.0));
}

TEST_CASE("projection of the singlet gives the orthogonal state") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  for (int k = 0; k < 50; ++k) {
    const PureState2 p = PureState2::from_bloch(angle(rng) / 2, angle(rng));
    for (Arm arm : {Arm::signal, Arm::idler}) {
      const Projection a = project_arm(singlet(), arm, p);
      const Projection b = project_arm(singlet(), arm, p.orthogonal());
      CHECK(a.probability + b.probability == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a.probability == doctest::Approx(0.5));
      REQUIRE_FALSE(a.impossible());
      CHECK(fidelity_pure(*a.conditional, p.orthogonal()) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("projection onto a zero-probability outcome is impossible") {
  const DensityMatrix hv = DensityMatrix::pure(Eigen::VectorXcd(kron(PureState2::H().vector(), PureState2::V().vector())));
  const Projection p = project_arm(hv, Arm::idler, PureState2::H());
  CHECK(p.impossible());
  CHECK(p.probability < kImpossibleProbability);
  const Projection q = project_arm(hv, Arm::idler, PureState2::V());
  REQUIRE_FALSE(q.impossible());
  CHECK(fidelity_pure(*q.conditional, PureState2::H()) == doctest::Approx(1.0));
}

TEST_CASE("projection probabilities are phase invariant") {
  const DensityMatrix rho = singlet().conjugated(on_arm(hwp_unitary(10.0).matrix(), Arm::signal));
  const PureState2 p = PureState2::from_bloch(0.7, 1.9);
  const PureState2 q = PureState2::from_vector(std::polar(1.0, 2.4) * p.vector());
  CHECK(project_arm(rho, Arm::idler, p).probability ==
        doctest::Approx(project_arm(rho, Arm::idler, q).probability).epsilon(1e-14));
}

TEST_CASE("enum parsing") {
  CHECK(parse_plane("equatorial") == Plane::equatorial);
  CHECK(parse_arm("idler") == Arm::idler);
  CHECK_THROWS_AS(parse_plane("polar"), std::invalid_argument);
}
