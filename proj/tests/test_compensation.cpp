#include "ffsim/compensation.hpp"

#include <doctest.h>

using namespace ffsim;

TEST_CASE("random unitaries are unitary and seeded") {
  const Unitary2 a = random_unitary(3);
  const Unitary2 b = random_unitary(3);
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
  CHECK((a.matrix() - random_unitary(4).matrix()).norm() > 1e-3);
  CHECK((a.matrix().adjoint() * a.matrix() - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
}

TEST_CASE("phase stage is an H/V phase shifter") {
  for (double t : {0.0, 10.0, 33.3, 80.0}) {
    const Eigen::Matrix2cd m = phase_stage_unitary(t).matrix();
    CHECK(std::abs(m(0, 1)) < 1e-12);
    CHECK(std::abs(m(1, 0)) < 1e-12);
    CHECK(probe_leakage(phase_stage_unitary(t), Probe::H) < 1e-24);
  }
}

TEST_CASE("golden section finds a one-parameter minimum") {
  const double x = detail::golden_section([](double v) { return (v - 0.3) * (v - 0.3); }, 0.0, 1.0, 1e-10);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-8));
  // Closed form: leakage of hwp(h) after hwp(10) is sin^2(2(h - 10)), zero at h = 10.
  const Unitary2 fiber = hwp_unitary(10.0);
  const double h = detail::golden_section(
      [&](double v) { return probe_leakage(hwp_unitary(v) * fiber, Probe::H); }, 0.0, 40.0, 1e-9);
  CHECK(h == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(probe_leakage(hwp_unitary(h) * fiber, Probe::D) < 1e-12);
}

TEST_CASE("identity fiber needs no adjustment") {
  const CompensationReport r = simulate_compensation(Unitary2::identity(), 1);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.residual == 0.0);
}

TEST_CASE("waveplate-type fiber is fixed in one pass") {
  const Unitary2 fiber = hwp_unitary(10.0);
  const CompensationReport r = simulate_compensation(fiber, 2);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(phase_distance(r.compensation * fiber, Unitary2::identity()) < 2e-2);
}

TEST_CASE("random fibers are compensated") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    CAPTURE(seed);
    const Unitary2 fiber = random_unitary(seed);
    const CompensationReport r = simulate_compensation(fiber, seed + 1);
    CHECK(r.converged);
    CHECK(r.leak_h < 1e-3);
    CHECK(r.leak_d < 1e-3);
    CHECK(r.residual == doctest::Approx(std::max(r.leak_h, r.leak_d)));
    CHECK(phase_distance(r.compensation * fiber, Unitary2::identity()) < 2e-2);
    CHECK(probe_leakage(r.compensation * fiber, Probe::H) == doctest::Approx(r.leak_h));
  }
}

TEST_CASE("unreachable tolerance reports non-convergence with the best iterate") {
  CompensationOptions opts;
  opts.tolerance = 0.0;
  opts.max_iterations = 3;
  const CompensationReport r = simulate_compensation(random_unitary(9), 9, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.residual < 1e-6);
}

TEST_CASE("compensation options are validated") {
  CompensationOptions opts;
  opts.max_iterations = 0;
  CHECK_THROWS_AS(simulate_compensation(Unitary2::identity(), 1, opts), std::invalid_argument);
  opts = {};
  opts.tolerance = -1.0;
  CHECK_THROWS_AS(simulate_compensation(Unitary2::identity(), 1, opts), std::invalid_argument);
}
