#include "ffsim/tomography.hpp"

#include <doctest.h>

#include <random>

using namespace ffsim;

namespace {

DensityMatrix random_state(std::mt19937_64& rng, int dim, int rank) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = cplx(g(rng), g(rng));
  return DensityMatrix::from_unnormalized(a * a.adjoint());
}

const std::vector<TomographySetting>& suite(int dim) {
  static const auto one = single_qubit_suite();
  static const auto two = two_qubit_suite();
  return dim == 2 ? one : two;
}

}  // namespace

TEST_CASE("projectors are complete and labelled") {
  for (int dim : {2, 4}) {
    for (const auto& s : suite(dim)) {
      const auto ps = projectors_for(s);
      CHECK(static_cast<int>(ps.size()) == dim);
      Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
      for (const auto& p : ps) sum += p.op;
      CHECK((sum - Eigen::MatrixXcd::Identity(dim, dim)).norm() < 1e-12);
    }
  }
  const auto zero = projectors_for(TomographySetting{{0, 0}, StationAngles{0, 0}});
  CHECK(zero[0].label == "HH");
  CHECK(zero[3].label == "VV");
  const Eigen::Vector4cd hv = kron(PureState2::H().vector(), PureState2::V().vector());
  CHECK((zero[1].op - hv * hv.adjoint()).norm() < 1e-12);

  const auto da = projectors_for(TomographySetting{{22.5, 45.0}, std::nullopt});
  CHECK((da[0].op - PureState2::D().projector()).norm() < 1e-12);
  CHECK((da[1].op - PureState2::A().projector()).norm() < 1e-12);
  CHECK(single_qubit_suite().size() == 3);
  CHECK(two_qubit_suite().size() == 9);
}

TEST_CASE("born probabilities") {
  const auto p = probabilities_from_state(singlet(), {TomographySetting{{0, 0}, StationAngles{0, 0}}});
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == doctest::Approx(0.0));
  const auto d = probabilities_from_state(singlet(), {TomographySetting{{22.5, 45}, StationAngles{22.5, 45}}});
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[1] == doctest::Approx(0.5));
  for (double x : probabilities_from_state(DensityMatrix::maximally_mixed(4), two_qubit_suite())) {
    CHECK(x == doctest::Approx(0.25));
  }
  CHECK_THROWS_AS(probabilities_from_state(singlet(), single_qubit_suite()), std::invalid_argument);
}

TEST_CASE("sampling") {
  const std::vector<TomographySetting> one{TomographySetting{{0, 0}, StationAngles{0, 0}}};
  const auto certain = sample_counts(one, {1.0, 0.0, 0.0, 0.0}, 100, std::uint64_t{1});
  CHECK(certain[0].counts == std::vector<std::uint64_t>{100, 0, 0, 0});

  int inside = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto c = sample_counts(one, {0.5, 0.5, 0.0, 0.0}, 40000, seed);
    CHECK(c[0].total() == 40000);
    if (c[0].counts[0] >= 19400 && c[0].counts[0] <= 20600) ++inside;
  }
  CHECK(inside >= 297);

  const auto probs = probabilities_from_state(singlet(), two_qubit_suite());
  const auto a = sample_counts(two_qubit_suite(), probs, 1000, std::uint64_t{42});
  const auto b = sample_counts(two_qubit_suite(), probs, 1000, std::uint64_t{42});
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].counts == b[k].counts);

  for (auto model : {NoiseModel::multinomial, NoiseModel::poisson}) {
    const auto big = estimate_probs(sample_counts(two_qubit_suite(), probs, 1000000, std::uint64_t{7}, model));
    for (std::size_t k = 0; k < probs.size(); ++k) CHECK(std::abs(big[k] - probs[k]) < 5e-3);
  }
}

TEST_CASE("relative frequencies") {
  TomographySetting s{{0, 0}, StationAngles{0, 0}};
  CHECK(estimate_probs(CountRecord{s, {100, 100, 100, 100}})[2] == doctest::Approx(0.25));
  CHECK(estimate_probs(CountRecord{s, {40, 0, 0, 0}})[0] == 1.0);
  const auto p = estimate_probs(CountRecord{s, {19876, 20124, 0, 0}});
  CHECK(p[0] == doctest::Approx(0.49690));
  CHECK(p[1] == doctest::Approx(0.50310));
  CHECK_THROWS_AS(estimate_probs(CountRecord{s, {0, 0, 0, 0}}), std::invalid_argument);
}

TEST_CASE("exact data is reconstructed") {
  const auto d = ls_reconstruct(single_qubit_suite(),
                                probabilities_from_state(DensityMatrix::pure(PureState2::D()), single_qubit_suite()), 2);
  CHECK(trace_distance(d.rho, DensityMatrix::pure(PureState2::D())) < 1e-6);
  CHECK(d.converged);
  const auto s = ls_reconstruct(two_qubit_suite(), probabilities_from_state(singlet(), two_qubit_suite()), 4);
  CHECK(fidelity_pure(s.rho, Eigen::VectorXcd(singlet_vector())) >= 1 - 1e-6);
  CHECK_FALSE(s.ill_conditioned);
}

TEST_CASE("round trip over random pure and mixed states") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 200; ++k) {
    const int dim = k < 100 ? 2 : 4;
    const DensityMatrix rho = random_state(rng, dim, 1 + k % dim);
    const auto probs = probabilities_from_state(rho, suite(dim));
    const TomographyResult r = ls_reconstruct(suite(dim), probs, dim);
    CAPTURE(k);
    CHECK(trace_distance(r.rho, rho) < 1e-6);
    CHECK(r.residual <= ls_cost(suite(dim), probs, rho) + 1e-10);
  }
}

TEST_CASE("non-physical data still yields a physical state") {
  // Probabilities of a Hermitian unit-trace matrix with a negative eigenvalue.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m.diagonal() << 0.55, 0.3, 0.2, -0.05;
  m(0, 3) = m(3, 0) = 0.1;
  std::vector<double> probs;
  for (const auto& s : two_qubit_suite())
    for (const auto& p : projectors_for(s)) probs.push_back((p.op * m).trace().real());
  const TomographyResult r = ls_reconstruct(two_qubit_suite(), probs, 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.rho.matrix());
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK(std::abs(r.rho.matrix().trace() - cplx(1.0)) < 1e-12);
  CHECK(r.residual > 0.0);
}

TEST_CASE("incomplete measurement sets are rejected") {
  const auto repeated = two_qubit_suite_with_repeat();
  CHECK(repeated.size() == 9);
  CHECK_THROWS_AS(ls_reconstruct(repeated, probabilities_from_state(singlet(), repeated), 4),
                  NotInformationallyComplete);
  const auto full = two_qubit_suite();
  const std::vector<TomographySetting> two(full.begin(), full.begin() + 2);
  try {
    ls_reconstruct(two, probabilities_from_state(singlet(), two), 4);
    FAIL("expected an exception");
  } catch (const NotInformationallyComplete& e) {
    CHECK(std::string(e.what()).find("not informationally complete") != std::string::npos);
  }
  CHECK_THROWS_AS(ls_reconstruct(single_qubit_suite(), {0.5, 0.5}, 2), std::invalid_argument);
}

TEST_CASE("sampled singlet data reconstructs with high fidelity") {
  const auto probs = probabilities_from_state(singlet(), two_qubit_suite());
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto est = estimate_probs(sample_counts(two_qubit_suite(), probs, 40000, seed));
    const auto r = ls_reconstruct(two_qubit_suite(), est, 4);
    if (fidelity_pure(r.rho, Eigen::VectorXcd(singlet_vector())) >= 0.995) ++good;
  }
  CHECK(good >= 95);
}
