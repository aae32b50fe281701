#include "ffsim/compensation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ffsim {

Unitary2 random_unitary(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // QR of a complex Ginibre matrix with the R-diagonal phases fixed.
  Eigen::Matrix2cd z;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) z(r, c) = cplx(gauss(rng), gauss(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
  Eigen::Matrix2cd q = qr.householderQ();
  const Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < 2; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  // Re-orthonormalize to construction precision.
  Eigen::HouseholderQR<Eigen::Matrix2cd> clean(q);
  Eigen::Matrix2cd qq = clean.householderQ();
  const Eigen::Matrix2cd rr = clean.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < 2; ++k) qq.col(k) *= rr(k, k) / std::abs(rr(k, k));
  return Unitary2(qq);
}

double probe_leakage(const Unitary2& total, Probe probe) {
  const PureState2 in = probe == Probe::H ? PureState2::H() : PureState2::D();
  const PureState2 wrong = probe == Probe::H ? PureState2::V() : PureState2::A();
  return std::norm(wrong.vector().dot(total.matrix() * in.vector()));
}

Unitary2 paddle_unitary(double qwp_deg, double hwp_deg) {
  return hwp_unitary(hwp_deg) * qwp_unitary(qwp_deg);
}

Unitary2 phase_stage_unitary(double hwp_deg) {
  return qwp_unitary(135.0) * hwp_unitary(hwp_deg) * hwp_unitary(0.0) * qwp_unitary(45.0);
}

namespace detail {

double golden_section(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

double minimize_periodic(const std::function<double(double)>& f, double period, int grid,
                         double start_offset) {
  if (grid < 3) throw std::invalid_argument("minimize_periodic: grid must have >= 3 points");
  const double step = period / grid;
  double best_x = start_offset;
  double best_f = f(best_x);
  for (int k = 1; k < grid; ++k) {
    const double x = start_offset + k * step;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double refined = golden_section(f, best_x - step, best_x + step, 1e-11);
  return f(refined) < best_f ? refined : best_x;
}

}  // namespace detail

CompensationReport simulate_compensation(const Unitary2& fiber, std::uint64_t rng_seed,
                                         const CompensationOptions& opts) {
  if (!(opts.tolerance >= 0.0)) throw std::invalid_argument("compensation: tolerance must be >= 0");
  if (opts.max_iterations < 1) throw std::invalid_argument("compensation: max_iterations must be >= 1");

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kGrid = 24;

  CompensationReport report;
  auto evaluate = [&](const Unitary2& comp) {
    const Unitary2 total = comp * fiber;
    return std::pair{probe_leakage(total, Probe::H), probe_leakage(total, Probe::D)};
  };

  // Nothing inserted yet: the fiber may already be the identity.
  {
    const auto [lh, ld] = evaluate(Unitary2::identity());
    report.leak_h = lh;
    report.leak_d = ld;
    report.residual = std::max(lh, ld);
    if (report.residual < opts.tolerance) {
      report.converged = true;
      return report;
    }
  }

  CompensationReport best = report;
  double qwp = 0.0, hwp = 0.0, phase = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // H/V pass: paddles. The phase stage is diagonal and cannot change the
    // |H>-probe leakage, so it is left out of this objective.
    auto leak_h_given = [&](double q, double h) {
      return probe_leakage(paddle_unitary(q, h) * fiber, Probe::H);
    };
    const double hwp_offset = unit(rng) * 90.0 / kGrid;
    auto inner = [&](double q) {
      return detail::minimize_periodic([&](double h) { return leak_h_given(q, h); }, 90.0, kGrid,
                                       hwp_offset);
    };
    qwp = detail::minimize_periodic([&](double q) { return leak_h_given(q, inner(q)); }, 180.0,
                                    kGrid, unit(rng) * 180.0 / kGrid);
    hwp = inner(qwp);
    const Unitary2 paddle = paddle_unitary(qwp, hwp);

    // D/A pass: phase stage after the paddles.
    phase = detail::minimize_periodic(
        [&](double t) { return probe_leakage(phase_stage_unitary(t) * paddle * fiber, Probe::D); },
        90.0, kGrid, unit(rng) * 90.0 / kGrid);

    const Unitary2 comp = phase_stage_unitary(phase) * paddle;
    const auto [lh, ld] = evaluate(comp);
    CompensationReport current;
    current.compensation = comp;
    current.paddle_qwp_deg = normalize_angle_deg(qwp);
    current.paddle_hwp_deg = normalize_angle_deg(hwp);
    current.phase_hwp_deg = normalize_angle_deg(phase);
    current.iterations = it;
    current.leak_h = lh;
    current.leak_d = ld;
    current.residual = std::max(lh, ld);
    if (it == 1 || current.residual < best.residual) best = current;
    best.iterations = it;
    if (best.residual < opts.tolerance) {
      best.converged = true;
      return best;
    }
  }
  best.converged = false;
  return best;
}

}  // namespace ffsim
