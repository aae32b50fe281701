// Simulated calibration of a fiber leg: find a compensator that makes a
// fixed, unknown polarization transformation act as the identity, using only
// count minimization on |H> and |D> probes.

#pragma once

#include "ffsim/polar.hpp"

#include <cstdint>
#include <functional>

namespace ffsim {

/// Haar-random 2x2 unitary, deterministic per seed.
Unitary2 random_unitary(std::uint64_t seed);

enum class Probe { H, D };

/// Probability that the probe photon exits in the orthogonal (transmitted,
/// minimized) port after `total`.
double probe_leakage(const Unitary2& total, Probe probe);

/// Two paddles acting as QWP(qwp_deg) then HWP(hwp_deg).
Unitary2 paddle_unitary(double qwp_deg, double hwp_deg);

/// A HWP pair sandwiched by QWPs at 45/135 deg: a pure H/V phase shifter,
/// diag(e^{-2it}, e^{2it}) up to global phase for plate angle t.
Unitary2 phase_stage_unitary(double hwp_deg);

struct CompensationOptions {
  double tolerance = 1e-6;
  int max_iterations = 50;
};

struct CompensationReport {
  Unitary2 compensation = Unitary2::identity();  // applied after the fiber
  double paddle_qwp_deg = 0.0;
  double paddle_hwp_deg = 0.0;
  double phase_hwp_deg = 0.0;
  int iterations = 0;
  double leak_h = 0.0;
  double leak_d = 0.0;
  double residual = 0.0;  // max(leak_h, leak_d) of the best iterate
  bool converged = false;
};

/// Alternates an H/V pass (paddles, minimizing the |H>-probe leakage) with a
/// D/A pass (phase stage, minimizing the |D>-probe leakage) until both
/// leakages are below `tolerance`. The phase stage leaves |H> invariant, so
/// the second pass never undoes the first. The seed randomizes the starting
/// offsets of the coarse scans.
CompensationReport simulate_compensation(const Unitary2& fiber, std::uint64_t rng_seed,
                                         const CompensationOptions& opts = {});

namespace detail {

/// Coarse scan of a periodic objective followed by golden-section refinement
/// around the best grid point. Returns the argmin.
double minimize_periodic(const std::function<double(double)>& f, double period, int grid,
                         double start_offset);

/// Golden-section search on [lo, hi] assuming a unimodal objective.
double golden_section(const std::function<double(double)>& f, double lo, double hi, double x_tol);

}  // namespace detail

}  // namespace ffsim
