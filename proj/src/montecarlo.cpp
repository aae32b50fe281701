#include "ffsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ffsim {

std::vector<double> grid_hwp_angles(Plane plane, int n_points) {
  if (n_points < 2) throw std::invalid_argument("grid: n_points must be >= 2");
  const double start = plane == Plane::meridian ? 0.0 : 22.5;
  std::vector<double> out;
  out.reserve(n_points);
  for (int k = 0; k < n_points; ++k) out.push_back(start + 90.0 * k / (n_points - 1));
  return out;
}

PmSetting pm_setting(Plane plane, double hwp_deg) {
  return plane == Plane::meridian ? PmSetting::meridian(hwp_deg) : PmSetting::equatorial(hwp_deg);
}

std::vector<PmSetting> grid_settings(Plane plane, int n_points) {
  std::vector<PmSetting> out;
  for (double a : grid_hwp_angles(plane, n_points)) out.push_back(pm_setting(plane, a));
  return out;
}

double bloch_angle_deg(Plane plane, double hwp_deg) {
  return plane == Plane::meridian ? 4.0 * hwp_deg : 4.0 * (hwp_deg - 22.5);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  constexpr std::uint64_t kPrime = 2305843009213693951ULL;  // 2^61 - 1
  return master + index * kPrime;
}

double Trial::jitter() {
  if (jitter_sigma_deg <= 0.0) return 0.0;
  std::normal_distribution<double> gauss(0.0, jitter_sigma_deg);
  return gauss(rng);
}

ErrorBar mc_errorbar(const std::function<double(Trial&)>& experiment, int n_trials,
                     double angle_jitter_sigma_deg, std::uint64_t seed) {
  if (n_trials < 2) throw std::invalid_argument("mc_errorbar: n_trials must be >= 2");
  if (!(angle_jitter_sigma_deg >= 0.0)) throw std::invalid_argument("mc_errorbar: jitter sigma must be >= 0");
  ErrorBar out;
  out.samples.reserve(n_trials);
  for (int t = 0; t < n_trials; ++t) {
    Trial trial{static_cast<std::uint64_t>(t), std::mt19937_64(trial_seed(seed, t)), angle_jitter_sigma_deg};
    out.samples.push_back(experiment(trial));
  }
  out.mean = std::accumulate(out.samples.begin(), out.samples.end(), 0.0) / n_trials;
  double ss = 0.0;
  for (double x : out.samples) ss += (x - out.mean) * (x - out.mean);
  out.sigma = std::sqrt(ss / (n_trials - 1));
  return out;
}

std::vector<TomographySetting> jitter_settings(const std::vector<TomographySetting>& nominal, Trial& trial) {
  const double s_hwp = trial.jitter();
  const double s_qwp = trial.jitter();
  const double i_hwp = trial.jitter();
  const double i_qwp = trial.jitter();
  std::vector<TomographySetting> out = nominal;
  for (auto& s : out) {
    s.signal.hwp_deg += s_hwp;
    s.signal.qwp_deg += s_qwp;
    if (s.idler) {
      s.idler->hwp_deg += i_hwp;
      s.idler->qwp_deg += i_qwp;
    }
  }
  return out;
}

TomographyResult simulate_tomography(const DensityMatrix& rho, const std::vector<TomographySetting>& nominal,
                                     std::uint64_t counts, Trial& trial, NoiseModel noise) {
  const std::vector<TomographySetting> actual = jitter_settings(nominal, trial);
  std::vector<double> probs = probabilities_from_state(rho, actual);
  if (counts > 0) probs = estimate_probs(sample_counts(actual, probs, counts, trial.rng, noise));
  return ls_reconstruct(nominal, probs, rho.dim());
}

void SweepSpec::validate() const {
  if (n_points < 2) throw std::invalid_argument("sweep: n_points must be >= 2");
  if (!infinite_statistics && counts_per_setting == 0) {
    throw std::invalid_argument("sweep: counts_per_setting must be > 0");
  }
  if (n_trials < 1) throw std::invalid_argument("sweep: n_trials must be >= 1");
  if (!(angle_jitter_sigma_deg >= 0.0)) throw std::invalid_argument("sweep: angle_jitter_sigma must be >= 0");
  source.validate();
  switch_model.validate();
}

double SweepResult::mean_fidelity() const {
  if (points.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : points) s += p.fidelity_mean;
  return s / static_cast<double>(points.size());
}

double SweepResult::fidelity_spread() const {
  if (points.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.fidelity_mean < b.fidelity_mean;
  });
  return hi->fidelity_mean - lo->fidelity_mean;
}

SweepResult sweep_bloch(const SweepSpec& spec) {
  spec.validate();
  const DensityMatrix rho4 = make_state(spec.source);
  RspOptions opts;
  opts.plane = spec.plane;
  opts.feedforward = spec.feedforward;
  opts.switch_model = spec.switch_model;
  opts.leak_probability = spec.source.leak_probability;
  opts.miscalibration_deg = spec.miscalibration_deg;

  const std::vector<TomographySetting> qst = single_qubit_suite();
  const std::vector<double> angles = grid_hwp_angles(spec.plane, spec.n_points);

  SweepResult result;
  result.plane = spec.plane;
  result.feedforward = spec.feedforward;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    try {
      const PmSetting setting = pm_setting(spec.plane, angles[k]);
      const RspOutcome outcome = run_rsp(rho4, setting, opts);
      SweepPoint point;
      point.hwp_deg = angles[k];
      point.bloch_angle_deg = bloch_angle_deg(spec.plane, angles[k]);
      point.target = outcome.target;
      point.simulated = outcome.unconditional;

      std::vector<double> fids, purities;
      for (int t = 0; t < spec.n_trials; ++t) {
        const std::uint64_t task = static_cast<std::uint64_t>(k) * spec.n_trials + t;
        Trial trial{task, std::mt19937_64(trial_seed(spec.seed, task)),
                    spec.infinite_statistics ? 0.0 : spec.angle_jitter_sigma_deg};
        const TomographyResult tomo = simulate_tomography(
            outcome.unconditional, qst, spec.infinite_statistics ? 0 : spec.counts_per_setting, trial, spec.noise);
        if (t == 0) point.reconstructed = tomo.rho;
        fids.push_back(fidelity_pure(tomo.rho, outcome.target));
        purities.push_back(purity(tomo.rho));
      }
      const double n = static_cast<double>(fids.size());
      point.fidelity_mean = std::accumulate(fids.begin(), fids.end(), 0.0) / n;
      point.purity_mean = std::accumulate(purities.begin(), purities.end(), 0.0) / n;
      if (fids.size() > 1) {
        double ss = 0.0;
        for (double f : fids) ss += (f - point.fidelity_mean) * (f - point.fidelity_mean);
        point.fidelity_sigma = std::sqrt(ss / (n - 1.0));
      }
      result.points.push_back(std::move(point));
    } catch (const std::exception& e) {
      throw SweepError(k, e.what());
    }
  }
  return result;
}

std::vector<DensityMatrix> predicted_states(const DensityMatrix& rho4, Plane plane,
                                            const std::vector<PmSetting>& grid) {
  RspOptions ideal;
  ideal.plane = plane;
  ideal.feedforward = true;
  ideal.leak_probability = 0.0;
  std::vector<DensityMatrix> out;
  out.reserve(grid.size());
  for (const auto& s : grid) out.push_back(run_rsp(rho4, s, ideal).unconditional);
  return out;
}

FeedforwardFidelityResult feedforward_fidelity(const FeedforwardFidelitySpec& spec) {
  const DensityMatrix rho_source = make_state(spec.source);
  Trial trial{0, std::mt19937_64(trial_seed(spec.seed, 0)), 0.0};
  const TomographyResult estimate = simulate_tomography(rho_source, two_qubit_suite(), spec.source_counts, trial);

  const std::vector<PmSetting> grid = grid_settings(spec.plane, spec.n_points);
  const std::vector<DensityMatrix> predicted = predicted_states(estimate.rho, spec.plane, grid);

  DensityMatrix rho_ff = apply_birefringence(rho_source, spec.chi_signal, Arm::signal);
  rho_ff = apply_pdl(rho_ff, spec.pdl_fraction, Arm::signal);
  RspOptions opts;
  opts.plane = spec.plane;
  opts.feedforward = true;
  opts.switch_model = spec.switch_model;
  opts.leak_probability = spec.leak_probability;
  opts.miscalibration_deg = spec.miscalibration_deg;

  FeedforwardFidelityResult out;
  out.source_estimate = estimate.rho;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const DensityMatrix simulated = run_rsp(rho_ff, grid[k], opts).unconditional;
    out.fidelities.push_back(fidelity(predicted[k], simulated));
  }
  out.mean = std::accumulate(out.fidelities.begin(), out.fidelities.end(), 0.0) /
             static_cast<double>(out.fidelities.size());
  return out;
}

}  // namespace ffsim
