// End-to-end sweeps over the Bloch-sphere planes, predicted-state
// correction, and Monte Carlo error bars.

#pragma once

#include "ffsim/feedforward.hpp"
#include "ffsim/source.hpp"
#include "ffsim/tomography.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace ffsim {

inline constexpr int kDefaultGridPoints = 19;

/// HWP angles of an evenly spaced grid: 0..90 deg (meridian) or
/// 22.5..112.5 deg (equatorial), endpoints included.
std::vector<double> grid_hwp_angles(Plane plane, int n_points = kDefaultGridPoints);
std::vector<PmSetting> grid_settings(Plane plane, int n_points = kDefaultGridPoints);
/// Bloch angle of the prepared target: theta = 4 t (meridian),
/// phi = 4 (t - 22.5) (equatorial), in degrees.
double bloch_angle_deg(Plane plane, double hwp_deg);
PmSetting pm_setting(Plane plane, double hwp_deg);

/// Per-task seed derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Context handed to a Monte Carlo closure: an independent generator and the
/// waveplate jitter to apply.
struct Trial {
  std::uint64_t index = 0;
  std::mt19937_64 rng;
  double jitter_sigma_deg = 0.0;

  /// One normal draw with sigma = jitter_sigma_deg (0 when disabled).
  double jitter();
};

struct ErrorBar {
  double mean = 0.0;
  double sigma = 0.0;  // sample standard deviation
  std::vector<double> samples;
};

/// Runs `experiment` n_trials times with independent generators derived from
/// `seed`; returns sample mean and standard deviation. Requires n_trials >= 2.
ErrorBar mc_errorbar(const std::function<double(Trial&)>& experiment, int n_trials,
                     double angle_jitter_sigma_deg, std::uint64_t seed);

/// Offsets each station's plates by one draw per plate (a per-trial
/// calibration error shared by every setting of the run).
std::vector<TomographySetting> jitter_settings(const std::vector<TomographySetting>& nominal, Trial& trial);

/// Simulated tomography of `rho`: true projectors from jittered angles,
/// `counts` events per setting (0 = exact probabilities), reconstruction
/// against the nominal angles.
TomographyResult simulate_tomography(const DensityMatrix& rho, const std::vector<TomographySetting>& nominal,
                                     std::uint64_t counts, Trial& trial,
                                     NoiseModel noise = NoiseModel::multinomial);

struct SweepSpec {
  Plane plane = Plane::meridian;
  int n_points = kDefaultGridPoints;
  SourceModel source = SourceModel::ideal();
  bool feedforward = true;
  std::uint64_t counts_per_setting = 35000;
  double angle_jitter_sigma_deg = 0.5;
  int n_trials = 1;
  std::uint64_t seed = 1;
  // Noise-free measurement: exact Born probabilities at the nominal angles
  // (no sampling, no jitter).
  bool infinite_statistics = false;
  NoiseModel noise = NoiseModel::multinomial;
  SwitchModel switch_model{};
  std::optional<double> miscalibration_deg;

  void validate() const;
};

struct SweepPoint {
  double hwp_deg = 0.0;
  double bloch_angle_deg = 0.0;
  PureState2 target = PureState2::H();
  double fidelity_mean = 0.0;
  double fidelity_sigma = 0.0;
  double purity_mean = 0.0;
  DensityMatrix reconstructed = DensityMatrix::maximally_mixed(2);  // first trial
  DensityMatrix simulated = DensityMatrix::maximally_mixed(2);      // noiseless output
};

struct SweepResult {
  Plane plane = Plane::meridian;
  bool feedforward = true;
  std::vector<SweepPoint> points;

  double mean_fidelity() const;
  double fidelity_spread() const;  // max - min of per-point means
};

class SweepError : public std::runtime_error {
 public:
  SweepError(std::size_t point, const std::string& what)
      : std::runtime_error("sweep point " + std::to_string(point) + ": " + what), point_(point) {}
  std::size_t point() const { return point_; }

 private:
  std::size_t point_;
};

/// For each grid angle: run the protocol, measure the output by single-qubit
/// tomography and score it against the target; repeated n_trials times with
/// fresh jitter and counts.
SweepResult sweep_bloch(const SweepSpec& spec);

/// Unconditional signal states the ideal protocol (exact projection, exact
/// correction, no crosstalk) would produce from `rho4` at each setting.
std::vector<DensityMatrix> predicted_states(const DensityMatrix& rho4, Plane plane,
                                            const std::vector<PmSetting>& grid);

struct FeedforwardFidelitySpec {
  Plane plane = Plane::meridian;
  int n_points = kDefaultGridPoints;
  SourceModel source = SourceModel::ideal();
  // Events per setting for the two-qubit tomography of the source; 0 uses
  // exact probabilities.
  std::uint64_t source_counts = 40000;
  std::uint64_t seed = 1;
  // Imperfections of the feed-forward path only.
  double chi_signal = 0.2;
  double pdl_fraction = 0.01;
  double miscalibration_deg = 0.5;
  SwitchModel switch_model{};
  std::optional<double> leak_probability;
};

struct FeedforwardFidelityResult {
  DensityMatrix source_estimate = DensityMatrix::maximally_mixed(4);
  std::vector<double> fidelities;  // per grid point
  double mean = 0.0;
};

/// Separates feed-forward errors from source errors: the source state is
/// reconstructed by two-qubit tomography, the ideal protocol applied to the
/// estimate gives the predicted states, and those are compared (Uhlmann
/// fidelity) with the outputs of the imperfect feed-forward path.
FeedforwardFidelityResult feedforward_fidelity(const FeedforwardFidelitySpec& spec);

}  // namespace ffsim
