// Counting statistics and least-squares state tomography.
//
// A tomography station is QWP -> HWP -> PBS; the transmitted port projects
// onto (HWP * QWP)^dagger |H>, the reflected port onto the orthogonal state.

#pragma once

#include "ffsim/polar.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ffsim {

struct StationAngles {
  double hwp_deg = 0.0;
  double qwp_deg = 0.0;

  // Transmitted-port state.
  PureState2 transmitted() const;
};

/// Signal (QST) station angles, plus the idler (PM) station for two-qubit
/// tomography.
struct TomographySetting {
  StationAngles signal;
  std::optional<StationAngles> idler;

  int dim() const { return idler ? 4 : 2; }
  int outcomes() const { return idler ? 4 : 2; }
};

struct LabeledProjector {
  std::string label;  // "H"/"V", or "HH","HV","VH","VV" (signal letter first)
  Eigen::MatrixXcd op;
};

/// Rank-1 projectors of one setting, ordered H,V or HH,HV,VH,VV.
std::vector<LabeledProjector> projectors_for(const TomographySetting& setting);

/// Three settings, six projectors: H/V, R/L and D/A.
std::vector<TomographySetting> single_qubit_suite();
/// Nine settings, 36 projectors: every pairing of the H/V, D/A and R/L
/// station configurations.
std::vector<TomographySetting> two_qubit_suite();
/// Variant of the nine settings in which the sixth repeats the fourth
/// (D/A x R/L) instead of D/A x H/V; rank-deficient (15 of 16).
std::vector<TomographySetting> two_qubit_suite_with_repeat();

/// Born probabilities Tr[O rho], concatenated setting by setting.
std::vector<double> probabilities_from_state(const DensityMatrix& rho,
                                             const std::vector<TomographySetting>& settings);

struct CountRecord {
  TomographySetting setting;
  std::vector<std::uint64_t> counts;  // size outcomes(): c_h,c_v or c_hh,c_hv,c_vh,c_vv

  std::uint64_t total() const;
};

enum class NoiseModel { multinomial, poisson };

/// Draws counts for each setting from its slice of `probs`. Multinomial with
/// a fixed n per setting by default; Poisson draws each outcome with mean
/// n * p independently.
std::vector<CountRecord> sample_counts(const std::vector<TomographySetting>& settings,
                                       const std::vector<double>& probs, std::uint64_t n_per_setting,
                                       std::mt19937_64& rng, NoiseModel model = NoiseModel::multinomial);
std::vector<CountRecord> sample_counts(const std::vector<TomographySetting>& settings,
                                       const std::vector<double>& probs, std::uint64_t n_per_setting,
                                       std::uint64_t seed, NoiseModel model = NoiseModel::multinomial);

/// Relative frequencies. Throws std::invalid_argument on a zero total.
std::vector<double> estimate_probs(const CountRecord& record);
std::vector<double> estimate_probs(const std::vector<CountRecord>& records);

class NotInformationallyComplete : public std::runtime_error {
 public:
  explicit NotInformationallyComplete(int rank, int needed)
      : std::runtime_error("measurement set is not informationally complete (rank " +
                           std::to_string(rank) + " of " + std::to_string(needed) + ")") {}
};

struct LsOptions {
  int max_iterations = 10000;
  // Stop once an iteration lowers the cost by less than this fraction.
  double relative_cost_change = 1e-12;
};

struct TomographyResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double condition_number = 1.0;
  // Set when the measurement matrix condition number exceeds 1e6.
  bool ill_conditioned = false;
};

/// Least-squares fit of sum (Tr[O rho] - P)^2 over physical density
/// matrices, parameterized as rho = L L^dagger / Tr(L L^dagger) with L
/// lower-triangular and minimized by L-BFGS from a projected
/// linear-inversion start. Throws NotInformationallyComplete when the
/// projectors do not span the Hermitian operators.
TomographyResult ls_reconstruct(const std::vector<TomographySetting>& settings,
                                const std::vector<double>& probs, int dim, const LsOptions& opts = {});

/// Value of the least-squares cost at a given state.
double ls_cost(const std::vector<TomographySetting>& settings, const std::vector<double>& probs,
               const DensityMatrix& rho);

}  // namespace ffsim
