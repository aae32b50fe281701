// Two-photon source model: singlet with reduced coherence, residual fiber
// birefringence and polarization-dependent loss.

#pragma once

#include "ffsim/polar.hpp"

#include <optional>
#include <string_view>

namespace ffsim {

enum class SourceMode { ideal, dephased, werner };

std::string_view to_string(SourceMode mode);
SourceMode parse_source_mode(std::string_view text);

struct SourceModel {
  SourceMode mode = SourceMode::dephased;
  double visibility = 1.0;   // v in [0, 1]
  double chi_signal = 0.0;   // residual birefringence, rad
  double chi_idler = 0.0;    // residual birefringence, rad
  double pdl_fraction = 0.0; // epsilon in [0, 1)
  Arm pdl_arm = Arm::signal;
  // Overrides the switch-derived crosstalk when set; in [0, 1).
  std::optional<double> leak_probability;

  // Perfect pairs through a perfect switch: the crosstalk override is 0.
  static SourceModel ideal() { return {SourceMode::ideal, 1.0, 0.0, 0.0, 0.0, Arm::signal, 0.0}; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Visibility that gives the requested two-qubit purity for the mode's
/// mixing family: (1+v^2)/2 for dephasing, (1+3v^2)/4 for Werner.
double visibility_for_purity(SourceMode mode, double purity);

/// rho = 1/2(|HV><HV| + |VH><VH|) - v/2 (|HV><VH| + |VH><HV|).
DensityMatrix dephase_singlet(double v);
/// rho = v |psi-><psi-| + (1 - v) I/4.
DensityMatrix werner_state(double v);

/// Conjugates `arm` by exp(-i chi sigma_z / 2).
DensityMatrix apply_birefringence(const DensityMatrix& rho4, double chi, Arm arm);

/// Kraus operator diag(1, sqrt(1 - epsilon)) on `arm`, renormalized by the
/// survival probability.
DensityMatrix apply_pdl(const DensityMatrix& rho4, double epsilon, Arm arm);

/// Composes base state, mixing, birefringence on each arm, then PDL.
DensityMatrix make_state(const SourceModel& model);

}  // namespace ffsim
