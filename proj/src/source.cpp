#include "ffsim/source.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ffsim {

std::string_view to_string(SourceMode mode) {
  switch (mode) {
    case SourceMode::ideal:
      return "ideal";
    case SourceMode::dephased:
      return "dephased";
    case SourceMode::werner:
      return "werner";
  }
  return "?";
}

SourceMode parse_source_mode(std::string_view text) {
  if (text == "ideal") return SourceMode::ideal;
  if (text == "dephased") return SourceMode::dephased;
  if (text == "werner") return SourceMode::werner;
  throw std::invalid_argument("unknown source mode '" + std::string(text) +
                              "' (expected ideal|dephased|werner)");
}

void SourceModel::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("source: " + what); };
  if (!(visibility >= 0.0 && visibility <= 1.0)) fail("visibility must lie in [0, 1]");
  if (!std::isfinite(chi_signal)) fail("chi_signal must be finite");
  if (!std::isfinite(chi_idler)) fail("chi_idler must be finite");
  if (!(pdl_fraction >= 0.0 && pdl_fraction < 1.0)) fail("pdl_fraction must lie in [0, 1)");
  if (leak_probability && !(*leak_probability >= 0.0 && *leak_probability < 1.0)) {
    fail("leak_probability must lie in [0, 1)");
  }
  if (mode == SourceMode::ideal &&
      (visibility != 1.0 || chi_signal != 0.0 || chi_idler != 0.0 || pdl_fraction != 0.0)) {
    fail("mode=ideal requires visibility=1, chi=0 and pdl_fraction=0");
  }
}

double visibility_for_purity(SourceMode mode, double purity) {
  switch (mode) {
    case SourceMode::ideal:
      if (std::abs(purity - 1.0) > 1e-12) {
        throw std::invalid_argument("source: mode=ideal has purity 1");
      }
      return 1.0;
    case SourceMode::dephased:
      if (!(purity >= 0.5 && purity <= 1.0)) {
        throw std::invalid_argument("source: dephased purity must lie in [0.5, 1]");
      }
      return std::sqrt(2.0 * purity - 1.0);
    case SourceMode::werner:
      if (!(purity >= 0.25 && purity <= 1.0)) {
        throw std::invalid_argument("source: werner purity must lie in [0.25, 1]");
      }
      return std::sqrt((4.0 * purity - 1.0) / 3.0);
  }
  return 1.0;
}

DensityMatrix dephase_singlet(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("dephase_singlet: v must lie in [0, 1]");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(1, 1) = 0.5;
  m(2, 2) = 0.5;
  m(1, 2) = -0.5 * v;
  m(2, 1) = -0.5 * v;
  return DensityMatrix(m);
}

DensityMatrix werner_state(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("werner_state: v must lie in [0, 1]");
  const Eigen::Vector4cd s = singlet_vector();
  Eigen::MatrixXcd m = v * s * s.adjoint() + (1.0 - v) * Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  return DensityMatrix::from_unnormalized(m);
}

DensityMatrix apply_birefringence(const DensityMatrix& rho4, double chi, Arm arm) {
  if (rho4.dim() != 4) throw std::invalid_argument("apply_birefringence: requires a two-qubit state");
  return rho4.conjugated(on_arm(rz(chi).matrix(), arm));
}

DensityMatrix apply_pdl(const DensityMatrix& rho4, double epsilon, Arm arm) {
  if (rho4.dim() != 4) throw std::invalid_argument("apply_pdl: requires a two-qubit state");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("apply_pdl: epsilon must lie in [0, 1)");
  }
  Eigen::Matrix2cd k = Eigen::Matrix2cd::Zero();
  k(0, 0) = 1.0;
  k(1, 1) = std::sqrt(1.0 - epsilon);
  const Eigen::Matrix4cd kk = on_arm(k, arm);
  return DensityMatrix::from_unnormalized(kk * rho4.matrix() * kk.adjoint());
}

DensityMatrix make_state(const SourceModel& model) {
  model.validate();
  DensityMatrix rho = singlet();
  switch (model.mode) {
    case SourceMode::ideal:
      return rho;
    case SourceMode::dephased:
      rho = dephase_singlet(model.visibility);
      break;
    case SourceMode::werner:
      rho = werner_state(model.visibility);
      break;
  }
  if (model.chi_signal != 0.0) rho = apply_birefringence(rho, model.chi_signal, Arm::signal);
  if (model.chi_idler != 0.0) rho = apply_birefringence(rho, model.chi_idler, Arm::idler);
  if (model.pdl_fraction != 0.0) rho = apply_pdl(rho, model.pdl_fraction, model.pdl_arm);
  return rho;
}

}  // namespace ffsim
