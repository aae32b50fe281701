#include "ffsim/polar.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace ffsim {

namespace {

const cplx kI{0.0, 1.0};

Eigen::Matrix2cd rotation(double angle_deg) {
  const double t = deg_to_rad(angle_deg);
  Eigen::Matrix2cd r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

}  // namespace

double normalize_angle_deg(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a -= 180.0;
  return a;
}

std::string_view to_string(Arm arm) { return arm == Arm::signal ? "signal" : "idler"; }
std::string_view to_string(Plane plane) {
  return plane == Plane::meridian ? "meridian" : "equatorial";
}

Arm parse_arm(std::string_view text) {
  if (text == "signal") return Arm::signal;
  if (text == "idler") return Arm::idler;
  throw std::invalid_argument("unknown arm '" + std::string(text) + "' (expected signal|idler)");
}

Plane parse_plane(std::string_view text) {
  if (text == "meridian") return Plane::meridian;
  if (text == "equatorial") return Plane::equatorial;
  throw std::invalid_argument("unknown plane '" + std::string(text) +
                              "' (expected meridian|equatorial)");
}

// ---------------------------------------------------------------------------
// PureState2

PureState2::PureState2(cplx amp_h, cplx amp_v) : vec_(amp_h, amp_v) {
  const double n = std::norm(amp_h) + std::norm(amp_v);
  if (!(std::abs(n - 1.0) <= kConstructionTol)) {
    throw std::invalid_argument("PureState2: amplitudes not normalized (|h|^2+|v|^2 = " +
                                std::to_string(n) + ")");
  }
}

PureState2 PureState2::normalized(cplx amp_h, cplx amp_v) {
  const double n = std::sqrt(std::norm(amp_h) + std::norm(amp_v));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("PureState2: cannot normalize a zero or non-finite vector");
  }
  return PureState2(Eigen::Vector2cd(amp_h / n, amp_v / n));
}

PureState2 PureState2::from_vector(const Eigen::Vector2cd& v) { return normalized(v(0), v(1)); }

PureState2 PureState2::D() { return normalized(1.0, 1.0); }
PureState2 PureState2::A() { return normalized(1.0, -1.0); }
PureState2 PureState2::R() { return normalized(1.0, -kI); }
PureState2 PureState2::L() { return normalized(1.0, kI); }

PureState2 PureState2::from_bloch(double theta_rad, double phi_rad) {
  return normalized(std::cos(theta_rad / 2.0), std::polar(1.0, phi_rad) * std::sin(theta_rad / 2.0));
}

PureState2 PureState2::orthogonal() const {
  return PureState2(Eigen::Vector2cd(-std::conj(vec_(1)), std::conj(vec_(0))));
}

PureState2 PureState2::canonical() const {
  const int lead = std::abs(vec_(0)) > 1e-12 ? 0 : 1;
  const cplx phase = vec_(lead) / std::abs(vec_(lead));
  Eigen::Vector2cd v = vec_ / phase;
  v(lead) = std::abs(v(lead));
  return PureState2(v);
}

double PureState2::bloch_theta() const {
  return 2.0 * std::atan2(std::abs(vec_(1)), std::abs(vec_(0)));
}

double PureState2::bloch_phi() const {
  if (std::abs(vec_(0)) < 1e-12 || std::abs(vec_(1)) < 1e-12) return 0.0;
  double phi = std::arg(vec_(1)) - std::arg(vec_(0));
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  return phi;
}

// ---------------------------------------------------------------------------
// Unitary2

Unitary2::Unitary2(const Eigen::Matrix2cd& m) : m_(m) {
  const double err = (m.adjoint() * m - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= kConstructionTol)) {
    throw std::invalid_argument("Unitary2: matrix is not unitary (deviation " +
                                std::to_string(err) + ")");
  }
}

Unitary2 pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return Unitary2(m);
}

Unitary2 pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, -kI, kI, 0;
  return Unitary2(m);
}

Unitary2 pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return Unitary2(m);
}

Unitary2 i_sigma_y() {
  Eigen::Matrix2cd m;
  m << 0, 1, -1, 0;
  return Unitary2(m);
}

Unitary2 rz(double angle_rad) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::polar(1.0, -angle_rad / 2.0);
  m(1, 1) = std::polar(1.0, angle_rad / 2.0);
  return Unitary2(m);
}

Unitary2 hwp_unitary(double angle_deg) {
  const double t = 2.0 * deg_to_rad(angle_deg);
  Eigen::Matrix2cd m;
  m << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
  return Unitary2(m);
}

Unitary2 qwp_unitary(double angle_deg) {
  const Eigen::Matrix2cd r = rotation(angle_deg);
  Eigen::Matrix2cd retarder = Eigen::Matrix2cd::Zero();
  retarder(0, 0) = 1.0;
  retarder(1, 1) = -kI;
  Eigen::Matrix2cd m = r * retarder * r.transpose();
  return Unitary2(m);
}

Unitary2 WaveplateSetting::unitary() const {
  return kind == PlateKind::hwp ? hwp_unitary(angle_deg) : qwp_unitary(angle_deg);
}

double phase_distance(const Unitary2& a, const Unitary2& b) {
  // |a - e^{ig} b|_F^2 = 4 - 2 Re(e^{-ig} Tr(b^dagger a)) for 2x2 unitaries,
  // minimized by aligning the phase with the overlap.
  const cplx overlap = (b.matrix().adjoint() * a.matrix()).trace();
  return std::sqrt(std::max(0.0, 4.0 - 2.0 * std::abs(overlap)));
}

bool equal_up_to_phase(const Unitary2& a, const Unitary2& b, double tol) {
  const cplx overlap = (b.matrix().adjoint() * a.matrix()).trace();
  if (std::abs(overlap) < 1e-300) return false;
  const cplx phase = overlap / std::abs(overlap);
  return (a.matrix() - phase * b.matrix()).cwiseAbs().maxCoeff() <= tol;
}

bool equal_up_to_phase(const PureState2& a, const PureState2& b, double tol) {
  const cplx overlap = b.vector().dot(a.vector());
  if (std::abs(overlap) < 1e-300) return false;
  const cplx phase = overlap / std::abs(overlap);
  return (a.vector() - phase * b.vector()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const Eigen::MatrixXcd& m) : m_(m) {
  if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
    throw std::invalid_argument("DensityMatrix: dimension must be 2x2 or 4x4");
  }
  if (!m.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kValidationTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (deviation " + std::to_string(herm) +
                                ")");
  }
  const cplx tr = m.trace();
  if (std::abs(tr - 1.0) > kValidationTol) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kValidationTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::from_unnormalized(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  const double tr = h.trace().real();
  if (!(tr > 0.0)) throw std::invalid_argument("DensityMatrix: non-positive trace");
  return DensityMatrix(h / tr);
}

DensityMatrix DensityMatrix::pure(const PureState2& s) {
  return DensityMatrix(Eigen::MatrixXcd(s.projector()), Trusted{});
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& v) {
  const double n = v.squaredNorm();
  if (!(n > 0.0)) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  return DensityMatrix(Eigen::MatrixXcd(v * v.adjoint() / n));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::conjugated(const Eigen::MatrixXcd& u) const {
  if (u.rows() != dim() || u.cols() != dim()) {
    throw std::invalid_argument("DensityMatrix::conjugated: dimension mismatch");
  }
  return from_unnormalized(u * m_ * u.adjoint());
}

Eigen::Vector4cd singlet_vector() {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(1) = 1.0 / std::sqrt(2.0);   // |HV>
  v(2) = -1.0 / std::sqrt(2.0);  // |VH>
  return v;
}

DensityMatrix singlet() { return DensityMatrix::pure(Eigen::VectorXcd(singlet_vector())); }

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Eigen::Vector4cd kron(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  Eigen::Vector4cd out;
  out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return out;
}

Eigen::Matrix4cd on_arm(const Eigen::Matrix2cd& op, Arm arm) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return arm == Arm::signal ? kron(op, id) : kron(id, op);
}

double fidelity_pure(const DensityMatrix& rho, const Eigen::VectorXcd& target) {
  if (target.size() != rho.dim()) {
    throw std::invalid_argument("fidelity_pure: target dimension " +
                                std::to_string(target.size()) + " does not match rho dimension " +
                                std::to_string(rho.dim()));
  }
  return target.dot(rho.matrix() * target).real();
}

double fidelity_pure(const DensityMatrix& rho, const PureState2& target) {
  return fidelity_pure(rho, Eigen::VectorXcd(target.vector()));
}

namespace {

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Eigen::MatrixXcd s = psd_sqrt(rho.matrix());
  Eigen::MatrixXcd inner = s * sigma.matrix() * s;
  inner = 0.5 * (inner + inner.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
  const double root_sum = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::min(1.0, root_sum * root_sum);
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Eigen::MatrixXcd partial_trace(const DensityMatrix& rho4, Arm traced_out) {
  if (rho4.dim() != 4) throw std::invalid_argument("partial_trace: requires a two-qubit state");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2, 2);
  const auto& m = rho4.matrix();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) {
        if (traced_out == Arm::idler) {
          out(a, b) += m(2 * a + k, 2 * b + k);
        } else {
          out(a, b) += m(2 * k + a, 2 * k + b);
        }
      }
  return out;
}

DensityMatrix reduced_state(const DensityMatrix& rho4, Arm keep) {
  return DensityMatrix::from_unnormalized(
      partial_trace(rho4, keep == Arm::signal ? Arm::idler : Arm::signal));
}

Projection project_arm(const DensityMatrix& rho4, Arm arm, const PureState2& proj) {
  if (rho4.dim() != 4) throw std::invalid_argument("project_arm: requires a two-qubit state");
  const Eigen::Matrix4cd p = on_arm(proj.projector(), arm);
  const Eigen::MatrixXcd projected = p * rho4.matrix() * p;
  Projection out;
  out.probability = std::max(0.0, projected.trace().real());
  if (out.probability < kImpossibleProbability) return out;
  // Tracing out the measured arm of (P (x) 1) rho (P (x) 1) leaves <p|rho|p>
  // acting on the other arm.
  Eigen::MatrixXcd remaining = Eigen::MatrixXcd::Zero(2, 2);
  const auto& m = rho4.matrix();
  const Eigen::Vector2cd& v = proj.vector();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const cplx w = std::conj(v(k)) * v(l);
          if (arm == Arm::idler) {
            remaining(a, b) += w * m(2 * a + k, 2 * b + l);
          } else {
            remaining(a, b) += w * m(2 * k + a, 2 * l + b);
          }
        }
  out.conditional = DensityMatrix::from_unnormalized(remaining);
  return out;
}

}  // namespace ffsim
