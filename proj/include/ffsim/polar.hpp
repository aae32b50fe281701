// Polarization-qubit algebra: Jones vectors, waveplate unitaries, density
// matrices, projections and fidelity/purity metrics.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string_view>

namespace ffsim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kValidationTol = 1e-10;
// Projection probabilities below this are reported as impossible outcomes.
inline constexpr double kImpossibleProbability = 1e-14;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into [0, 180).
double normalize_angle_deg(double deg);

enum class Arm { signal, idler };
enum class Plane { meridian, equatorial };

std::string_view to_string(Arm arm);
std::string_view to_string(Plane plane);
Arm parse_arm(std::string_view text);
Plane parse_plane(std::string_view text);

/// Normalized Jones vector (amp_h, amp_v). Equality is up to global phase.
class PureState2 {
 public:
  /// Throws std::invalid_argument unless |h|^2 + |v|^2 = 1 within 1e-12.
  PureState2(cplx amp_h, cplx amp_v);
  /// Normalizes the input; throws if both amplitudes vanish.
  static PureState2 normalized(cplx amp_h, cplx amp_v);
  static PureState2 from_vector(const Eigen::Vector2cd& v);

  static PureState2 H() { return {1.0, 0.0}; }
  static PureState2 V() { return {0.0, 1.0}; }
  static PureState2 D();
  static PureState2 A();
  static PureState2 R();
  static PureState2 L();
  // cos(theta/2)|H> + e^{i phi} sin(theta/2)|V>.
  static PureState2 from_bloch(double theta_rad, double phi_rad);

  cplx amp_h() const { return vec_(0); }
  cplx amp_v() const { return vec_(1); }
  const Eigen::Vector2cd& vector() const { return vec_; }

  // The state orthogonal to this one, -conj(v)|H> + conj(h)|V>.
  PureState2 orthogonal() const;
  // Representative with the first non-negligible amplitude real and positive.
  PureState2 canonical() const;
  Eigen::Matrix2cd projector() const { return vec_ * vec_.adjoint(); }

  // Bloch polar and azimuthal angles in radians.
  double bloch_theta() const;
  double bloch_phi() const;

 private:
  explicit PureState2(const Eigen::Vector2cd& v) : vec_(v) {}
  Eigen::Vector2cd vec_;
};

/// 2x2 unitary Jones matrix.
class Unitary2 {
 public:
  /// Throws std::invalid_argument unless U^dagger U = I within 1e-12.
  explicit Unitary2(const Eigen::Matrix2cd& m);
  static Unitary2 identity() { return Unitary2(Eigen::Matrix2cd::Identity()); }

  const Eigen::Matrix2cd& matrix() const { return m_; }
  Unitary2 adjoint() const { return Unitary2(m_.adjoint(), Trusted{}); }

  Unitary2 operator*(const Unitary2& rhs) const { return Unitary2(m_ * rhs.m_, Trusted{}); }
  PureState2 operator*(const PureState2& s) const { return PureState2::from_vector(m_ * s.vector()); }

 private:
  struct Trusted {};
  Unitary2(const Eigen::Matrix2cd& m, Trusted) : m_(m) {}
  Eigen::Matrix2cd m_;
};

Unitary2 pauli_x();
Unitary2 pauli_y();
Unitary2 pauli_z();
// i * sigma_y = [[0, 1], [-1, 0]].
Unitary2 i_sigma_y();
// exp(-i angle sigma_z / 2).
Unitary2 rz(double angle_rad);

/// Half-wave plate with fast axis at `angle_deg`: [[cos2t, sin2t], [sin2t, -cos2t]].
Unitary2 hwp_unitary(double angle_deg);
/// Quarter-wave plate with fast axis at `angle_deg`: R(t) diag(1, -i) R(-t).
/// The retardance sign is the one under which a QWP at 45 deg followed by a
/// HWP at t' projects onto (|H> + e^{i phi}|V>)/sqrt2 with phi = 4(t' - 22.5).
Unitary2 qwp_unitary(double angle_deg);

enum class PlateKind { hwp, qwp };

struct WaveplateSetting {
  PlateKind kind;
  double angle_deg;  // normalized to [0, 180) on construction via make()

  static WaveplateSetting make(PlateKind kind, double angle_deg) {
    return {kind, normalize_angle_deg(angle_deg)};
  }
  Unitary2 unitary() const;
};

bool equal_up_to_phase(const Unitary2& a, const Unitary2& b, double tol = kValidationTol);
bool equal_up_to_phase(const PureState2& a, const PureState2& b, double tol = kValidationTol);

/// min over gamma of the Frobenius norm of a - e^{i gamma} b.
double phase_distance(const Unitary2& a, const Unitary2& b);

/// Hermitian, PSD, unit-trace operator of dimension 2 or 4.
///
/// Two-qubit matrices use the tensor order signal (x) idler, i.e. basis
/// index 2*s + i with H = 0, V = 1.
class DensityMatrix {
 public:
  /// Validates Hermiticity, trace and smallest eigenvalue within 1e-10;
  /// throws std::invalid_argument on violation or on dim not in {2, 4}.
  explicit DensityMatrix(const Eigen::MatrixXcd& m);
  /// Symmetrizes and renormalizes before validation. Used for results of
  /// channel arithmetic that are physical up to rounding.
  static DensityMatrix from_unnormalized(const Eigen::MatrixXcd& m);
  static DensityMatrix pure(const PureState2& s);
  static DensityMatrix pure(const Eigen::VectorXcd& v);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  DensityMatrix conjugated(const Eigen::MatrixXcd& u) const;

 private:
  struct Trusted {};
  DensityMatrix(const Eigen::MatrixXcd& m, Trusted) : m_(m) {}
  Eigen::MatrixXcd m_;
};

/// |psi-> = (|HV> - |VH>)/sqrt2.
Eigen::Vector4cd singlet_vector();
DensityMatrix singlet();

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b);
Eigen::Vector4cd kron(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b);
// Embeds a single-arm operator into the two-qubit space.
Eigen::Matrix4cd on_arm(const Eigen::Matrix2cd& op, Arm arm);

/// <psi|rho|psi>. Throws std::invalid_argument on dimension mismatch.
double fidelity_pure(const DensityMatrix& rho, const Eigen::VectorXcd& target);
double fidelity_pure(const DensityMatrix& rho, const PureState2& target);
/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double purity(const DensityMatrix& rho);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
Eigen::MatrixXcd partial_trace(const DensityMatrix& rho4, Arm traced_out);
DensityMatrix reduced_state(const DensityMatrix& rho4, Arm keep);

struct Projection {
  double probability = 0.0;
  // Empty when the outcome is impossible (probability < 1e-14).
  std::optional<DensityMatrix> conditional;

  bool impossible() const { return !conditional.has_value(); }
};

/// Projects `arm` of a two-qubit state onto `proj` and returns the outcome
/// probability with the renormalized state of the other arm.
Projection project_arm(const DensityMatrix& rho4, Arm arm, const PureState2& proj);

}  // namespace ffsim
