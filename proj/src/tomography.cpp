#include "ffsim/tomography.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <deque>
#include <numeric>

namespace ffsim {

PureState2 StationAngles::transmitted() const {
  const Unitary2 station = hwp_unitary(hwp_deg) * qwp_unitary(qwp_deg);
  return station.adjoint() * PureState2::H();
}

std::vector<LabeledProjector> projectors_for(const TomographySetting& setting) {
  const PureState2 s_t = setting.signal.transmitted();
  const PureState2 s_r = s_t.orthogonal();
  if (!setting.idler) {
    return {{"H", Eigen::MatrixXcd(s_t.projector())}, {"V", Eigen::MatrixXcd(s_r.projector())}};
  }
  const PureState2 i_t = setting.idler->transmitted();
  const PureState2 i_r = i_t.orthogonal();
  return {{"HH", Eigen::MatrixXcd(kron(s_t.projector(), i_t.projector()))},
          {"HV", Eigen::MatrixXcd(kron(s_t.projector(), i_r.projector()))},
          {"VH", Eigen::MatrixXcd(kron(s_r.projector(), i_t.projector()))},
          {"VV", Eigen::MatrixXcd(kron(s_r.projector(), i_r.projector()))}};
}

namespace {

constexpr StationAngles kHV{0.0, 0.0};
constexpr StationAngles kRL{0.0, 45.0};
constexpr StationAngles kDA{22.5, 45.0};

}  // namespace

std::vector<TomographySetting> single_qubit_suite() {
  return {{kHV, std::nullopt}, {kRL, std::nullopt}, {kDA, std::nullopt}};
}

std::vector<TomographySetting> two_qubit_suite() {
  return {{kHV, kHV}, {kHV, kDA}, {kHV, kRL}, {kDA, kRL}, {kDA, kDA},
          {kDA, kHV}, {kRL, kHV}, {kRL, kDA}, {kRL, kRL}};
}

std::vector<TomographySetting> two_qubit_suite_with_repeat() {
  return {{kHV, kHV}, {kHV, kDA}, {kHV, kRL}, {kDA, kRL}, {kDA, kDA},
          {kDA, kRL}, {kRL, kHV}, {kRL, kDA}, {kRL, kRL}};
}

namespace {

struct Measurement {
  std::vector<Eigen::MatrixXcd> ops;
  int dim = 0;
};

Measurement collect(const std::vector<TomographySetting>& settings, int dim) {
  Measurement m;
  m.dim = dim;
  for (const auto& s : settings) {
    if (s.dim() != dim) {
      throw std::invalid_argument("tomography: setting dimension " + std::to_string(s.dim()) +
                                  " does not match requested dimension " + std::to_string(dim));
    }
    for (auto& p : projectors_for(s)) m.ops.push_back(std::move(p.op));
  }
  return m;
}

double born(const Eigen::MatrixXcd& op, const Eigen::MatrixXcd& rho) {
  // Tr[op rho] for Hermitian arguments.
  return (op.cwiseProduct(rho.transpose())).sum().real();
}

// Real coordinates of a Hermitian matrix: diagonal entries, then (Re, Im) of
// each upper off-diagonal entry.
Eigen::MatrixXcd hermitian_basis(int dim, int m) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
  if (m < dim) {
    e(m, m) = 1.0;
    return e;
  }
  int k = dim;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      if (k == m) {
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        return e;
      }
      if (k + 1 == m) {
        e(i, j) = cplx(0.0, 1.0);
        e(j, i) = cplx(0.0, -1.0);
        return e;
      }
      k += 2;
    }
  throw std::logic_error("hermitian_basis: index out of range");
}

int lower_count(int dim) { return dim * (dim + 1) / 2; }

Eigen::MatrixXcd unpack_lower(const Eigen::VectorXd& x, int dim) {
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(dim, dim);
  int k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) {
      l(i, j) = cplx(x(2 * k), x(2 * k + 1));
      ++k;
    }
  return l;
}

Eigen::VectorXd pack_lower(const Eigen::MatrixXcd& l) {
  const int dim = static_cast<int>(l.rows());
  Eigen::VectorXd x(2 * lower_count(dim));
  int k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) {
      x(2 * k) = l(i, j).real();
      x(2 * k + 1) = l(i, j).imag();
      ++k;
    }
  return x;
}

class LsObjective {
 public:
  LsObjective(const Measurement& m, const std::vector<double>& p) : m_(m), p_(p) {}

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const int d = m_.dim;
    const Eigen::MatrixXcd l = unpack_lower(x, d);
    const Eigen::MatrixXcd a = l * l.adjoint();
    const double t = a.trace().real();
    const Eigen::MatrixXcd rho = a / t;
    double cost = 0.0;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t k = 0; k < m_.ops.size(); ++k) {
      const double r = born(m_.ops[k], rho) - p_[k];
      cost += r * r;
      if (grad) g += 2.0 * r * m_.ops[k];
    }
    if (grad) {
      const double g_rho = born(g, rho);
      const Eigen::MatrixXcd gp = (g - g_rho * Eigen::MatrixXcd::Identity(d, d)) / t;
      const Eigen::MatrixXcd dl = 2.0 * gp * l;
      grad->resize(x.size());
      int k = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) {
          (*grad)(2 * k) = dl(i, j).real();
          (*grad)(2 * k + 1) = dl(i, j).imag();
          ++k;
        }
    }
    return cost;
  }

 private:
  const Measurement& m_;
  const std::vector<double>& p_;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

LbfgsResult lbfgs(const LsObjective& f, Eigen::VectorXd x, const LsOptions& opts) {
  constexpr int kMemory = 12;
  constexpr double kArmijo = 1e-4;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  Eigen::VectorXd g;
  double fx = f(x, &g);
  LbfgsResult out;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    out.iterations = it;
    if (fx == 0.0 || g.lpNorm<Eigen::Infinity>() == 0.0) {
      out.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd dir = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += s_hist[i] * (alpha[i] - beta);
    }
    dir = -dir;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    if (s_hist.empty()) step = std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd x_new, g_new;
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent possible at working precision.
      out.converged = true;
      break;
    }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double change = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    if (change <= opts.relative_cost_change * fx) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.cost = fx;
  return out;
}

}  // namespace

std::vector<double> probabilities_from_state(const DensityMatrix& rho,
                                             const std::vector<TomographySetting>& settings) {
  std::vector<double> out;
  for (const auto& s : settings) {
    if (s.dim() != rho.dim()) throw std::invalid_argument("probabilities_from_state: dimension mismatch");
    for (const auto& p : projectors_for(s)) out.push_back(std::max(0.0, born(p.op, rho.matrix())));
  }
  return out;
}

std::uint64_t CountRecord::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<CountRecord> sample_counts(const std::vector<TomographySetting>& settings,
                                       const std::vector<double>& probs, std::uint64_t n_per_setting,
                                       std::mt19937_64& rng, NoiseModel model) {
  std::vector<CountRecord> out;
  std::size_t offset = 0;
  for (const auto& s : settings) {
    const int k = s.outcomes();
    if (offset + k > probs.size()) throw std::invalid_argument("sample_counts: too few probabilities");
    CountRecord rec{s, std::vector<std::uint64_t>(k, 0)};
    double norm = 0.0;
    for (int j = 0; j < k; ++j) {
      if (!(probs[offset + j] >= 0.0)) throw std::invalid_argument("sample_counts: negative probability");
      norm += probs[offset + j];
    }
    if (!(norm > 0.0)) throw std::invalid_argument("sample_counts: zero probability mass in a setting");
    if (model == NoiseModel::multinomial) {
      // Sequential conditional binomials.
      std::uint64_t remaining = n_per_setting;
      double mass_left = 1.0;
      for (int j = 0; j < k && remaining > 0; ++j) {
        const double p = probs[offset + j] / norm;
        if (j == k - 1) {
          rec.counts[j] = remaining;
          break;
        }
        const double cond = mass_left > 0.0 ? std::clamp(p / mass_left, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> draw(remaining, cond);
        rec.counts[j] = draw(rng);
        remaining -= rec.counts[j];
        mass_left -= p;
      }
    } else {
      for (int j = 0; j < k; ++j) {
        const double mean = static_cast<double>(n_per_setting) * probs[offset + j] / norm;
        if (mean > 0.0) {
          std::poisson_distribution<std::uint64_t> draw(mean);
          rec.counts[j] = draw(rng);
        }
      }
    }
    out.push_back(std::move(rec));
    offset += k;
  }
  if (offset != probs.size()) throw std::invalid_argument("sample_counts: too many probabilities");
  return out;
}

std::vector<CountRecord> sample_counts(const std::vector<TomographySetting>& settings,
                                       const std::vector<double>& probs, std::uint64_t n_per_setting,
                                       std::uint64_t seed, NoiseModel model) {
  std::mt19937_64 rng(seed);
  return sample_counts(settings, probs, n_per_setting, rng, model);
}

std::vector<double> estimate_probs(const CountRecord& record) {
  const std::uint64_t total = record.total();
  if (total == 0) throw std::invalid_argument("estimate_probs: record has zero total counts");
  std::vector<double> out;
  out.reserve(record.counts.size());
  for (auto c : record.counts) out.push_back(static_cast<double>(c) / static_cast<double>(total));
  return out;
}

std::vector<double> estimate_probs(const std::vector<CountRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) {
    const auto p = estimate_probs(r);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double ls_cost(const std::vector<TomographySetting>& settings, const std::vector<double>& probs,
               const DensityMatrix& rho) {
  const Measurement m = collect(settings, rho.dim());
  if (m.ops.size() != probs.size()) throw std::invalid_argument("ls_cost: probability count mismatch");
  double c = 0.0;
  for (std::size_t k = 0; k < m.ops.size(); ++k) {
    const double r = born(m.ops[k], rho.matrix()) - probs[k];
    c += r * r;
  }
  return c;
}

TomographyResult ls_reconstruct(const std::vector<TomographySetting>& settings,
                                const std::vector<double>& probs, int dim, const LsOptions& opts) {
  if (dim != 2 && dim != 4) throw std::invalid_argument("ls_reconstruct: dim must be 2 or 4");
  const Measurement m = collect(settings, dim);
  if (m.ops.size() != probs.size()) {
    throw std::invalid_argument("ls_reconstruct: " + std::to_string(probs.size()) +
                                " probabilities for " + std::to_string(m.ops.size()) + " projectors");
  }
  for (double p : probs) {
    if (!std::isfinite(p)) throw std::invalid_argument("ls_reconstruct: non-finite probability");
  }

  // Measurement matrix in real Hermitian coordinates.
  const int n = dim * dim;
  const int rows = static_cast<int>(m.ops.size());
  Eigen::MatrixXd a(rows, n);
  std::vector<Eigen::MatrixXcd> basis;
  for (int j = 0; j < n; ++j) basis.push_back(hermitian_basis(dim, j));
  for (int k = 0; k < rows; ++k)
    for (int j = 0; j < n; ++j) a(k, j) = born(m.ops[k], basis[j]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  int rank = 0;
  for (int j = 0; j < sv.size(); ++j)
    if (sv(j) > 1e-10 * sv(0)) ++rank;
  if (rank < n) throw NotInformationallyComplete(rank, n);

  TomographyResult result;
  result.condition_number = sv(0) / sv(sv.size() - 1);
  result.ill_conditioned = result.condition_number > 1e6;

  // Linear inversion, clipped to the PSD cone and mixed slightly with the
  // identity so the Cholesky factor exists.
  const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(probs.data(), rows);
  const Eigen::VectorXd theta = svd.solve(p);
  Eigen::MatrixXcd lin = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 0; j < n; ++j) lin += theta(j) * basis[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lin);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  if (!(ev.sum() > 0.0)) ev.setOnes();
  ev /= ev.sum();
  Eigen::MatrixXcd start = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  constexpr double kMix = 1e-3;
  start = (1.0 - kMix) * start + kMix * Eigen::MatrixXcd::Identity(dim, dim) / dim;
  start = 0.5 * (start + start.adjoint());
  Eigen::LLT<Eigen::MatrixXcd> llt(start);
  const Eigen::MatrixXcd l0 = llt.matrixL();

  const LsObjective objective(m, probs);
  const LbfgsResult fit = lbfgs(objective, pack_lower(l0), opts);

  const Eigen::MatrixXcd l = unpack_lower(fit.x, dim);
  result.rho = DensityMatrix::from_unnormalized(l * l.adjoint());
  result.residual = fit.cost;
  result.iterations = fit.iterations;
  result.converged = fit.converged;
  return result;
}

}  // namespace ffsim
