#include "tbf/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace tbf {

double ProbeLabel::phase_rad() const {
  return kind == Kind::subspace ? 0.5 * kPi * static_cast<double>(phase_index) : 0.0;
}

std::string ProbeLabel::to_string() const {
  std::ostringstream s;
  if (kind == Kind::computational)
    s << "comp(" << n << ")";
  else
    s << "sub(" << n << "," << m << ",l=" << phase_index << ")";
  return s.str();
}

ProbeSet build_probe_set(std::size_t d) {
  if (d < 2) throw DomainError("probe sets need d >= 2");
  ProbeSet ps;
  ps.dim = d;
  for (std::size_t n = 0; n < d; ++n) {
    ps.states.push_back(computational_state(d, n));
    ps.labels.push_back({ProbeLabel::Kind::computational, n, 0, 0});
  }
  static const Complex phases[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = n + 1; m < d; ++m)
      for (std::size_t l = 0; l < 4; ++l) {
        StateVector s;
        s.amplitudes = CVector::Zero(static_cast<Eigen::Index>(d));
        s.amplitudes(static_cast<Eigen::Index>(n)) = 1.0 / std::sqrt(2.0);
        s.amplitudes(static_cast<Eigen::Index>(m)) = phases[l] / std::sqrt(2.0);
        ps.states.push_back(std::move(s));
        ps.labels.push_back({ProbeLabel::Kind::subspace, n, m, l});
      }
  return ps;
}

TomoDataset forward_yields(const MeasOperator& op, const ProbeSet& probes) {
  if (op.dim() != probes.dim) throw DimensionError("operator and probe set dimensions differ");
  TomoDataset ds;
  ds.probes = probes;
  ds.yields.reserve(probes.size());
  for (const auto& s : probes.states) ds.yields.push_back(s.amplitudes.dot(op.matrix * s.amplitudes).real());
  return ds;
}

std::vector<CMatrix> hermitian_basis(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  std::vector<CMatrix> basis;
  basis.reserve(d * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(std::move(e));
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      CMatrix sym = CMatrix::Zero(n, n);
      sym(i, j) = r;
      sym(j, i) = r;
      basis.push_back(std::move(sym));
      CMatrix asym = CMatrix::Zero(n, n);
      asym(i, j) = Complex(0.0, r);
      asym(j, i) = Complex(0.0, -r);
      basis.push_back(std::move(asym));
    }
  return basis;
}

Eigen::MatrixXd measurement_map(const ProbeSet& probes) {
  const auto basis = hermitian_basis(probes.dim);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(probes.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t n = 0; n < probes.size(); ++n) {
    const CVector& psi = probes.states[n].amplitudes;
    for (std::size_t j = 0; j < basis.size(); ++j)
      a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = psi.dot(basis[j] * psi).real();
  }
  return a;
}

std::size_t measurement_rank(const ProbeSet& probes) {
  const Eigen::MatrixXd a = measurement_map(probes);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10 * s(0)) ++rank;
  return rank;
}

CMatrix project_psd(const CMatrix& m) {
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  CMatrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

namespace {

// Coordinates in the hermitian_basis ordering, written out to avoid d^2 dense products.
Eigen::VectorXd to_coords(const CMatrix& m) {
  const Eigen::Index d = m.rows();
  Eigen::VectorXd x(d * d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) x(k++) = m(i, i).real();
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Complex z = 0.5 * (m(i, j) + std::conj(m(j, i)));
      x(k++) = r2 * z.real();
      x(k++) = r2 * z.imag();
    }
  return x;
}

CMatrix from_coords(const Eigen::VectorXd& x, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix m = CMatrix::Zero(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = x(k++);
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Complex z(r * x(k), r * x(k + 1));
      k += 2;
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  return m;
}

}  // namespace

Reconstruction reconstruct(const TomoDataset& dataset, const ReconstructOptions& options) {
  const ProbeSet& probes = dataset.probes;
  if (dataset.yields.size() != probes.size()) throw DimensionError("yield count does not match the probe set");
  for (double y : dataset.yields)
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("yields must be finite and non-negative");

  const std::size_t d = probes.dim;
  const Eigen::MatrixXd a = measurement_map(probes);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(0) > 0.0 && sv(i) > 1e-10 * sv(0)) ++rank;
  if (rank < d * d) {
    std::ostringstream msg;
    msg << "probe set is not tomographically complete: measurement map rank " << rank << " < " << d * d;
    throw UnderdeterminedError(msg.str());
  }

  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(dataset.yields.data(),
                                                        static_cast<Eigen::Index>(dataset.yields.size()));
  Reconstruction rec;
  if (options.scale_free) {
    const double mean = y.mean();
    if (!(mean > 0.0)) throw DomainError("all yields are zero; nothing to normalize");
    rec.scale = mean;
    y /= mean;
  }

  const double lipschitz = sv(0) * sv(0);
  const double step = 1.0 / lipschitz;
  auto objective = [&](const Eigen::VectorXd& x) { return (y - a * x).squaredNorm(); };

  Eigen::VectorXd x = to_coords(project_psd(from_coords(svd.solve(y), d)));
  double f = objective(x);
  if (options.keep_history) rec.objective_history.push_back(f);
  const double floor = 1e-30 * std::max(1.0, y.squaredNorm());

  std::size_t it = 0;
  while (it < options.max_iterations) {
    if (f <= floor) {
      rec.converged = true;
      break;
    }
    const Eigen::VectorXd grad = a.transpose() * (a * x - y);
    const Eigen::VectorXd next = to_coords(project_psd(from_coords(x - step * grad, d)));
    const double f_next = objective(next);
    ++it;
    // exact projected gradient never increases f; a rise is rounding, so stop here
    if (f_next >= f) {
      rec.converged = true;
      break;
    }
    const double decrease = f - f_next;
    x = next;
    const double f_prev = f;
    f = f_next;
    if (options.keep_history) rec.objective_history.push_back(f);
    if (decrease <= options.relative_tolerance * f_prev) {
      rec.converged = true;
      break;
    }
  }
  rec.iterations = it;

  const CMatrix fitted = project_psd(from_coords(x, d));
  const double trace = fitted.trace().real();
  if (!(trace > 0.0)) throw DomainError("fitted operator has zero trace");
  rec.raw_trace = trace * rec.scale;
  rec.residual = f * rec.scale * rec.scale;
  rec.op.matrix = fitted / trace;
  return rec;
}

Fidelity fidelity(const MeasOperator& op, const StateVector& target) {
  if (op.dim() != target.dim()) throw DimensionError("operator and target dimensions differ");
  const double raw = target.amplitudes.dot(op.matrix * target.amplitudes).real();
  Fidelity f;
  f.value = std::clamp(raw, 0.0, 1.0);
  f.clip = std::abs(raw - f.value);
  return f;
}

}  // namespace tbf
