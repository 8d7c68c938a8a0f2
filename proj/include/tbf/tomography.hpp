#pragma once

// Measurement tomography of a single-outcome time-bin measurement: probe
// states, the linear forward map Y_n = tr[rho_n O], and a least-squares fit
// of O over the positive semidefinite cone.

#include <optional>
#include <string>
#include <vector>

#include "tbf/mub.hpp"
#include "tbf/types.hpp"

namespace tbf {

struct ProbeLabel {
  enum class Kind { computational, subspace };
  Kind kind = Kind::computational;
  std::size_t n = 0;
  std::size_t m = 0;            // subspace only
  std::size_t phase_index = 0;  // subspace only: phase = phase_index * pi / 2

  double phase_rad() const;
  std::string to_string() const;
};

struct ProbeSet {
  std::size_t dim = 0;
  std::vector<StateVector> states;
  std::vector<ProbeLabel> labels;

  std::size_t size() const { return states.size(); }
};

/// |n> for every n, then (|n> + e^{i l pi/2}|m>)/sqrt(2) for n < m, l = 0..3.
ProbeSet build_probe_set(std::size_t d);

struct MeasOperator {
  CMatrix matrix;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

struct TomoDataset {
  ProbeSet probes;
  std::vector<double> yields;
  std::optional<std::vector<long long>> counts_total;
};

TomoDataset forward_yields(const MeasOperator& op, const ProbeSet& probes);

/// Orthonormal (Frobenius) basis of d x d Hermitian matrices: E_ii, then
/// (E_ij + E_ji)/sqrt2 and i(E_ij - E_ji)/sqrt2 for i < j.
std::vector<CMatrix> hermitian_basis(std::size_t d);

/// Real matrix A with A(n, j) = tr[rho_n H_j] for the Hermitian basis H_j.
Eigen::MatrixXd measurement_map(const ProbeSet& probes);

/// Rank of the measurement map (singular values above 1e-10 of the largest).
std::size_t measurement_rank(const ProbeSet& probes);

/// Nearest PSD matrix in Frobenius norm: Hermitian part with negative
/// eigenvalues set to zero.
CMatrix project_psd(const CMatrix& m);

class UnderdeterminedError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct ReconstructOptions {
  bool scale_free = true;
  std::size_t max_iterations = 10000;
  double relative_tolerance = 1e-12;
  bool keep_history = true;
};

struct Reconstruction {
  MeasOperator op;           // trace-normalized
  double raw_trace = 0.0;    // trace of the fitted operator in the yields' units
  double scale = 1.0;        // yield normalization used by the solver
  double residual = 0.0;     // final ||Y - M(O)||^2 in the yields' units
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // solver units, one entry per iterate
};

/// argmin_{O >= 0} ||Y - M(O)||^2 by projected gradient descent with step
/// 1/L, L the largest eigenvalue of M^T M, started from the projected
/// unconstrained least-squares solution. With scale_free, yields are divided
/// by their mean first so the stopping rule does not depend on count units.
Reconstruction reconstruct(const TomoDataset& dataset, const ReconstructOptions& options = {});

struct Fidelity {
  double value = 0.0;
  double clip = 0.0;  // |raw - value| removed by clipping to [0, 1]
};

/// Re <v|O|v> of a trace-normalized operator.
Fidelity fidelity(const MeasOperator& op, const StateVector& target);

}  // namespace tbf
