#include "tbf/tau_modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tbf/parallel.hpp"

namespace tbf {
namespace {

// Below this fraction of the first leading value a slice is numerically empty.
constexpr double kRankFloor = 1e-10;

Eigen::Index largest_entry(const CVector& v) {
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > mag) {
      mag = std::abs(v(i));
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<double> leading_singular_values(const ComplexTensor3& data) {
  std::vector<double> sigma(data.slices(), 0.0);
  parallel_for(data.slices(), [&](std::size_t k) {
    const CMatrix slice = data.slice(k);
    Eigen::BDCSVD<CMatrix> svd(slice);
    sigma[k] = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  });
  return sigma;
}

void deflate(ComplexTensor3& data, const CVector& u, const CVector& v) {
  parallel_for(data.slices(), [&](std::size_t k) {
    auto t = data.slice(k);
    // (I - u u^H) T (I - v v^H) without forming the projectors.
    const CVector tv = t * v;
    RowMajorCMatrix r = t - tv * v.adjoint();
    const Eigen::Matrix<Complex, 1, Eigen::Dynamic> ur = u.adjoint() * r;
    r -= u * ur;
    t = r;
  });
}

void fix_gauge(CVector& input_vec, CVector& output_vec) {
  if (input_vec.size() == 0) return;
  const Complex lead = input_vec(largest_entry(input_vec));
  const double mag = std::abs(lead);
  if (mag == 0.0) return;
  const Complex phase = std::conj(lead) / mag;
  input_vec *= phase;
  output_vec *= phase;
  input_vec(largest_entry(input_vec)) = Complex(std::abs(input_vec(largest_entry(input_vec))), 0.0);
}

TauModeSet construct_tau_modes(const Trtm& trtm, const TauExtractionOptions& options) {
  trtm.validate();
  const std::size_t max_count = std::min(trtm.inputs(), trtm.outputs());
  if (options.count == 0 || options.count > max_count)
    throw DomainError("tau-mode count must lie in [1, min(M_in, M_out)]");
  if (!(options.stop_fraction > 0.0 && options.stop_fraction <= 1.0))
    throw DomainError("stop_fraction must lie in (0, 1]");

  TauModeSet result;
  result.source_grid = trtm.grid;
  ComplexTensor3 current = trtm.data;
  double first_sigma = 0.0;

  for (std::size_t n = 0; n < options.count; ++n) {
    const std::vector<double> sigma = leading_singular_values(current);
    std::size_t best = 0;
    for (std::size_t k = 1; k < sigma.size(); ++k)
      if (sigma[k] > sigma[best]) best = k;

    const double top = sigma[best];
    if (n == 0) first_sigma = top;
    if (!(top > 0.0) || top < kRankFloor * first_sigma || top < options.stop_fraction * first_sigma) {
      result.truncated = true;
      break;
    }

    Eigen::BDCSVD<CMatrix> svd(CMatrix(current.slice(best)), Eigen::ComputeThinU | Eigen::ComputeThinV);
    TauMode mode;
    mode.delay_bin = best;
    mode.delay_s = trtm.grid.time_s(best);
    mode.strength = svd.singularValues()(0);
    mode.output_vec = svd.matrixU().col(0);
    mode.input_vec = svd.matrixV().col(0);
    mode.output_vec.normalize();
    mode.input_vec.normalize();
    fix_gauge(mode.input_vec, mode.output_vec);

    deflate(current, mode.output_vec, mode.input_vec);
    result.modes.push_back(std::move(mode));
  }
  return result;
}

std::vector<PrincipalMode> wigner_smith_modes(const Mstm& mstm, std::size_t center_index) {
  mstm.validate();
  if (center_index == 0 || center_index + 1 >= mstm.grid.samples)
    throw DomainError("Wigner-Smith center index must be interior to the frequency grid");
  if (mstm.inputs() != mstm.outputs())
    throw DimensionError("Wigner-Smith operator needs a square transmission matrix");

  const double dw = 2.0 * kPi * mstm.grid.step_hz;
  const CMatrix t = mstm.data.slice(center_index);
  const CMatrix derivative =
      (CMatrix(mstm.data.slice(center_index + 1)) - CMatrix(mstm.data.slice(center_index - 1))) / (2.0 * dw);
  const CMatrix q = Complex(0.0, -1.0) * (t.adjoint() * derivative);
  const CMatrix herm = 0.5 * (q + q.adjoint());

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  std::vector<PrincipalMode> out;
  out.reserve(static_cast<std::size_t>(herm.rows()));
  for (Eigen::Index i = 0; i < herm.rows(); ++i) {
    PrincipalMode pm;
    pm.group_delay_s = eig.eigenvalues()(i);
    pm.vector = eig.eigenvectors().col(i);
    CVector dummy = pm.vector;
    fix_gauge(pm.vector, dummy);
    out.push_back(std::move(pm));
  }
  return out;  // SelfAdjointEigenSolver sorts ascending
}

std::vector<double> TimeBinBasis::delays_s() const {
  std::vector<double> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.delay_s);
  return out;
}

namespace {

struct Fit {
  std::vector<std::size_t> picks;
  double cost = std::numeric_limits<double>::infinity();
};

// Greedy arithmetic-progression fit over delay-sorted candidates.
Fit fit_progression(const std::vector<double>& delays, std::size_t d, double spacing, double min_sep) {
  Fit best;
  for (std::size_t anchor = 0; anchor < delays.size(); ++anchor) {
    std::vector<std::size_t> picks{anchor};
    double cost = 0.0;
    bool ok = true;
    for (std::size_t k = 1; k < d && ok; ++k) {
      const double ideal = delays[anchor] + static_cast<double>(k) * spacing;
      const double floor = delays[picks.back()] + min_sep;
      std::size_t choice = delays.size();
      double dev = std::numeric_limits<double>::infinity();
      for (std::size_t j = picks.back() + 1; j < delays.size(); ++j) {
        if (delays[j] < floor) continue;
        const double e = std::abs(delays[j] - ideal);
        if (e < dev) {
          dev = e;
          choice = j;
        }
      }
      if (choice == delays.size()) {
        ok = false;
      } else {
        picks.push_back(choice);
        cost += dev * dev;
      }
    }
    if (ok && cost < best.cost) {
      best.picks = std::move(picks);
      best.cost = cost;
    }
  }
  return best;
}

}  // namespace

TimeBinBasis select_time_bin_basis(const TauModeSet& set, std::size_t d, double target_spacing_s,
                                   double min_sep_s) {
  if (d < 1) throw DomainError("basis dimension must be positive");
  if (!(target_spacing_s > 0.0)) throw DomainError("target spacing must be positive");
  if (!(min_sep_s > 0.0)) throw DomainError("minimum separation must be positive");

  std::vector<std::size_t> order(set.modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.modes[a].delay_s < set.modes[b].delay_s;
  });
  std::vector<double> delays;
  delays.reserve(order.size());
  for (std::size_t i : order) delays.push_back(set.modes[i].delay_s);

  Fit fit = set.modes.size() >= d ? fit_progression(delays, d, target_spacing_s, min_sep_s) : Fit{};
  if (fit.picks.empty()) {
    std::size_t feasible = std::min(d, set.modes.size());
    while (feasible > 1 && fit_progression(delays, feasible, target_spacing_s, min_sep_s).picks.empty())
      --feasible;
    if (set.modes.empty()) feasible = 0;
    std::ostringstream msg;
    msg << "cannot select " << d << " time bins with separation >= " << min_sep_s * 1e12
        << " ps; largest achievable dimension is " << feasible;
    throw InfeasibleBasisError(msg.str(), feasible);
  }

  TimeBinBasis basis;
  basis.dimension = d;
  basis.nominal_spacing_s = target_spacing_s;
  basis.min_separation_s = min_sep_s;
  for (std::size_t p : fit.picks) basis.members.push_back(set.modes[order[p]]);
  const double start = basis.members.front().delay_s;
  for (std::size_t k = 0; k < d; ++k)
    basis.max_deviation_s = std::max(
        basis.max_deviation_s,
        std::abs(basis.members[k].delay_s - (start + static_cast<double>(k) * target_spacing_s)));
  return basis;
}

}  // namespace tbf
