#pragma once

// tau-modes: orthonormal input/output spatial mode pairs that each leave the
// fiber at a single well-defined delay, found by greedy SVD deflation of the
// time-resolved transmission matrix.

#include <vector>

#include "tbf/spectral.hpp"
#include "tbf/types.hpp"

namespace tbf {

struct TauMode {
  std::size_t delay_bin = 0;
  double delay_s = 0.0;
  CVector input_vec;   // unit norm; largest-magnitude entry real and non-negative
  CVector output_vec;  // unit norm
  double strength = 0.0;  // leading singular value at the selected delay
};

struct TauModeSet {
  std::vector<TauMode> modes;  // extraction order
  TimeGrid source_grid;
  bool truncated = false;  // fewer modes than requested were found
};

struct TauExtractionOptions {
  std::size_t count = 1;
  double stop_fraction = 0.05;
};

/// Deflation loop: per round, SVD every slice, take the global largest leading
/// singular value (earliest slice on exact ties), record the triple, then
/// project it out on both sides. Stops once the leading value falls below
/// stop_fraction times the first one, or the remaining rank is exhausted.
TauModeSet construct_tau_modes(const Trtm& trtm, const TauExtractionOptions& options);

/// Largest singular value of each slice of `data`.
std::vector<double> leading_singular_values(const ComplexTensor3& data);

/// Applies (I - |u><u|) T(t) (I - |v><v|) to every slice in place.
void deflate(ComplexTensor3& data, const CVector& u, const CVector& v);

/// Rotates (u, v) by a common phase so v's largest-magnitude entry is real >= 0.
void fix_gauge(CVector& input_vec, CVector& output_vec);

struct PrincipalMode {
  double group_delay_s = 0.0;
  CVector vector;
};

/// Eigenpairs of the Wigner-Smith operator -i T^H dT/dw at grid index
/// center_index, using a one-step central difference. Sorted by delay.
std::vector<PrincipalMode> wigner_smith_modes(const Mstm& mstm, std::size_t center_index);

struct TimeBinBasis {
  std::size_t dimension = 0;
  std::vector<TauMode> members;  // delays strictly increasing
  double nominal_spacing_s = 0.0;
  double min_separation_s = 0.0;
  double max_deviation_s = 0.0;  // worst |delay - (first + k * spacing)|

  std::vector<double> delays_s() const;
};

/// Thrown when no d-subset satisfies the separation constraint.
class InfeasibleBasisError : public DomainError {
 public:
  InfeasibleBasisError(const std::string& what, std::size_t largest_feasible)
      : DomainError(what), largest_feasible_(largest_feasible) {}
  std::size_t largest_feasible() const { return largest_feasible_; }

 private:
  std::size_t largest_feasible_;
};

/// Chooses d modes whose delays best follow an arithmetic progression of step
/// target_spacing_s. Every mode is tried as the anchor; for each ideal slot the
/// nearest unused later mode respecting min_sep_s is taken greedily, and the
/// anchor with the smallest summed squared deviation wins (earliest on ties).
TimeBinBasis select_time_bin_basis(const TauModeSet& set, std::size_t d, double target_spacing_s,
                                   double min_sep_s);

}  // namespace tbf
