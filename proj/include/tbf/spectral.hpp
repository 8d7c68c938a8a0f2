#pragma once

// Exact discrete Fourier conversion between the multi-spectral transmission
// matrix (frequency axis) and the time-resolved transmission matrix (delay axis).
//
// Convention: a transfer function exp(+i * dw * tau) (the fiber model's
// exp(i beta(w) L) with group delay tau) maps to a peak at delay +tau. The
// transform kernel is exp(-i * dw * t) on the reported delay axis, i.e. the
// exp(+i w t) kernel evaluated on t -> -t. Both directions use the unitary
// 1/sqrt(N) normalization, so a flat unit transfer function gives sqrt(N) at
// zero delay.

#include <optional>
#include <string>
#include <vector>

#include "tbf/fiber_model.hpp"
#include "tbf/types.hpp"

namespace tbf {

struct TimeGrid {
  double step_s = 1.0;
  std::size_t samples = 1;
  double origin_s = 0.0;

  static TimeGrid from_freq_grid(const FreqGrid& g);

  void validate() const;
  double time_s(std::size_t j) const { return origin_s + static_cast<double>(j) * step_s; }
  double extent_s() const { return static_cast<double>(samples) * step_s; }
  /// Bin whose time is closest to t, wrapping circularly.
  std::size_t nearest_bin(double t) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct Trtm {
  TimeGrid grid;
  double center_freq_hz = 0.0;  // carrier of the source MSTM, kept for the inverse
  ComplexTensor3 data;          // (delay, output mode, input mode)

  std::size_t outputs() const { return data.rows(); }
  std::size_t inputs() const { return data.cols(); }
  void validate() const;
};

struct GridRelations {
  double resolution_s;
  double extent_s;
  double bandwidth_hz;
};

GridRelations grid_relations(const FreqGrid& grid);

Trtm mstm_to_trtm(const Mstm& m);
Mstm trtm_to_mstm(const Trtm& t);

/// Returns a message when the longest modal delay exceeds 80% of the
/// temporal extent, beyond which circular aliasing distorts the TRTM.
std::optional<std::string> aliasing_warning(const DispersionModel& model, const FreqGrid& grid);

/// Unitary DFT helpers on a single sequence, same sign convention as
/// mstm_to_trtm (forward: frequency -> delay). Sample 0 of the frequency
/// sequence is taken at offset -(N/2) steps.
std::vector<Complex> spectrum_to_delay(const std::vector<Complex>& spectrum);
std::vector<Complex> delay_to_spectrum(const std::vector<Complex>& delays);

/// (1/sqrt(N)) * circular convolution of two equal-length sequences. With this
/// scaling a kernel equal to sqrt(N) at bin j shifts the signal by j bins.
std::vector<Complex> circular_convolve(const std::vector<Complex>& kernel,
                                       const std::vector<Complex>& signal);

}  // namespace tbf
