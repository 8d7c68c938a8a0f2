#pragma once

// End-to-end simulated experiments: build a fiber and its time-bin basis,
// then run Malus scans, peak readouts and Monte-Carlo measurement tomography
// on it.

#include <cstdint>
#include <vector>

#include "tbf/fiber_model.hpp"
#include "tbf/interferometer.hpp"
#include "tbf/spectral.hpp"
#include "tbf/tau_modes.hpp"
#include "tbf/tomography.hpp"

namespace tbf {

struct DeviceConfig {
  std::size_t dim = 2;
  std::size_t fiber_modes = 0;  // 0: same as dim
  double spacing_s = 160e-12;
  double delay_span_s = 0.0;  // 0: (fiber_modes - 1) * spacing_s
  double mixing_strength = 1.0;
  std::uint64_t fiber_seed = 1;
  double center_wavelength_m = 1550e-9;
  double time_resolution_s = 5e-12;
  std::size_t freq_samples = 1024;
  double min_sep_s = 0.0;  // 0: half the spacing
  double window_s = 0.0;   // 0: half the spacing
  double stop_fraction = 0.05;
  Pulse pulse;

  std::size_t resolved_fiber_modes() const { return fiber_modes == 0 ? dim : fiber_modes; }
  double resolved_span_s() const;
  double resolved_min_sep_s() const { return min_sep_s > 0.0 ? min_sep_s : 0.5 * spacing_s; }
  double resolved_window_s() const { return window_s > 0.0 ? window_s : 0.5 * spacing_s; }
  FreqGrid freq_grid() const;
};

struct SimulatedDevice {
  DeviceConfig config;
  DispersionModel model;
  Trtm trtm;
  TauModeSet modes;
  TimeBinDevice device;
};

SimulatedDevice build_device(const DeviceConfig& config);

/// Peak weights for a probe c passed through the measurement of state f.
PeakWeights simulate_peaks(const SimulatedDevice& dev, const CVector& probe_coeffs, const CVector& target,
                           const NoiseSpec& noise, std::uint64_t stream_id);

/// Yields of the full probe set against the measurement of `target`.
/// Per probe: the tau-mode weights pick up the accumulated drift phases, the
/// Franson phase gets its own error, and the central-window counts of the
/// detected output become the yield. Drift steps after every probe.
TomoDataset simulate_tomography(const SimulatedDevice& dev, const CVector& target, const NoiseSpec& noise,
                                std::uint64_t trial);

struct MonteCarloResult {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over trials
  std::vector<double> fidelities;
  std::size_t unconverged = 0;
};

/// Repeats simulate -> reconstruct -> fidelity with independent noise streams
/// per trial (trial t uses stream t). Trials run in parallel; results do not
/// depend on the thread count.
MonteCarloResult monte_carlo_fidelity(const SimulatedDevice& dev, const StateVector& target, std::size_t trials,
                                      const NoiseSpec& noise);

/// Non-computational MUB states of dimension d, basis by basis.
std::vector<StateVector> mub_targets(std::size_t d);

}  // namespace tbf
