#pragma once

// The fiber driven with tau-mode superpositions behaves as a common-path,
// many-armed unbalanced interferometer for time-bin states. This header
// covers probe preparation, impulse responses, photon detection and the
// peak bookkeeping used to read out a time-bin measurement.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbf/spectral.hpp"
#include "tbf/tau_modes.hpp"
#include "tbf/types.hpp"

namespace tbf {

/// Gaussian pulse; fwhm_s is the intensity full width at half maximum.
struct Pulse {
  double fwhm_s = 30e-12;
  double center_s = 0.0;
};

struct TemporalState {
  TimeGrid grid;
  std::vector<Complex> envelope;

  double energy() const;
  std::vector<double> intensity() const;
};

/// Discretized pulse envelope s(t - center - shift) with unit discrete norm.
/// Times wrap circularly on the grid.
std::vector<Complex> pulse_envelope(const Pulse& pulse, const TimeGrid& grid, double shift_s);

/// coeffs are the weights applied to the basis tau-modes (what the input
/// modulator displays), in basis member order. They enter the response
/// linearly; use measurement_for_state to program a projective measurement.
struct MeasurementSetting {
  TimeBinBasis basis;
  CVector coeffs;

  void validate() const;
};

/// Weights that make the central output peak read out |<f|c>|^2 for a
/// probe c placed on the basis delays: member b gets conj(f[d-1-b]), since
/// input bin k pairs with delay d-1-k at the central output time.
MeasurementSetting measurement_for_state(const TimeBinBasis& basis, const CVector& target);

struct NoiseSpec {
  double franson_phase_std_rad = 0.0;
  double detector_jitter_fwhm_s = 0.0;
  double mean_counts_per_setting = 1e4;  // expected counts for a unit-energy signal
  double drift_std_per_probe_rad = 0.0;
  std::uint64_t rng_seed = 0;
  bool expectation = false;  // report expected counts instead of Poisson draws

  void validate() const;
};

struct CountRecord {
  std::vector<double> bin_times;
  std::vector<double> counts;  // integers unless sampled == false
  std::string setting_id;
  std::string probe_id;
  bool sampled = true;
};

/// I(t) = <out| T(t) |in> on every delay slice; carries the sqrt(N)
/// scaling of the unitary transform, so a lossless single delay gives sqrt(N).
TemporalState impulse_response(const Trtm& trtm, const CVector& in_vec, const CVector& out_vec);

/// sum_a coeffs[a] * <u_a| T(t) |v_a> over the basis members.
TemporalState measurement_response(const Trtm& trtm, const MeasurementSetting& setting);

/// Output envelope of a probe passed through a response kernel.
TemporalState apply_response(const TemporalState& response, const TemporalState& probe);

/// [s(t - tau_n) + e^{i phase} s(t - tau_m)] / sqrt(2) on the basis delays,
/// or the single bin s(t - tau_n) when m is empty (blocked arm).
TemporalState franson_prepare(const TimeBinBasis& basis, std::size_t n, std::optional<std::size_t> m,
                              double phase_rad, const Pulse& pulse, const TimeGrid& grid);

/// Probe with arbitrary bin amplitudes c (normalized), pulses on the basis delays.
TemporalState time_bin_state(const TimeBinBasis& basis, const CVector& coeffs, const Pulse& pulse,
                             const TimeGrid& grid);

/// Deterministic RNG stream for (seed, stream_id).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id);

/// |signal|^2 blurred by Gaussian jitter, scaled by mean_counts_per_setting and
/// Poisson-sampled per bin (or returned as expectations).
CountRecord simulate_detection(const TemporalState& signal, const NoiseSpec& noise,
                               std::uint64_t stream_id);

/// Output times of the 2d-1 interference peaks: centre j averages
/// tau_k + tau_b over all pairs with k + b = j.
std::vector<double> peak_centers(const TimeBinBasis& basis);

/// peak_centers, after checking that windows of width window_s neither
/// overlap nor wrap around the grid.
std::vector<double> checked_peak_centers(const TimeBinBasis& basis, const TimeGrid& grid, double window_s);

struct PeakWeights {
  std::vector<double> centers_s;
  std::vector<double> raw;         // integrated intensity per window
  std::vector<double> normalized;  // raw / sum(raw)
};

PeakWeights extract_peaks(const std::vector<double>& intensity, const TimeGrid& grid,
                          const TimeBinBasis& basis, double window_s);
PeakWeights extract_peaks(const TemporalState& state, const TimeBinBasis& basis, double window_s);
PeakWeights extract_peaks(const CountRecord& record, const TimeGrid& grid, const TimeBinBasis& basis,
                          double window_s);

/// Sum of intensity over bins within window_s / 2 of time t (circular distance).
double window_sum(const std::vector<double>& intensity, const TimeGrid& grid, double t, double window_s);

struct CentralPeak {
  double raw_energy = 0.0;    // central-window energy of the output
  double total_energy = 0.0;  // whole output
  double calibration = 0.0;   // mean in-window energy fraction of the basis responses
  double probability = 0.0;   // raw_energy / calibration, clipped to [0, 1]
  double clip = 0.0;          // amount removed by the clip
};

CentralPeak central_peak_probability(const Trtm& trtm, const MeasurementSetting& setting,
                                     const TemporalState& probe, double window_s);

/// Precomputed per-member impulse responses of a time-bin basis on a fiber.
class TimeBinDevice {
 public:
  TimeBinDevice(const Trtm& trtm, TimeBinBasis basis);

  const TimeBinBasis& basis() const { return basis_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return basis_.members.size(); }
  const std::vector<TemporalState>& member_responses() const { return responses_; }

  TemporalState response(const CVector& coeffs) const;
  TemporalState output(const CVector& coeffs, const TemporalState& probe) const;
  double central_time_s() const;
  /// Fraction of each member response's energy within window_s of its delay, averaged.
  double calibration(double window_s) const;

 private:
  TimeBinBasis basis_;
  TimeGrid grid_;
  std::vector<TemporalState> responses_;
};

struct MalusResult {
  std::vector<double> theta;
  std::vector<double> signal;  // central-window counts (or expectations)
  double visibility = 0.0;      // (max - min) / (max + min) of the fitted curve
  double theta_max = 0.0;       // fitted maximum in [0, 2 pi)
  double theta_min = 0.0;
  double offset = 0.0, cos_coeff = 0.0, sin_coeff = 0.0;  // A + B cos + C sin
};

/// Scans the measurement (|t0> + e^{i theta}|t1>)/sqrt(2) against the probe
/// (|t0> + e^{i phi}|t1>)/sqrt(2). Each scan point draws its own Franson phase
/// error; counts pass through simulate_detection.
MalusResult malus_scan(const TimeBinDevice& device, double probe_phase_rad,
                       const std::vector<double>& theta_grid, const NoiseSpec& noise,
                       const Pulse& pulse, double window_s);

}  // namespace tbf
