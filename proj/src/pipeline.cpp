#include "tbf/pipeline.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "tbf/parallel.hpp"

namespace tbf {

double DeviceConfig::resolved_span_s() const {
  if (delay_span_s > 0.0) return delay_span_s;
  return static_cast<double>(resolved_fiber_modes() - 1) * spacing_s;
}

FreqGrid DeviceConfig::freq_grid() const {
  if (!(time_resolution_s > 0.0)) throw DomainError("time resolution must be positive");
  FreqGrid g;
  g.center_freq_hz = kSpeedOfLight / center_wavelength_m;
  g.samples = freq_samples;
  g.step_hz = 1.0 / (static_cast<double>(freq_samples) * time_resolution_s);
  g.validate();
  return g;
}

SimulatedDevice build_device(const DeviceConfig& config) {
  if (config.dim < 2) throw DomainError("time-bin dimension must be at least 2");
  const std::size_t modes = config.resolved_fiber_modes();
  if (modes < config.dim) throw DomainError("fiber needs at least as many modes as the time-bin dimension");

  DispersionModel model = make_default_model(modes, config.resolved_span_s(), config.fiber_seed);
  model.mixing_strength = config.mixing_strength;
  const FreqGrid grid = config.freq_grid();
  const Trtm trtm = mstm_to_trtm(synthesize_mstm(model, grid));
  TauModeSet set = construct_tau_modes(trtm, {modes, config.stop_fraction});
  TimeBinBasis basis =
      select_time_bin_basis(set, config.dim, config.spacing_s, config.resolved_min_sep_s());
  TimeBinDevice device(trtm, std::move(basis));
  return SimulatedDevice{config, std::move(model), trtm, std::move(set), std::move(device)};
}

PeakWeights simulate_peaks(const SimulatedDevice& dev, const CVector& probe_coeffs, const CVector& target,
                           const NoiseSpec& noise, std::uint64_t stream_id) {
  const TemporalState probe =
      time_bin_state(dev.device.basis(), probe_coeffs, dev.config.pulse, dev.device.grid());
  const MeasurementSetting setting = measurement_for_state(dev.device.basis(), target);
  const CountRecord rec = simulate_detection(dev.device.output(setting.coeffs, probe), noise, stream_id);
  return extract_peaks(rec, dev.device.grid(), dev.device.basis(), dev.config.resolved_window_s());
}

TomoDataset simulate_tomography(const SimulatedDevice& dev, const CVector& target, const NoiseSpec& noise,
                                std::uint64_t trial) {
  noise.validate();
  const std::size_t d = dev.device.dim();
  const ProbeSet probes = build_probe_set(d);
  const MeasurementSetting ideal = measurement_for_state(dev.device.basis(), target);
  const double window = dev.config.resolved_window_s();
  const double center = dev.device.central_time_s();

  std::mt19937_64 phase_rng(stream_seed(noise.rng_seed ^ 0x5DEECE66DULL, trial));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> drift(d, 0.0);

  TomoDataset ds;
  ds.probes = probes;
  ds.yields.reserve(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    CVector weights = ideal.coeffs;
    for (std::size_t b = 0; b < d; ++b) weights(static_cast<Eigen::Index>(b)) *= std::polar(1.0, drift[b]);

    const ProbeLabel& label = probes.labels[p];
    TemporalState probe;
    if (label.kind == ProbeLabel::Kind::computational) {
      probe = franson_prepare(dev.device.basis(), label.n, std::nullopt, 0.0, dev.config.pulse, dev.device.grid());
    } else {
      const double error = noise.franson_phase_std_rad * unit(phase_rng);
      probe = franson_prepare(dev.device.basis(), label.n, label.m, label.phase_rad() + error, dev.config.pulse,
                              dev.device.grid());
    }
    const CountRecord rec =
        simulate_detection(dev.device.output(weights, probe), noise, (trial << 20) + p);
    ds.yields.push_back(window_sum(rec.counts, dev.device.grid(), center, window));

    for (double& phase : drift) phase += noise.drift_std_per_probe_rad * unit(phase_rng);
  }
  return ds;
}

MonteCarloResult monte_carlo_fidelity(const SimulatedDevice& dev, const StateVector& target, std::size_t trials,
                                      const NoiseSpec& noise) {
  if (trials < 2) throw DomainError("Monte-Carlo needs at least two trials");
  MonteCarloResult out;
  out.fidelities.assign(trials, 0.0);
  std::vector<char> converged(trials, 1);
  ReconstructOptions options;
  options.keep_history = false;
  parallel_for(trials, [&](std::size_t t) {
    const TomoDataset ds = simulate_tomography(dev, target.amplitudes, noise, t);
    const Reconstruction rec = reconstruct(ds, options);
    out.fidelities[t] = fidelity(rec.op, target).value;
    converged[t] = rec.converged ? 1 : 0;
  });
  out.unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
  const double n = static_cast<double>(trials);
  out.mean = std::accumulate(out.fidelities.begin(), out.fidelities.end(), 0.0) / n;
  double ss = 0.0;
  for (double f : out.fidelities) ss += (f - out.mean) * (f - out.mean);
  out.std = std::sqrt(ss / (n - 1.0));
  return out;
}

std::vector<StateVector> mub_targets(std::size_t d) {
  const MubFamily fam = mub_family(d);
  std::vector<StateVector> out;
  for (const auto& basis : fam.bases) {
    if (basis.label == "computational") continue;
    for (const auto& s : basis.states) out.push_back(s);
  }
  return out;
}

}  // namespace tbf
