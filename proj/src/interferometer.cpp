#include "tbf/interferometer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

namespace tbf {
namespace {

constexpr double kUnitNormTolerance = 1e-9;

double circular_distance(double t, double center, double extent) {
  double x = std::fmod(t - center, extent);
  if (x < -0.5 * extent) x += extent;
  if (x >= 0.5 * extent) x -= extent;
  return x;
}

void require_unit(const CVector& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > kUnitNormTolerance) {
    std::ostringstream msg;
    msg << what << " must have unit norm (got " << v.norm() << ")";
    throw DomainError(msg.str());
  }
}

std::vector<double> jitter_blur(const std::vector<double>& intensity, const TimeGrid& grid, double fwhm_s) {
  const double sigma = fwhm_s / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  if (sigma < 0.05 * grid.step_s) return intensity;
  const std::size_t n = intensity.size();
  const auto reach = static_cast<long long>(std::min<double>(std::ceil(6.0 * sigma / grid.step_s),
                                                             static_cast<double>(n / 2)));
  std::vector<double> kernel;
  double norm = 0.0;
  for (long long j = -reach; j <= reach; ++j) {
    const double t = static_cast<double>(j) * grid.step_s;
    kernel.push_back(std::exp(-0.5 * t * t / (sigma * sigma)));
    norm += kernel.back();
  }
  for (auto& k : kernel) k /= norm;
  std::vector<double> out(n, 0.0);
  const auto nn = static_cast<long long>(n);
  for (long long i = 0; i < nn; ++i) {
    if (intensity[static_cast<std::size_t>(i)] == 0.0) continue;
    for (long long j = -reach; j <= reach; ++j) {
      long long target = (i + j) % nn;
      if (target < 0) target += nn;
      out[static_cast<std::size_t>(target)] +=
          intensity[static_cast<std::size_t>(i)] * kernel[static_cast<std::size_t>(j + reach)];
    }
  }
  return out;
}

}  // namespace

double TemporalState::energy() const {
  double e = 0.0;
  for (const auto& z : envelope) e += std::norm(z);
  return e;
}

std::vector<double> TemporalState::intensity() const {
  std::vector<double> out(envelope.size());
  for (std::size_t i = 0; i < envelope.size(); ++i) out[i] = std::norm(envelope[i]);
  return out;
}

std::vector<Complex> pulse_envelope(const Pulse& pulse, const TimeGrid& grid, double shift_s) {
  if (!(pulse.fwhm_s > 0.0)) throw DomainError("pulse FWHM must be positive");
  grid.validate();
  const double sigma = pulse.fwhm_s / (2.0 * std::sqrt(std::log(2.0)));
  const double extent = grid.extent_s();
  std::vector<Complex> env(grid.samples);
  double norm = 0.0;
  for (std::size_t j = 0; j < grid.samples; ++j) {
    const double dt = circular_distance(grid.time_s(j), pulse.center_s + shift_s, extent);
    const double a = std::exp(-0.5 * dt * dt / (sigma * sigma));
    env[j] = a;
    norm += a * a;
  }
  if (!(norm > 0.0)) throw DomainError("pulse is narrower than the grid can represent");
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& z : env) z *= scale;
  return env;
}

void MeasurementSetting::validate() const {
  if (static_cast<std::size_t>(coeffs.size()) != basis.members.size())
    throw DimensionError("measurement coefficients must have one entry per basis member");
  if (std::abs(coeffs.norm() - 1.0) > 1e-12) throw DomainError("measurement coefficients must be unit norm");
}

MeasurementSetting measurement_for_state(const TimeBinBasis& basis, const CVector& target) {
  const auto d = static_cast<Eigen::Index>(basis.members.size());
  if (target.size() != d) throw DimensionError("target dimension does not match the basis");
  const double norm = target.norm();
  if (!(norm > 0.0)) throw DomainError("target state is zero");
  MeasurementSetting s;
  s.basis = basis;
  s.coeffs = CVector(d);
  for (Eigen::Index b = 0; b < d; ++b) s.coeffs(b) = std::conj(target(d - 1 - b)) / norm;
  return s;
}

void NoiseSpec::validate() const {
  if (franson_phase_std_rad < 0.0 || detector_jitter_fwhm_s < 0.0 || mean_counts_per_setting < 0.0 ||
      drift_std_per_probe_rad < 0.0)
    throw DomainError("noise parameters must be non-negative");
}

TemporalState impulse_response(const Trtm& trtm, const CVector& in_vec, const CVector& out_vec) {
  trtm.validate();
  if (static_cast<std::size_t>(in_vec.size()) != trtm.inputs() ||
      static_cast<std::size_t>(out_vec.size()) != trtm.outputs())
    throw DimensionError("mode vectors do not match the TRTM mode counts");
  require_unit(in_vec, "input mode vector");
  require_unit(out_vec, "output mode vector");
  TemporalState s;
  s.grid = trtm.grid;
  s.envelope.resize(trtm.grid.samples);
  for (std::size_t k = 0; k < trtm.grid.samples; ++k)
    s.envelope[k] = out_vec.dot(trtm.data.slice(k) * in_vec);
  return s;
}

TemporalState measurement_response(const Trtm& trtm, const MeasurementSetting& setting) {
  if (static_cast<std::size_t>(setting.coeffs.size()) != setting.basis.members.size())
    throw DimensionError("measurement coefficients must have one entry per basis member");
  TemporalState total;
  total.grid = trtm.grid;
  total.envelope.assign(trtm.grid.samples, Complex(0.0));
  for (std::size_t a = 0; a < setting.basis.members.size(); ++a) {
    const auto& m = setting.basis.members[a];
    const TemporalState r = impulse_response(trtm, m.input_vec, m.output_vec);
    const Complex f = setting.coeffs(static_cast<Eigen::Index>(a));
    for (std::size_t k = 0; k < r.envelope.size(); ++k) total.envelope[k] += f * r.envelope[k];
  }
  return total;
}

TemporalState apply_response(const TemporalState& response, const TemporalState& probe) {
  if (response.envelope.size() != probe.envelope.size())
    throw DimensionError("response and probe live on different grids");
  TemporalState out;
  out.grid = probe.grid;
  out.envelope = circular_convolve(response.envelope, probe.envelope);
  return out;
}

TemporalState franson_prepare(const TimeBinBasis& basis, std::size_t n, std::optional<std::size_t> m,
                              double phase_rad, const Pulse& pulse, const TimeGrid& grid) {
  const std::size_t d = basis.members.size();
  if (n >= d) throw DomainError("Franson bin index out of range");
  TemporalState s;
  s.grid = grid;
  s.envelope = pulse_envelope(pulse, grid, basis.members[n].delay_s);
  if (!m) return s;
  if (*m <= n || *m >= d) throw DomainError("Franson arms need n < m < d");
  const double gap = basis.members[*m].delay_s - basis.members[n].delay_s;
  if (!(pulse.fwhm_s < gap)) throw DomainError("pulse FWHM must be shorter than the bin separation");
  const std::vector<Complex> late = pulse_envelope(pulse, grid, basis.members[*m].delay_s);
  Complex overlap(0.0);
  for (std::size_t j = 0; j < late.size(); ++j) overlap += std::conj(s.envelope[j]) * late[j];
  if (std::abs(overlap) > 1e-3) {
    std::ostringstream msg;
    msg << "time bins " << n << " and " << *m << " overlap: |<tau_n|tau_m>| = " << std::abs(overlap);
    throw DomainError(msg.str());
  }
  const Complex phase = std::polar(1.0, phase_rad);
  double norm = 0.0;
  for (std::size_t j = 0; j < late.size(); ++j) {
    s.envelope[j] = (s.envelope[j] + phase * late[j]) / std::sqrt(2.0);
    norm += std::norm(s.envelope[j]);
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& z : s.envelope) z *= scale;
  return s;
}

TemporalState time_bin_state(const TimeBinBasis& basis, const CVector& coeffs, const Pulse& pulse,
                             const TimeGrid& grid) {
  if (static_cast<std::size_t>(coeffs.size()) != basis.members.size())
    throw DimensionError("time-bin amplitudes must match the basis dimension");
  TemporalState s;
  s.grid = grid;
  s.envelope.assign(grid.samples, Complex(0.0));
  for (std::size_t k = 0; k < basis.members.size(); ++k) {
    const Complex c = coeffs(static_cast<Eigen::Index>(k));
    if (c == Complex(0.0)) continue;
    const auto env = pulse_envelope(pulse, grid, basis.members[k].delay_s);
    for (std::size_t j = 0; j < env.size(); ++j) s.envelope[j] += c * env[j];
  }
  const double norm = std::sqrt(s.energy());
  if (!(norm > 0.0)) throw DomainError("time-bin amplitudes are all zero");
  for (auto& z : s.envelope) z /= norm;
  return s;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

CountRecord simulate_detection(const TemporalState& signal, const NoiseSpec& noise, std::uint64_t stream_id) {
  noise.validate();
  CountRecord rec;
  rec.bin_times.resize(signal.envelope.size());
  for (std::size_t j = 0; j < rec.bin_times.size(); ++j) rec.bin_times[j] = signal.grid.time_s(j);
  std::vector<double> expected = jitter_blur(signal.intensity(), signal.grid, noise.detector_jitter_fwhm_s);
  for (auto& e : expected) e *= noise.mean_counts_per_setting;
  rec.sampled = !noise.expectation;
  if (noise.expectation) {
    rec.counts = std::move(expected);
    return rec;
  }
  std::mt19937_64 rng(stream_seed(noise.rng_seed, stream_id));
  rec.counts.resize(expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) {
    if (expected[j] <= 0.0) {
      rec.counts[j] = 0.0;
      continue;
    }
    std::poisson_distribution<long long> draw(expected[j]);
    rec.counts[j] = static_cast<double>(draw(rng));
  }
  return rec;
}

std::vector<double> peak_centers(const TimeBinBasis& basis) {
  const std::size_t d = basis.members.size();
  if (d == 0) return {};
  std::vector<double> centers(2 * d - 1, 0.0);
  std::vector<double> count(2 * d - 1, 0.0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t b = 0; b < d; ++b) {
      centers[k + b] += basis.members[k].delay_s + basis.members[b].delay_s;
      count[k + b] += 1.0;
    }
  for (std::size_t j = 0; j < centers.size(); ++j) centers[j] /= count[j];
  return centers;
}

double window_sum(const std::vector<double>& intensity, const TimeGrid& grid, double t, double window_s) {
  const double half = 0.5 * window_s + 1e-9 * grid.step_s;
  const double extent = grid.extent_s();
  double sum = 0.0;
  for (std::size_t j = 0; j < intensity.size(); ++j)
    if (std::abs(circular_distance(grid.time_s(j), t, extent)) <= half) sum += intensity[j];
  return sum;
}

std::vector<double> checked_peak_centers(const TimeBinBasis& basis, const TimeGrid& grid, double window_s) {
  if (!(window_s > 0.0)) throw DomainError("window must be positive");
  std::vector<double> centers = peak_centers(basis);
  for (std::size_t j = 1; j < centers.size(); ++j)
    if (centers[j] - centers[j - 1] <= window_s)
      throw DomainError("peak windows overlap; reduce the window below the bin spacing");
  if (centers.size() > 1 && centers.back() - centers.front() + window_s >= grid.extent_s())
    throw DomainError("peak windows wrap around the time grid");
  return centers;
}

PeakWeights extract_peaks(const std::vector<double>& intensity, const TimeGrid& grid, const TimeBinBasis& basis,
                          double window_s) {
  if (intensity.size() != grid.samples) throw DimensionError("intensity does not match the time grid");
  PeakWeights pw;
  pw.centers_s = checked_peak_centers(basis, grid, window_s);
  double total = 0.0;
  for (double c : pw.centers_s) {
    pw.raw.push_back(window_sum(intensity, grid, c, window_s));
    total += pw.raw.back();
  }
  for (double r : pw.raw) pw.normalized.push_back(total > 0.0 ? r / total : 0.0);
  return pw;
}

PeakWeights extract_peaks(const TemporalState& state, const TimeBinBasis& basis, double window_s) {
  return extract_peaks(state.intensity(), state.grid, basis, window_s);
}

PeakWeights extract_peaks(const CountRecord& record, const TimeGrid& grid, const TimeBinBasis& basis,
                          double window_s) {
  if (record.counts.size() != record.bin_times.size()) throw DimensionError("count record lengths differ");
  return extract_peaks(record.counts, grid, basis, window_s);
}

TimeBinDevice::TimeBinDevice(const Trtm& trtm, TimeBinBasis basis) : basis_(std::move(basis)), grid_(trtm.grid) {
  responses_.reserve(basis_.members.size());
  for (const auto& m : basis_.members) responses_.push_back(impulse_response(trtm, m.input_vec, m.output_vec));
}

TemporalState TimeBinDevice::response(const CVector& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) != responses_.size())
    throw DimensionError("coefficient count does not match the basis dimension");
  TemporalState total;
  total.grid = grid_;
  total.envelope.assign(grid_.samples, Complex(0.0));
  for (std::size_t a = 0; a < responses_.size(); ++a) {
    const Complex f = coeffs(static_cast<Eigen::Index>(a));
    if (f == Complex(0.0)) continue;
    for (std::size_t k = 0; k < grid_.samples; ++k) total.envelope[k] += f * responses_[a].envelope[k];
  }
  return total;
}

TemporalState TimeBinDevice::output(const CVector& coeffs, const TemporalState& probe) const {
  return apply_response(response(coeffs), probe);
}

double TimeBinDevice::central_time_s() const {
  const auto centers = peak_centers(basis_);
  return centers.empty() ? 0.0 : centers[centers.size() / 2];
}

double TimeBinDevice::calibration(double window_s) const {
  if (responses_.empty()) return 0.0;
  double sum = 0.0;
  const double n = static_cast<double>(grid_.samples);
  for (std::size_t a = 0; a < responses_.size(); ++a)
    sum += window_sum(responses_[a].intensity(), grid_, basis_.members[a].delay_s, window_s) / n;
  return sum / static_cast<double>(responses_.size());
}

CentralPeak central_peak_probability(const Trtm& trtm, const MeasurementSetting& setting,
                                     const TemporalState& probe, double window_s) {
  setting.validate();
  const TimeBinDevice device(trtm, setting.basis);
  checked_peak_centers(setting.basis, trtm.grid, window_s);
  const TemporalState out = device.output(setting.coeffs, probe);
  CentralPeak cp;
  const auto intensity = out.intensity();
  cp.raw_energy = window_sum(intensity, out.grid, device.central_time_s(), window_s);
  cp.total_energy = out.energy();
  cp.calibration = device.calibration(window_s);
  const double p = cp.calibration > 0.0 ? cp.raw_energy / cp.calibration : 0.0;
  cp.probability = std::clamp(p, 0.0, 1.0);
  cp.clip = std::abs(p - cp.probability);
  return cp;
}

MalusResult malus_scan(const TimeBinDevice& device, double probe_phase_rad, const std::vector<double>& theta_grid,
                       const NoiseSpec& noise, const Pulse& pulse, double window_s) {
  if (device.dim() != 2) throw DomainError("Malus scan needs a two-dimensional time-bin basis");
  if (theta_grid.size() < 3) throw DomainError("Malus scan needs at least three phase settings");
  noise.validate();
  MalusResult res;
  res.theta = theta_grid;
  const double center = device.central_time_s();
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    double error = 0.0;
    if (noise.franson_phase_std_rad > 0.0) {
      std::mt19937_64 rng(stream_seed(noise.rng_seed, 2 * i));
      error = std::normal_distribution<double>(0.0, noise.franson_phase_std_rad)(rng);
    }
    const TemporalState probe = franson_prepare(device.basis(), 0, 1, probe_phase_rad + error, pulse, device.grid());
    CVector target(2);
    target << Complex(1.0), std::polar(1.0, theta_grid[i]);
    target /= std::sqrt(2.0);
    const MeasurementSetting setting = measurement_for_state(device.basis(), target);
    const CountRecord rec = simulate_detection(device.output(setting.coeffs, probe), noise, 2 * i + 1);
    res.signal.push_back(window_sum(rec.counts, device.grid(), center, window_s));
  }

  Eigen::MatrixXd design(static_cast<Eigen::Index>(theta_grid.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(theta_grid.size()));
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = std::cos(theta_grid[i]);
    design(r, 2) = std::sin(theta_grid[i]);
    y(r) = res.signal[i];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
  res.offset = coef(0);
  res.cos_coeff = coef(1);
  res.sin_coeff = coef(2);
  const double amp = std::hypot(coef(1), coef(2));
  res.visibility = res.offset > 0.0 ? amp / res.offset : 0.0;
  double tmax = std::atan2(coef(2), coef(1));
  if (tmax < 0.0) tmax += 2.0 * kPi;
  res.theta_max = tmax;
  res.theta_min = std::fmod(tmax + kPi, 2.0 * kPi);
  return res;
}

}  // namespace tbf
