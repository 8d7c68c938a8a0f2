#include "tbf/spectral.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include <fftw3.h>

namespace tbf {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unitary DFT along the leading axis of an (n, howmany) row-major
// block, followed (forward) or preceded (backward) by the carrier-offset
// twiddle exp(+-2 pi i c j / n).
void transform_leading_axis(std::vector<Complex>& data, std::size_t n, std::size_t howmany,
                            bool to_delay) {
  if (n == 0 || howmany == 0) return;
  const std::size_t c = n / 2;
  auto twiddle = [&](double sign) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t r = (c * j) % n;
      const Complex w = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
      Complex* row = data.data() + j * howmany;
      for (std::size_t e = 0; e < howmany; ++e) row[e] *= w;
    }
  };
  if (!to_delay) twiddle(-1.0);

  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  const int len = static_cast<int>(n);
  const int stride = static_cast<int>(howmany);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_many_dft(1, &len, static_cast<int>(howmany), buf, nullptr, stride, 1, buf,
                              nullptr, stride, 1, to_delay ? FFTW_FORWARD : FFTW_BACKWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (plan == nullptr) throw std::runtime_error("FFT planner failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& z : data) z *= scale;
  if (to_delay) twiddle(+1.0);
}

void plain_dft(std::vector<Complex>& data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (plan == nullptr) throw std::runtime_error("FFT planner failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

TimeGrid TimeGrid::from_freq_grid(const FreqGrid& g) {
  g.validate();
  TimeGrid t;
  t.samples = g.samples;
  t.step_s = g.resolution_s();
  t.origin_s = 0.0;
  return t;
}

void TimeGrid::validate() const {
  if (samples < 1) throw DomainError("time grid needs at least one sample");
  if (!(step_s > 0.0) || !std::isfinite(step_s)) throw DomainError("time step must be positive");
}

std::size_t TimeGrid::nearest_bin(double t) const {
  const double x = (t - origin_s) / step_s;
  const auto n = static_cast<long long>(samples);
  long long j = std::llround(x) % n;
  if (j < 0) j += n;
  return static_cast<std::size_t>(j);
}

void Trtm::validate() const {
  grid.validate();
  if (data.slices() != grid.samples)
    throw DimensionError("TRTM slice count does not match the time grid");
  if (data.rows() == 0 || data.cols() == 0) throw DimensionError("TRTM has empty mode axes");
}

GridRelations grid_relations(const FreqGrid& grid) {
  grid.validate();
  const double bandwidth = static_cast<double>(grid.samples) * grid.step_hz;
  return {1.0 / bandwidth, 1.0 / grid.step_hz, bandwidth};
}

Trtm mstm_to_trtm(const Mstm& m) {
  m.validate();
  Trtm out;
  out.grid = TimeGrid::from_freq_grid(m.grid);
  out.center_freq_hz = m.grid.center_freq_hz;
  out.data = m.data;
  transform_leading_axis(out.data.raw(), m.data.slices(), m.data.slice_size(), true);
  return out;
}

Mstm trtm_to_mstm(const Trtm& t) {
  t.validate();
  Mstm out;
  out.grid.center_freq_hz = t.center_freq_hz;
  out.grid.samples = t.grid.samples;
  out.grid.step_hz = 1.0 / (static_cast<double>(t.grid.samples) * t.grid.step_s);
  out.data = t.data;
  transform_leading_axis(out.data.raw(), t.data.slices(), t.data.slice_size(), false);
  return out;
}

std::optional<std::string> aliasing_warning(const DispersionModel& model, const FreqGrid& grid) {
  double longest = 0.0;
  for (double d : model.group_delays_s()) longest = std::max(longest, std::abs(d));
  const double extent = grid.extent_s();
  if (longest <= 0.8 * extent) return std::nullopt;
  std::ostringstream msg;
  msg << "longest modal delay " << longest * 1e12 << " ps exceeds 80% of the temporal extent "
      << extent * 1e12 << " ps; delays will alias";
  return msg.str();
}

std::vector<Complex> spectrum_to_delay(const std::vector<Complex>& spectrum) {
  std::vector<Complex> out = spectrum;
  transform_leading_axis(out, out.size(), 1, true);
  return out;
}

std::vector<Complex> delay_to_spectrum(const std::vector<Complex>& delays) {
  std::vector<Complex> out = delays;
  transform_leading_axis(out, out.size(), 1, false);
  return out;
}

std::vector<Complex> circular_convolve(const std::vector<Complex>& kernel,
                                       const std::vector<Complex>& signal) {
  if (kernel.size() != signal.size()) throw DimensionError("convolution operands differ in length");
  if (kernel.empty()) return {};
  std::vector<Complex> a = kernel;
  std::vector<Complex> b = signal;
  plain_dft(a, FFTW_FORWARD);
  plain_dft(b, FFTW_FORWARD);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  plain_dft(a, FFTW_BACKWARD);
  const double n = static_cast<double>(a.size());
  const double scale = 1.0 / (n * std::sqrt(n));
  for (auto& z : a) z *= scale;
  return a;
}

}  // namespace tbf
