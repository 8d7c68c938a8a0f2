#include "tbf/fiber_model.hpp"

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "tbf/parallel.hpp"

namespace tbf {

FreqGrid FreqGrid::from_wavelength(double center_wavelength_m, double step_wavelength_m,
                                   std::size_t samples) {
  if (!(center_wavelength_m > 0.0) || !(step_wavelength_m > 0.0))
    throw DomainError("wavelength grid needs positive center and step");
  FreqGrid g;
  g.center_freq_hz = kSpeedOfLight / center_wavelength_m;
  g.step_hz = kSpeedOfLight * step_wavelength_m / (center_wavelength_m * center_wavelength_m);
  g.samples = samples;
  g.validate();
  return g;
}

void FreqGrid::validate() const {
  if (samples < 2) throw DomainError("frequency grid needs at least 2 samples");
  if (!(step_hz > 0.0) || !std::isfinite(step_hz))
    throw DomainError("frequency step must be positive and finite");
  if (!std::isfinite(center_freq_hz)) throw DomainError("center frequency must be finite");
}

double FreqGrid::frequency_hz(std::size_t k) const {
  return center_freq_hz + (static_cast<double>(k) - static_cast<double>(center_index())) * step_hz;
}

double FreqGrid::angular_offset(std::size_t k) const {
  return 2.0 * kPi * (static_cast<double>(k) - static_cast<double>(center_index())) * step_hz;
}

void DispersionModel::validate() const {
  if (num_modes == 0) throw DomainError("dispersion model needs at least one mode");
  if (!(length_m > 0.0)) throw DomainError("fiber length must be positive");
  if (beta0.size() != num_modes || beta1.size() != num_modes || beta2.size() != num_modes)
    throw DimensionError("beta vectors must have num_modes entries");
  if (!(mixing_strength >= 0.0 && mixing_strength <= 1.0))
    throw DomainError("mixing_strength must lie in [0, 1]");
  if (ideal_separable) {
    std::set<double> distinct(beta1.begin(), beta1.end());
    if (distinct.size() != beta1.size())
      throw DomainError("ideal-separable model requires pairwise distinct beta1");
  }
}

std::vector<double> DispersionModel::group_delays_s() const {
  std::vector<double> out(beta1.size());
  for (std::size_t n = 0; n < beta1.size(); ++n) out[n] = length_m * beta1[n];
  return out;
}

void Mstm::validate() const {
  grid.validate();
  if (data.slices() != grid.samples)
    throw DimensionError("MSTM slice count does not match the frequency grid");
  if (data.rows() == 0 || data.cols() == 0) throw DimensionError("MSTM has empty mode axes");
  if (!mode_labels.empty() && mode_labels.size() != data.cols())
    throw DimensionError("mode_labels length does not match the input mode count");
}

int mode_count_step_index(double core_diameter, double numerical_aperture, double wavelength) {
  if (!(core_diameter > 0.0) || !(numerical_aperture > 0.0) || !(wavelength > 0.0))
    throw DomainError("mode count arguments must be positive");
  const double v = kPi * core_diameter * numerical_aperture / wavelength;
  const auto count = static_cast<int>(std::floor(v * v / 4.0));
  return std::max(count, 1);
}

CMatrix haar_unitary(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(n, n);
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix& r = qr.matrixQR();
  // Fixing the phases of diag(R) makes the distribution exactly Haar.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= (mag > 0.0 ? d / mag : Complex(1.0));
  }
  return q;
}

CMatrix mixing_unitary(std::size_t n, std::uint64_t seed, double strength) {
  if (!(strength >= 0.0 && strength <= 1.0)) throw DomainError("mixing strength must lie in [0, 1]");
  if (strength == 0.0) return CMatrix::Identity(n, n);
  CMatrix haar = haar_unitary(n, seed);
  if (strength == 1.0) return haar;
  // A unitary is normal, so its Schur form is diagonal up to rounding.
  Eigen::ComplexSchur<CMatrix> schur(haar);
  const CMatrix& z = schur.matrixU();
  const CMatrix& t = schur.matrixT();
  CVector phases(n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
    phases(i) = std::polar(1.0, strength * std::arg(t(i, i)));
  return z * phases.asDiagonal() * z.adjoint();
}

Mstm synthesize_mstm(const DispersionModel& model, const FreqGrid& grid) {
  model.validate();
  grid.validate();
  const std::size_t m = model.num_modes;
  const CMatrix u = mixing_unitary(m, model.mixing_seed, model.mixing_strength);
  const bool diagonal = model.mixing_strength == 0.0;

  Mstm out;
  out.grid = grid;
  out.data = ComplexTensor3(grid.samples, m, m);
  out.mode_labels.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.mode_labels.push_back("mode" + std::to_string(i));

  const double len = model.length_m;
  parallel_for(grid.samples, [&](std::size_t k) {
    const double delta = grid.angular_offset(k);
    CVector d(m);
    for (std::size_t n = 0; n < m; ++n) {
      const double beta =
          model.beta0[n] + model.beta1[n] * delta + model.beta2[n] * delta * delta;
      d(static_cast<Eigen::Index>(n)) = std::polar(1.0, beta * len);
    }
    auto slice = out.data.slice(k);
    if (diagonal) {
      slice.setZero();
      for (std::size_t n = 0; n < m; ++n)
        slice(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = d(n);
    } else {
      slice = u * d.asDiagonal() * u.adjoint();
    }
  });
  return out;
}

DispersionModel make_default_model(std::size_t num_modes, double delay_span_s, std::uint64_t seed) {
  if (num_modes == 0) throw DomainError("num_modes must be at least 1");
  if (!(delay_span_s >= 0.0)) throw DomainError("delay_span must be non-negative");
  DispersionModel model;
  model.num_modes = num_modes;
  model.length_m = 40.0;
  model.mixing_seed = seed;
  model.mixing_strength = 1.0;
  model.beta0.resize(num_modes);
  model.beta1.resize(num_modes);
  model.beta2.assign(num_modes, 0.0);

  // Phases use a stream distinct from the mixing unitary's.
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (std::size_t n = 0; n < num_modes; ++n) {
    const double frac = num_modes == 1 ? 0.0 : static_cast<double>(n) / static_cast<double>(num_modes - 1);
    model.beta1[n] = frac * delay_span_s / model.length_m;
    model.beta0[n] = phase(rng) / model.length_m;
  }
  std::set<double> distinct(model.beta1.begin(), model.beta1.end());
  model.ideal_separable = distinct.size() == num_modes;
  return model;
}

double max_unitarity_defect(const Mstm& m) {
  double worst = 0.0;
  for (std::size_t k = 0; k < m.data.slices(); ++k) {
    const auto t = m.data.slice(k);
    const CMatrix g = t.adjoint() * t;
    worst = std::max(worst, (g - CMatrix::Identity(g.rows(), g.cols())).norm());
  }
  return worst;
}

}  // namespace tbf
