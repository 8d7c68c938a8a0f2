#pragma once

// Parametric multi-spectral transmission matrices of an ideal multi-mode fiber
// with first/second order modal dispersion and a fixed mode-mixing unitary.

#include <cstdint>
#include <string>
#include <vector>

#include "tbf/types.hpp"

namespace tbf {

/// Uniform optical frequency grid. Sample k sits at
/// center_freq_hz + (k - samples/2) * step_hz (integer division).
struct FreqGrid {
  double center_freq_hz = 0.0;
  double step_hz = 1.0;
  std::size_t samples = 2;

  /// Builds a grid from a wavelength sweep using dnu = c * dlambda / lambda^2.
  static FreqGrid from_wavelength(double center_wavelength_m, double step_wavelength_m,
                                  std::size_t samples);

  void validate() const;
  std::size_t center_index() const { return samples / 2; }
  double frequency_hz(std::size_t k) const;
  /// Angular offset from the carrier, in rad/s.
  double angular_offset(std::size_t k) const;
  double resolution_s() const { return 1.0 / (static_cast<double>(samples) * step_hz); }
  double extent_s() const { return 1.0 / step_hz; }

  friend bool operator==(const FreqGrid&, const FreqGrid&) = default;
};

struct DispersionModel {
  std::size_t num_modes = 1;
  double length_m = 1.0;
  std::vector<double> beta0;  // rad/m
  std::vector<double> beta1;  // s/m
  std::vector<double> beta2;  // s^2/m
  std::uint64_t mixing_seed = 0;
  double mixing_strength = 1.0;  // 0 -> identity, 1 -> Haar unitary
  bool ideal_separable = false;

  void validate() const;
  /// Group delay L * beta1 of each mode, seconds.
  std::vector<double> group_delays_s() const;
};

struct Mstm {
  FreqGrid grid;
  ComplexTensor3 data;  // (frequency, output mode, input mode)
  std::vector<std::string> mode_labels;

  std::size_t outputs() const { return data.rows(); }
  std::size_t inputs() const { return data.cols(); }
  void validate() const;
};

/// Per-polarization guided-mode estimate floor(V^2 / 4), V = pi * core * NA / lambda,
/// clamped to at least one mode. Lengths only need consistent units.
int mode_count_step_index(double core_diameter, double numerical_aperture, double wavelength);

/// Haar-distributed unitary from a seeded complex Ginibre matrix.
CMatrix haar_unitary(std::size_t n, std::uint64_t seed);

/// exp(s * log(U_haar)): identity at s = 0, the Haar unitary at s = 1.
CMatrix mixing_unitary(std::size_t n, std::uint64_t seed, double strength);

Mstm synthesize_mstm(const DispersionModel& model, const FreqGrid& grid);

/// Group delays linearly spaced over [0, delay_span_s], random beta0 phases.
DispersionModel make_default_model(std::size_t num_modes, double delay_span_s, std::uint64_t seed);

/// Largest ||T^H T - I||_F over all frequency slices.
double max_unitarity_defect(const Mstm& m);

}  // namespace tbf
