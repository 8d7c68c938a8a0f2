#pragma once

// Mutually unbiased bases over d time-bin (computational) states.
//
// Indices are 0-based throughout: state a and basis mu both run over
// {0, ..., d-1}; a 1-based label k means a = k - 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbf/types.hpp"

namespace tbf {

struct StateVector {
  CVector amplitudes;

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
  CMatrix projector() const { return amplitudes * amplitudes.adjoint(); }
};

struct MubBasis {
  std::string label;  // "computational" or "mu=<k>"
  std::vector<StateVector> states;
};

struct MubFamily {
  std::size_t dim = 0;
  std::vector<MubBasis> bases;
  bool includes_computational = false;
};

/// Quadratic-phase state sum_t w^(a t + mu t^2) |t> / sqrt(d), w = exp(2 pi i / d),
/// evaluated for any d without checking that the family is unbiased.
StateVector quadratic_phase_state(std::size_t d, std::size_t mu, std::size_t a);

/// Member a of quadratic-phase basis mu for prime d. For d = 2 the quadratic
/// term uses i^(mu t^2), since exp(2 pi i / 2)^(t^2) collapses onto the linear term.
StateVector mub_state(std::size_t d, std::size_t mu, std::size_t a);

/// Computational-basis state |a>.
StateVector computational_state(std::size_t d, std::size_t a);

/// d + 1 bases: computational first, then mu = 0..d-1. Prime d uses the
/// quadratic-phase formula; prime powers use Galois-field arithmetic.
MubFamily mub_family(std::size_t d);

struct UnbiasednessReport {
  double max_gram_defect = 0.0;    // max |<a|b> - delta_ab| within a basis
  double max_overlap_defect = 0.0;  // max | d |<a|b>|^2 - 1 | across bases
};

UnbiasednessReport verify_unbiased(const MubFamily& family);

/// Returns (p, k) with d = p^k when d is a prime power.
std::optional<std::pair<std::size_t, std::size_t>> prime_power(std::size_t d);
bool is_prime(std::size_t n);

}  // namespace tbf
