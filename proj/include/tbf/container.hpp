#pragma once

// Binary container: "QTM1", u32 LE header length, JSON header, then
// little-endian float64 (re, im) pairs in row-major order of `shape`.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbf/fiber_model.hpp"
#include "tbf/interferometer.hpp"
#include "tbf/spectral.hpp"
#include "tbf/tau_modes.hpp"
#include "tbf/tomography.hpp"
#include "tbf/types.hpp"

namespace tbf {

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public ContainerError {
 public:
  using ContainerError::ContainerError;
};
class TruncatedPayloadError : public ContainerError {
 public:
  using ContainerError::ContainerError;
};
class ShapeMismatchError : public ContainerError {
 public:
  using ContainerError::ContainerError;
};
class HeaderError : public ContainerError {
 public:
  using ContainerError::ContainerError;
};

/// Fixed creation stamp so identical inputs give identical bytes.
inline constexpr const char* kContainerCreated = "1970-01-01T00:00:00Z";

struct Container {
  nlohmann::json header;  // kind, shape, axis_order, grid, version, created, ...
  std::vector<Complex> payload;

  std::string kind() const;
  std::vector<std::size_t> shape() const;
  /// Header fields present and typed, payload size = product(shape).
  void validate() const;
};

std::string serialize_container(const Container& c);
Container parse_container(const std::string& bytes);

/// Write to a sibling temp file, then rename over path.
void write_container(const Container& c, const std::string& path);
Container read_container(const std::string& path);

/// Atomic text file write (temp file + rename).
void write_text_file(const std::string& path, const std::string& content);

Container to_container(const Mstm& m, const DispersionModel* model = nullptr,
                       std::optional<std::uint64_t> seed = std::nullopt);
Container to_container(const Trtm& t, std::optional<std::uint64_t> seed = std::nullopt);
Container to_container(const TauModeSet& s, std::optional<std::uint64_t> seed = std::nullopt);
Container to_container(const MeasOperator& op, std::optional<std::uint64_t> seed = std::nullopt);
Container to_container(const CountRecord& r, const TimeGrid& grid, std::optional<std::uint64_t> seed = std::nullopt);

Mstm mstm_from_container(const Container& c);
Trtm trtm_from_container(const Container& c);
TauModeSet taumodes_from_container(const Container& c);
MeasOperator tomo_from_container(const Container& c);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Structural checks plus the kind's physical invariants (unitarity for
/// lossless transmission matrices, unit-norm tau-mode vectors, a trace-one
/// PSD operator, non-negative counts).
std::vector<VerifyCheck> verify_container(const Container& c);

}  // namespace tbf
