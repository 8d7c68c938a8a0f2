#include "tbf/container.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tbf {

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'M', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_f64(std::string& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

double get_f64(const unsigned char* p) {
  const std::uint64_t bits = get_u64(p);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

nlohmann::json base_header(const std::string& kind, const std::vector<std::size_t>& shape,
                           const std::vector<std::string>& axes, nlohmann::json grid,
                           std::optional<std::uint64_t> seed) {
  nlohmann::json h;
  h["kind"] = kind;
  h["shape"] = shape;
  h["axis_order"] = axes;
  h["grid"] = std::move(grid);
  if (seed) h["seed"] = *seed;
  h["created"] = kContainerCreated;
  h["version"] = "1";
  return h;
}

nlohmann::json time_grid_json(const TimeGrid& g) {
  return {{"center", g.origin_s}, {"step", g.step_s}, {"samples", g.samples}, {"units", "s"}};
}

TimeGrid time_grid_from(const nlohmann::json& g) {
  if (g.at("units") != "s") throw HeaderError("expected a time grid in seconds");
  TimeGrid t;
  t.origin_s = g.at("center").get<double>();
  t.step_s = g.at("step").get<double>();
  t.samples = g.at("samples").get<std::size_t>();
  return t;
}

void expect_kind(const Container& c, const std::string& kind) {
  c.validate();
  if (c.kind() != kind) throw HeaderError("expected a '" + kind + "' container, got '" + c.kind() + "'");
}

ComplexTensor3 tensor_from(const Container& c) {
  const auto shape = c.shape();
  if (shape.size() != 3) throw ShapeMismatchError("expected a rank-3 shape");
  ComplexTensor3 t(shape[0], shape[1], shape[2]);
  t.raw() = c.payload;
  return t;
}

}  // namespace

std::string Container::kind() const {
  if (!header.contains("kind") || !header["kind"].is_string()) throw HeaderError("header has no kind");
  return header["kind"].get<std::string>();
}

std::vector<std::size_t> Container::shape() const {
  if (!header.contains("shape") || !header["shape"].is_array()) throw HeaderError("header has no shape");
  std::vector<std::size_t> s;
  for (const auto& v : header["shape"]) {
    if (!v.is_number_unsigned()) throw HeaderError("shape entries must be non-negative integers");
    s.push_back(v.get<std::size_t>());
  }
  return s;
}

void Container::validate() const {
  if (!header.is_object()) throw HeaderError("header must be a JSON object");
  static const char* kinds[] = {"mstm", "trtm", "taumodes", "tomo", "counts"};
  const std::string k = kind();
  if (std::find(std::begin(kinds), std::end(kinds), k) == std::end(kinds))
    throw HeaderError("unknown container kind '" + k + "'");
  for (const char* key : {"axis_order", "grid", "created", "version"})
    if (!header.contains(key)) throw HeaderError(std::string("header is missing '") + key + "'");
  if (header["version"] != "1") throw HeaderError("unsupported container version");
  const auto s = shape();
  if (header["axis_order"].size() != s.size()) throw ShapeMismatchError("axis_order and shape lengths differ");
  const auto& g = header["grid"];
  for (const char* key : {"center", "step", "samples", "units"})
    if (!g.contains(key)) throw HeaderError(std::string("grid is missing '") + key + "'");
  std::size_t n = 1;
  for (auto v : s) n *= v;
  if (n != payload.size()) {
    std::ostringstream msg;
    msg << "shape mismatch: shape holds " << n << " values, payload has " << payload.size();
    throw ShapeMismatchError(msg.str());
  }
}

std::string serialize_container(const Container& c) {
  c.validate();
  const std::string header = c.header.dump();
  if (header.size() > 0xFFFFFFFFu) throw HeaderError("header too large");
  std::string out(kMagic, 4);
  const auto len = static_cast<std::uint32_t>(header.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  out += header;
  out.reserve(out.size() + 16 * c.payload.size());
  for (const auto& z : c.payload) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  return out;
}

Container parse_container(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagicError("bad magic: not a QTM1 container");
  if (bytes.size() < 8) throw TruncatedPayloadError("truncated header length");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t len = p[4] | (p[5] << 8) | (p[6] << 16) | (static_cast<std::uint32_t>(p[7]) << 24);
  if (bytes.size() < 8 + static_cast<std::size_t>(len)) throw TruncatedPayloadError("truncated header");
  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::parse_error& e) {
    throw HeaderError(std::string("header is not valid JSON: ") + e.what());
  }
  std::size_t n = 1;
  for (auto v : c.shape()) n *= v;
  const std::size_t body = bytes.size() - 8 - len;
  if (body < 16 * n) {
    std::ostringstream msg;
    msg << "truncated payload: expected " << 16 * n << " bytes, found " << body;
    throw TruncatedPayloadError(msg.str());
  }
  if (body > 16 * n) throw ShapeMismatchError("payload is longer than the shape implies");
  c.payload.resize(n);
  const unsigned char* q = p + 8 + len;
  for (std::size_t i = 0; i < n; ++i) c.payload[i] = {get_f64(q + 16 * i), get_f64(q + 16 * i + 8)};
  c.validate();
  return c;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void write_container(const Container& c, const std::string& path) { write_text_file(path, serialize_container(c)); }

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_container(ss.str());
}

Container to_container(const Mstm& m, const DispersionModel* model, std::optional<std::uint64_t> seed) {
  m.validate();
  nlohmann::json grid = {{"center", m.grid.center_freq_hz},
                         {"step", m.grid.step_hz},
                         {"samples", m.grid.samples},
                         {"units", "Hz"}};
  Container c;
  c.header = base_header("mstm", {m.data.slices(), m.data.rows(), m.data.cols()},
                         {"frequency", "output_mode", "input_mode"}, std::move(grid), seed);
  c.header["mode_labels"] = m.mode_labels;
  if (model) {
    c.header["model"] = {{"num_modes", model->num_modes},
                         {"length_m", model->length_m},
                         {"beta0", model->beta0},
                         {"beta1", model->beta1},
                         {"beta2", model->beta2},
                         {"mixing_seed", model->mixing_seed},
                         {"mixing_strength", model->mixing_strength},
                         {"ideal_separable", model->ideal_separable}};
  }
  c.payload = m.data.raw();
  return c;
}

Container to_container(const Trtm& t, std::optional<std::uint64_t> seed) {
  t.validate();
  Container c;
  c.header = base_header("trtm", {t.data.slices(), t.data.rows(), t.data.cols()},
                         {"delay", "output_mode", "input_mode"}, time_grid_json(t.grid), seed);
  c.header["center_freq"] = t.center_freq_hz;
  c.payload = t.data.raw();
  return c;
}

Container to_container(const TauModeSet& s, std::optional<std::uint64_t> seed) {
  const std::size_t n = s.modes.size();
  const std::size_t m_in = n ? static_cast<std::size_t>(s.modes[0].input_vec.size()) : 0;
  const std::size_t m_out = n ? static_cast<std::size_t>(s.modes[0].output_vec.size()) : 0;
  Container c;
  c.header = base_header("taumodes", {n, m_in + m_out}, {"mode", "input_then_output"},
                         time_grid_json(s.source_grid), seed);
  std::vector<double> delays, strengths;
  std::vector<std::size_t> bins;
  for (const auto& mode : s.modes) {
    if (static_cast<std::size_t>(mode.input_vec.size()) != m_in ||
        static_cast<std::size_t>(mode.output_vec.size()) != m_out)
      throw DimensionError("tau-mode vectors differ in length");
    delays.push_back(mode.delay_s);
    strengths.push_back(mode.strength);
    bins.push_back(mode.delay_bin);
    for (Eigen::Index i = 0; i < mode.input_vec.size(); ++i) c.payload.push_back(mode.input_vec(i));
    for (Eigen::Index i = 0; i < mode.output_vec.size(); ++i) c.payload.push_back(mode.output_vec(i));
  }
  c.header["delays_s"] = delays;
  c.header["delay_bins"] = bins;
  c.header["strengths"] = strengths;
  c.header["input_modes"] = m_in;
  c.header["truncated"] = s.truncated;
  return c;
}

Container to_container(const MeasOperator& op, std::optional<std::uint64_t> seed) {
  const std::size_t d = op.dim();
  Container c;
  c.header = base_header("tomo", {d, d}, {"row", "col"},
                         {{"center", 0}, {"step", 1}, {"samples", d}, {"units", "index"}}, seed);
  for (Eigen::Index i = 0; i < op.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) c.payload.push_back(op.matrix(i, j));
  return c;
}

Container to_container(const CountRecord& r, const TimeGrid& grid, std::optional<std::uint64_t> seed) {
  if (r.counts.size() != grid.samples) throw DimensionError("count record does not match the grid");
  Container c;
  c.header = base_header("counts", {r.counts.size()}, {"time_bin"}, time_grid_json(grid), seed);
  c.header["setting_id"] = r.setting_id;
  c.header["probe_id"] = r.probe_id;
  c.header["sampled"] = r.sampled;
  for (double v : r.counts) c.payload.emplace_back(v, 0.0);
  return c;
}

Mstm mstm_from_container(const Container& c) {
  expect_kind(c, "mstm");
  Mstm m;
  const auto& g = c.header["grid"];
  m.grid.center_freq_hz = g.at("center").get<double>();
  m.grid.step_hz = g.at("step").get<double>();
  m.grid.samples = g.at("samples").get<std::size_t>();
  m.data = tensor_from(c);
  if (c.header.contains("mode_labels")) m.mode_labels = c.header["mode_labels"].get<std::vector<std::string>>();
  m.validate();
  return m;
}

Trtm trtm_from_container(const Container& c) {
  expect_kind(c, "trtm");
  Trtm t;
  t.grid = time_grid_from(c.header["grid"]);
  t.center_freq_hz = c.header.value("center_freq", 0.0);
  t.data = tensor_from(c);
  t.validate();
  return t;
}

TauModeSet taumodes_from_container(const Container& c) {
  expect_kind(c, "taumodes");
  const auto shape = c.shape();
  if (shape.size() != 2) throw ShapeMismatchError("taumodes shape must be [modes, inputs + outputs]");
  TauModeSet s;
  s.source_grid = time_grid_from(c.header["grid"]);
  s.truncated = c.header.value("truncated", false);
  const auto delays = c.header.at("delays_s").get<std::vector<double>>();
  const auto strengths = c.header.at("strengths").get<std::vector<double>>();
  const auto bins = c.header.at("delay_bins").get<std::vector<std::size_t>>();
  const auto m_in = c.header.at("input_modes").get<std::size_t>();
  if (delays.size() != shape[0] || strengths.size() != shape[0] || bins.size() != shape[0] || m_in > shape[1])
    throw ShapeMismatchError("taumodes metadata does not match the shape");
  const std::size_t m_out = shape[1] - m_in;
  for (std::size_t k = 0; k < shape[0]; ++k) {
    TauMode mode;
    mode.delay_s = delays[k];
    mode.strength = strengths[k];
    mode.delay_bin = bins[k];
    mode.input_vec.resize(static_cast<Eigen::Index>(m_in));
    mode.output_vec.resize(static_cast<Eigen::Index>(m_out));
    const Complex* row = c.payload.data() + k * shape[1];
    for (std::size_t i = 0; i < m_in; ++i) mode.input_vec(static_cast<Eigen::Index>(i)) = row[i];
    for (std::size_t i = 0; i < m_out; ++i) mode.output_vec(static_cast<Eigen::Index>(i)) = row[m_in + i];
    s.modes.push_back(std::move(mode));
  }
  return s;
}

MeasOperator tomo_from_container(const Container& c) {
  expect_kind(c, "tomo");
  const auto shape = c.shape();
  if (shape.size() != 2 || shape[0] != shape[1]) throw ShapeMismatchError("tomo shape must be [d, d]");
  MeasOperator op;
  const auto d = static_cast<Eigen::Index>(shape[0]);
  op.matrix.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) op.matrix(i, j) = c.payload[static_cast<std::size_t>(i * d + j)];
  return op;
}

std::vector<VerifyCheck> verify_container(const Container& c) {
  std::vector<VerifyCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  try {
    c.validate();
    add("structure", true, "");
  } catch (const std::exception& e) {
    add("structure", false, e.what());
    return out;
  }
  bool finite = true;
  for (const auto& z : c.payload) finite = finite && std::isfinite(z.real()) && std::isfinite(z.imag());
  add("finite", finite, "");
  const std::string round = serialize_container(parse_container(serialize_container(c)));
  add("round_trip", round == serialize_container(c), "");

  std::ostringstream detail;
  try {
    const std::string kind = c.kind();
    if (kind == "mstm") {
      const double defect = max_unitarity_defect(mstm_from_container(c));
      detail << "max ||T^H T - I|| = " << defect;
      add("unitarity", defect < 1e-9, detail.str());
    } else if (kind == "trtm") {
      const Trtm t = trtm_from_container(c);
      if (t.inputs() == t.outputs()) {
        const double defect = max_unitarity_defect(trtm_to_mstm(t));
        detail << "max ||T^H T - I|| after inverse transform = " << defect;
        add("unitarity", defect < 1e-9, detail.str());
      }
    } else if (kind == "taumodes") {
      const TauModeSet s = taumodes_from_container(c);
      double worst = 0.0;
      bool ordered = true;
      for (std::size_t k = 0; k < s.modes.size(); ++k) {
        worst = std::max(worst, std::abs(s.modes[k].input_vec.norm() - 1.0));
        worst = std::max(worst, std::abs(s.modes[k].output_vec.norm() - 1.0));
        if (k > 0 && s.modes[k].strength > s.modes[k - 1].strength * (1.0 + 1e-12)) ordered = false;
      }
      detail << "max | ||v|| - 1 | = " << worst;
      add("unit_vectors", worst < 1e-9, detail.str());
      add("strengths_non_increasing", ordered, "");
    } else if (kind == "tomo") {
      const MeasOperator op = tomo_from_container(c);
      const double herm = (op.matrix - op.matrix.adjoint()).norm();
      Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (op.matrix + op.matrix.adjoint()));
      const double min_eig = eig.eigenvalues().minCoeff();
      const double trace = op.matrix.trace().real();
      add("hermitian", herm < 1e-9, "");
      detail << "min eigenvalue = " << min_eig;
      add("psd", min_eig > -1e-9, detail.str());
      add("unit_trace", std::abs(trace - 1.0) < 1e-9, "");
    } else if (kind == "counts") {
      bool ok = true;
      for (const auto& z : c.payload) ok = ok && z.real() >= 0.0 && z.imag() == 0.0;
      add("non_negative_counts", ok, "");
    }
  } catch (const std::exception& e) {
    add("decode", false, e.what());
  }
  return out;
}

}  // namespace tbf
