// tbf: time-bin measurements through a simulated multimode fiber.
//
// Exit codes: 0 success, 1 validation error, 2 numerical non-convergence.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tbf/container.hpp"
#include "tbf/csv.hpp"
#include "tbf/fiber_model.hpp"
#include "tbf/mub.hpp"
#include "tbf/parallel.hpp"
#include "tbf/pipeline.hpp"
#include "tbf/run_config.hpp"
#include "tbf/spectral.hpp"
#include "tbf/tau_modes.hpp"
#include "tbf/tomography.hpp"

namespace {

using namespace tbf;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool expectation = false;
  unsigned threads = 0;
};

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig() : RunConfig::load(c.config_path);
  if (c.seed) {
    cfg.set("fiber_seed", std::to_string(*c.seed));
    cfg.set("noise_seed", std::to_string(*c.seed));
  }
  if (c.expectation) cfg.set("expectation", "true");
  if (c.threads) cfg.set("threads", std::to_string(c.threads));
  if (!c.out.empty()) cfg.set("out", c.out);
  set_max_threads(static_cast<unsigned>(cfg.get_uint("threads")));
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& fallback) {
  const std::string o = cfg.get_string("out");
  return o.empty() ? fallback : o;
}

// sibling file: "dir/name.ext" -> "dir/name<suffix>"
std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::optional<std::uint64_t> seed_of(const Container& c) {
  if (c.header.contains("seed")) return c.header["seed"].get<std::uint64_t>();
  return std::nullopt;
}

int cmd_fiber_synth(const Common& common, std::optional<std::size_t> modes, std::optional<double> span_ps) {
  RunConfig cfg = load_config(common);
  if (modes) cfg.set("fiber_modes", std::to_string(*modes));
  DeviceConfig dc = device_config(cfg);
  if (span_ps) dc.delay_span_s = *span_ps * 1e-12;
  const std::size_t m = dc.resolved_fiber_modes();
  const double span = (span_ps && *span_ps == 0.0) ? 0.0 : dc.resolved_span_s();
  DispersionModel model = make_default_model(m, span, dc.fiber_seed);
  model.mixing_strength = dc.mixing_strength;
  const FreqGrid grid = dc.freq_grid();
  if (auto w = aliasing_warning(model, grid)) std::cerr << "warning: " << *w << "\n";
  const Mstm mstm = synthesize_mstm(model, grid);
  const std::string path = out_path(cfg, "mstm.qtm");
  write_container(to_container(mstm, &model, dc.fiber_seed), path);
  std::cout << path << "\n";
  return 0;
}

int cmd_trtm(const Common& common, const std::string& in) {
  RunConfig cfg = load_config(common);
  const Container c = read_container(in);
  const Trtm t = mstm_to_trtm(mstm_from_container(c));
  const std::string path = out_path(cfg, "trtm.qtm");
  write_container(to_container(t, seed_of(c)), path);
  std::cout << path << "\n";
  return 0;
}

int cmd_tau_extract(const Common& common, const std::string& in, std::size_t count, std::string csv) {
  RunConfig cfg = load_config(common);
  const Container c = read_container(in);
  const Trtm t = trtm_from_container(c);
  if (count == 0) count = std::min(t.inputs(), t.outputs());
  const TauModeSet set = construct_tau_modes(t, {count, cfg.get_double("stop_fraction")});
  const std::string path = out_path(cfg, "taumodes.qtm");
  write_container(to_container(set, seed_of(c)), path);
  if (csv.empty()) csv = sibling(path, "_delays.csv");
  CsvTable table{{"mode", "delay_s", "delay_bin", "strength"}, {}};
  for (std::size_t k = 0; k < set.modes.size(); ++k)
    table.add({csv_number(k), csv_number(set.modes[k].delay_s), csv_number(set.modes[k].delay_bin),
               csv_number(set.modes[k].strength)});
  write_text_file(csv, table.str());
  if (set.truncated) std::cerr << "note: extraction stopped after " << set.modes.size() << " modes\n";
  std::cout << path << "\n" << csv << "\n";
  return 0;
}

int cmd_mub_gen(const Common& common, std::size_t d) {
  RunConfig cfg = load_config(common);
  const MubFamily fam = mub_family(d);
  CsvTable table;
  table.columns = {"basis", "state"};
  for (std::size_t k = 0; k < d; ++k) {
    table.columns.push_back("re_" + std::to_string(k));
    table.columns.push_back("im_" + std::to_string(k));
  }
  for (std::size_t b = 0; b < fam.bases.size(); ++b) {
    if (fam.bases[b].label == "computational") continue;
    for (std::size_t s = 0; s < fam.bases[b].states.size(); ++s) {
      std::vector<std::string> row = {fam.bases[b].label, csv_number(s)};
      const CVector& a = fam.bases[b].states[s].amplitudes;
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        row.push_back(csv_number(a(k).real()));
        row.push_back(csv_number(a(k).imag()));
      }
      table.add(std::move(row));
    }
  }
  const std::string path = out_path(cfg, "mub.csv");
  write_text_file(path, table.str());
  std::cout << path << "\n";
  return 0;
}

int cmd_sim_malus(const Common& common) {
  RunConfig cfg = load_config(common);
  const SimulatedDevice dev = build_device(device_config(cfg));
  const NoiseSpec noise = noise_spec(cfg);
  const std::size_t points = cfg.get_uint("theta_points");
  if (points < 4) throw ConfigError("theta_points must be at least 4");
  std::vector<double> theta(points);
  for (std::size_t i = 0; i < points; ++i) theta[i] = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(points);
  const MalusResult r = malus_scan(dev.device, cfg.get_double("probe_phase_rad"), theta, noise, dev.config.pulse,
                                   dev.config.resolved_window_s());
  const std::string path = out_path(cfg, "malus.csv");
  CsvTable table{{"theta_rad", "central_counts"}, {}};
  for (std::size_t i = 0; i < points; ++i) table.add({csv_number(r.theta[i]), csv_number(r.signal[i])});
  write_text_file(path, table.str());
  CsvTable fit{{"visibility", "theta_max_rad", "theta_min_rad", "offset_counts", "cos_counts", "sin_counts"}, {}};
  fit.add({csv_number(r.visibility), csv_number(r.theta_max), csv_number(r.theta_min), csv_number(r.offset),
           csv_number(r.cos_coeff), csv_number(r.sin_coeff)});
  const std::string fit_path = sibling(path, "_fit.csv");
  write_text_file(fit_path, fit.str());
  std::cout << "visibility " << csv_number(r.visibility) << "\n" << path << "\n" << fit_path << "\n";
  return 0;
}

int cmd_sim_peaks(const Common& common) {
  RunConfig cfg = load_config(common);
  const SimulatedDevice dev = build_device(device_config(cfg));
  const NoiseSpec noise = noise_spec(cfg);
  const std::size_t d = dev.device.dim();
  const CVector uniform = CVector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d)));
  const PeakWeights w = simulate_peaks(dev, uniform, uniform, noise, 0);
  const std::string path = out_path(cfg, "peaks.csv");
  CsvTable table{{"peak", "center_s", "counts", "relative_weight"}, {}};
  for (std::size_t j = 0; j < w.raw.size(); ++j)
    table.add({csv_number(j), csv_number(w.centers_s[j]), csv_number(w.raw[j]), csv_number(w.normalized[j])});
  write_text_file(path, table.str());
  std::cout << path << "\n";
  return 0;
}

int cmd_tomo_run(const Common& common) {
  RunConfig cfg = load_config(common);
  const SimulatedDevice dev = build_device(device_config(cfg));
  const NoiseSpec noise = noise_spec(cfg);
  const auto targets = mub_targets(dev.device.dim());
  const std::size_t index = cfg.get_uint("target_index");
  if (index >= targets.size()) throw ConfigError("target_index exceeds the number of MUB targets");
  const StateVector& target = targets[index];

  const Reconstruction rec = reconstruct(simulate_tomography(dev, target.amplitudes, noise, 0));
  if (!rec.converged) throw ConvergenceError("reconstruction did not converge within the iteration limit");
  const MonteCarloResult mc = monte_carlo_fidelity(dev, target, cfg.get_uint("trials"), noise);
  if (mc.unconverged) throw ConvergenceError(std::to_string(mc.unconverged) + " Monte-Carlo reconstructions did not converge");

  const std::string path = out_path(cfg, "tomo.qtm");
  write_container(to_container(rec.op, noise.rng_seed), path);
  CsvTable table{{"dim", "target_index", "trials", "fidelity_single", "fidelity_mean", "fidelity_std"}, {}};
  table.add({csv_number(dev.device.dim()), csv_number(index), csv_number(mc.fidelities.size()),
             csv_number(fidelity(rec.op, target).value), csv_number(mc.mean), csv_number(mc.std)});
  const std::string csv = sibling(path, "_fidelity.csv");
  write_text_file(csv, table.str());

  CsvTable grid{{"row", "col", "re", "im"}, {}};
  for (Eigen::Index i = 0; i < rec.op.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < rec.op.matrix.cols(); ++j)
      grid.add({csv_number(static_cast<std::size_t>(i)), csv_number(static_cast<std::size_t>(j)),
                csv_number(rec.op.matrix(i, j).real()), csv_number(rec.op.matrix(i, j).imag())});
  const std::string grid_csv = sibling(path, "_operator.csv");
  write_text_file(grid_csv, grid.str());
  std::cout << path << "\n" << csv << "\n" << grid_csv << "\n";
  return 0;
}

int cmd_tomo_table(const Common& common) {
  RunConfig cfg = load_config(common);
  const NoiseSpec noise = noise_spec(cfg);
  const std::size_t trials = cfg.get_uint("trials");
  const std::size_t max_targets = cfg.get_uint("table_max_targets");
  CsvTable table{{"dim", "targets", "trials", "fidelity_mean", "fidelity_std"}, {}};
  for (std::size_t d : cfg.get_uint_list("table_dims")) {
    RunConfig per = cfg;
    per.set("dim", std::to_string(d));
    const SimulatedDevice dev = build_device(device_config(per));
    auto targets = mub_targets(d);
    if (max_targets && targets.size() > max_targets) targets.resize(max_targets);
    std::vector<double> all;
    for (const auto& t : targets) {
      const MonteCarloResult mc = monte_carlo_fidelity(dev, t, trials, noise);
      if (mc.unconverged) throw ConvergenceError("Monte-Carlo reconstructions did not converge");
      all.insert(all.end(), mc.fidelities.begin(), mc.fidelities.end());
    }
    double mean = 0.0;
    for (double f : all) mean += f;
    mean /= static_cast<double>(all.size());
    double ss = 0.0;
    for (double f : all) ss += (f - mean) * (f - mean);
    const double sd = std::sqrt(ss / static_cast<double>(all.size() - 1));
    table.add({csv_number(d), csv_number(targets.size()), csv_number(trials), csv_number(mean), csv_number(sd)});
    std::cerr << "d=" << d << " mean fidelity " << mean << "\n";
  }
  const std::string path = out_path(cfg, "fidelity_table.csv");
  write_text_file(path, table.str());
  std::cout << path << "\n";
  return 0;
}

int cmd_verify(const Common& common, const std::string& in) {
  load_config(common);
  const Container c = read_container(in);
  bool ok = true;
  for (const auto& check : verify_container(c)) {
    std::cout << (check.passed ? "ok   " : "FAIL ") << check.name;
    if (!check.detail.empty()) std::cout << "  " << check.detail;
    std::cout << "\n";
    ok = ok && check.passed;
  }
  if (!ok) {
    std::cerr << "verify: " << in << " failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bin measurements through a simulated multimode fiber"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "run configuration (key = value)");
  app.add_option("--seed", common.seed, "seed for the fiber and the noise streams");
  app.add_option("--out", common.out, "output path");
  app.add_flag("--expectation", common.expectation, "report expected counts instead of sampling");
  app.add_option("--threads", common.threads, "worker threads (0: all cores)");

  int rc = 0;
  auto* fiber = app.add_subcommand("fiber", "fiber models");
  fiber->require_subcommand(1);
  auto* synth = fiber->add_subcommand("synth", "synthesize a multi-spectral transmission matrix");
  std::optional<std::size_t> modes;
  std::optional<double> span_ps;
  synth->add_option("--modes", modes, "number of fiber modes");
  synth->add_option("--delay-span", span_ps, "group delay span in ps");

  auto* trtm = app.add_subcommand("trtm", "transform an MSTM container to the time domain");
  std::string in;
  trtm->add_option("--in", in, "MSTM container")->required();

  auto* tau = app.add_subcommand("tau", "tau-modes");
  tau->require_subcommand(1);
  auto* extract = tau->add_subcommand("extract", "extract tau-modes from a TRTM container");
  std::size_t count = 0;
  std::string delay_csv;
  extract->add_option("--in", in, "TRTM container")->required();
  extract->add_option("--count", count, "modes to extract (0: all)");
  extract->add_option("--csv", delay_csv, "delay table path");

  auto* mub = app.add_subcommand("mub", "mutually unbiased bases");
  mub->require_subcommand(1);
  auto* gen = mub->add_subcommand("gen", "write the non-computational MUB states");
  std::size_t d = 2;
  gen->add_option("--d", d, "dimension")->required();

  auto* sim = app.add_subcommand("sim", "simulated interferometry");
  sim->require_subcommand(1);
  auto* malus = sim->add_subcommand("malus", "two-dimensional phase scan");
  auto* peaks = sim->add_subcommand("peaks", "output peak weights for uniform probe and measurement");

  auto* tomo = app.add_subcommand("tomo", "measurement tomography");
  tomo->require_subcommand(1);
  auto* run = tomo->add_subcommand("run", "reconstruct one MUB measurement");
  auto* table = tomo->add_subcommand("fidelity-table", "mean fidelity per dimension");

  auto* verify = app.add_subcommand("verify", "check a container's invariants");
  verify->add_option("--in", in, "container")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) rc = cmd_fiber_synth(common, modes, span_ps);
    else if (*trtm) rc = cmd_trtm(common, in);
    else if (*extract) rc = cmd_tau_extract(common, in, count, delay_csv);
    else if (*gen) rc = cmd_mub_gen(common, d);
    else if (*malus) rc = cmd_sim_malus(common);
    else if (*peaks) rc = cmd_sim_peaks(common);
    else if (*run) rc = cmd_tomo_run(common);
    else if (*table) rc = cmd_tomo_table(common);
    else if (*verify) rc = cmd_verify(common, in);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
