// experiment.hpp — Experiment configuration, figure presets at desk scale,
// parameter scans with per-point fault isolation, and run manifests.

#pragma once

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsim/dynamics.hpp"
#include "epsim/io.hpp"
#include "epsim/models.hpp"
#include "epsim/parallel.hpp"
#include "epsim/spectral.hpp"
#include "epsim/trotter.hpp"
#include "epsim/version.hpp"

namespace epsim::cli {

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fig1b1", "fig1b2", "fig1c1", "fig1c2", "fig2a",
      "fig2b",  "fig3b",  "figS1",  "figS2",  "figS3"};
  return names;
}

struct TimeGrid {
  double t_max = 3.0;
  int steps = 60;

  std::vector<double> times() const {
    if (steps < 1 || !(t_max > 0))
      throw std::invalid_argument("TimeGrid: need steps >= 1 and t_max > 0");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = t_max * i / steps;
    return t;
  }
};

struct ExperimentConfig {
  std::string preset;                // empty for an explicit model run
  bool model_explicit = false;
  models::ModelSpec model;
  std::optional<double> theta;       // with delta_abs, overrides (dx, dy)
  double delta_abs = 0.1;
  std::vector<double> scan_hy;
  std::vector<double> scan_theta;
  TimeGrid time;
  dynamics::Method method = dynamics::Method::Krylov;
  std::uint64_t shots = 200000;
  std::uint64_t seed = 12345;
  std::string out_dir = "epsim_out";
  std::optional<int> n_override;
  bool dump_gates = false;
  // figS3 grid
  std::vector<double> map_hx;
  std::vector<double> map_hy;

  void validate() const {
    const bool has_preset = !preset.empty();
    if (has_preset == model_explicit)
      throw std::invalid_argument(
          "config: exactly one of preset / explicit model must be given");
    if (has_preset) {
      bool known = false;
      for (const auto& p : preset_names()) known = known || p == preset;
      if (!known) throw std::invalid_argument("config: unknown preset " + preset);
    }
    if (method == dynamics::Method::Dense) {
      const models::ModelSpec probe = resolved_model();
      if (models::env_basis(probe).dim() > kDefaultDenseCap)
        throw std::invalid_argument(
            "config: N override exceeds the dense cap for the dense method");
    }
  }

  models::ModelSpec resolved_model() const {
    models::ModelSpec m = model;
    if (n_override) m.num_sites = *n_override;
    return m;
  }
};

inline const char* method_name(dynamics::Method m) {
  return m == dynamics::Method::Dense ? "dense" : "krylov";
}

inline dynamics::Method method_from_string(const std::string& s) {
  if (s == "dense") return dynamics::Method::Dense;
  if (s == "krylov") return dynamics::Method::Krylov;
  throw std::invalid_argument("unknown method: " + s);
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["preset"] = c.preset.empty() ? nlohmann::ordered_json(nullptr)
                                 : nlohmann::ordered_json(c.preset);
  const models::ModelSpec m = c.resolved_model();
  j["model"] = {{"kind", models::to_string(m.kind)},
                {"N", m.num_sites},
                {"J", m.J},
                {"U", m.U},
                {"hx", m.hx},
                {"hy", m.hy},
                {"dx", m.dx},
                {"dy", m.dy},
                {"filling", m.resolved_filling()}};
  j["theta"] = c.theta ? nlohmann::ordered_json(*c.theta) : nlohmann::ordered_json(nullptr);
  j["delta_abs"] = c.delta_abs;
  j["scan"] = {{"hy", c.scan_hy}, {"theta", c.scan_theta}};
  j["time"] = {{"t_max", c.time.t_max}, {"steps", c.time.steps}};
  j["method"] = method_name(c.method);
  j["shots"] = c.shots;
  j["seed"] = c.seed;
  j["out"] = c.out_dir;
  j["map_grid"] = {{"hx", c.map_hx}, {"hy", c.map_hy}};
  return j;
}

// Merges the keys present in j onto c; absent keys keep their values. Used
// both for config files and for flag overrides on top of a preset.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (j.contains("preset") && !j["preset"].is_null())
    c.preset = j["preset"].get<std::string>();
  if (j.contains("model") && !j["model"].is_null()) {
    const auto& m = j["model"];
    if (c.preset.empty()) c.model_explicit = true;
    if (m.contains("kind")) c.model.kind = models::model_kind_from_string(m["kind"]);
    if (m.contains("N")) c.model.num_sites = m["N"].get<int>();
    if (m.contains("J")) c.model.J = m["J"].get<double>();
    if (m.contains("U")) c.model.U = m["U"].get<double>();
    if (m.contains("hx")) c.model.hx = m["hx"].get<double>();
    if (m.contains("hy")) c.model.hy = m["hy"].get<double>();
    if (m.contains("dx")) c.model.dx = m["dx"].get<double>();
    if (m.contains("dy")) c.model.dy = m["dy"].get<double>();
    if (m.contains("filling")) c.model.filling = m["filling"].get<int>();
  }
  if (j.contains("theta") && !j["theta"].is_null()) c.theta = j["theta"].get<double>();
  if (j.contains("delta_abs")) c.delta_abs = j["delta_abs"].get<double>();
  if (j.contains("scan")) {
    if (j["scan"].contains("hy"))
      c.scan_hy = j["scan"]["hy"].get<std::vector<double>>();
    if (j["scan"].contains("theta"))
      c.scan_theta = j["scan"]["theta"].get<std::vector<double>>();
  }
  if (j.contains("time")) {
    if (j["time"].contains("t_max")) c.time.t_max = j["time"]["t_max"].get<double>();
    if (j["time"].contains("steps")) c.time.steps = j["time"]["steps"].get<int>();
  }
  if (j.contains("method")) c.method = method_from_string(j["method"].get<std::string>());
  if (j.contains("shots")) c.shots = j["shots"].get<std::uint64_t>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  if (j.contains("N_override") && !j["N_override"].is_null())
    c.n_override = j["N_override"].get<int>();
  if (j.contains("dump_gates")) c.dump_gates = j["dump_gates"].get<bool>();
  if (j.contains("map_grid")) {
    if (j["map_grid"].contains("hx"))
      c.map_hx = j["map_grid"]["hx"].get<std::vector<double>>();
    if (j["map_grid"].contains("hy"))
      c.map_hy = j["map_grid"]["hy"].get<std::vector<double>>();
  }
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  apply_json(c, j);
  return c;
}

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace detail

// Desk-scale figure presets (12 spins, 6 fermion sites, 2 circuit qubits;
// the susceptibility maps run N=8 dense).
inline ExperimentConfig resolve_preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.model.hx = 1.0;
  c.delta_abs = 0.1;
  const std::vector<double> hy_family = {0.0, 0.5, 0.9, 0.99};
  const double pi = M_PI;

  if (name == "fig1b1" || name == "fig1b2") {
    c.model.kind = models::ModelKind::Ising;
    c.model.num_sites = 12;
    c.model.J = 0.5;
    c.scan_hy = hy_family;
    c.theta = name == "fig1b1" ? pi / 4 : pi / 2;
  } else if (name == "fig1c1" || name == "fig1c2") {
    c.model.kind = models::ModelKind::Heisenberg;
    c.model.num_sites = 12;
    c.model.J = 0.5;
    c.scan_hy = hy_family;
    c.theta = name == "fig1c1" ? pi / 4 : pi / 2;
  } else if (name == "fig2a" || name == "fig2b") {
    c.model.kind = models::ModelKind::Fermi;
    c.model.num_sites = 6;
    c.model.J = 0.1;
    c.model.U = 0.4;
    c.scan_hy = hy_family;
    c.theta = name == "fig2a" ? pi / 4 : pi / 2;
  } else if (name == "figS1") {
    c.model.kind = models::ModelKind::Ising;
    c.model.num_sites = 12;
    c.model.J = 0.5;
    c.scan_hy = hy_family;
    c.scan_theta = {45 * pi / 200, 48 * pi / 200, 52 * pi / 200, 55 * pi / 200};
  } else if (name == "figS2") {
    c.model.kind = models::ModelKind::Ising;
    c.model.num_sites = 12;
    c.model.J = 0.5;
    c.model.hy = 0.9;
    c.scan_theta = {45 * pi / 200, 48 * pi / 200, 50 * pi / 200, 52 * pi / 200,
                    55 * pi / 200};
  } else if (name == "figS3") {
    c.model.kind = models::ModelKind::Ising;
    c.model.num_sites = 8;
    c.model.J = 0.5;
    c.map_hx = detail::linspace(0.5, 1.5, 11);
    c.map_hy = detail::linspace(0.0, 1.5, 31);
  } else if (name == "fig3b") {
    c.model.kind = models::ModelKind::Ising;
    c.model.num_sites = 2;
    c.model.J = 0.01;
    c.model.dx = 0.5;
    c.model.dy = 0.5;
    c.scan_hy = {0.2, 0.5, 0.9};
    c.time.t_max = 2.0;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return c;
}

struct RunReport {
  std::string out_dir;
  std::vector<std::string> outputs;   // file names relative to out_dir
  std::vector<std::string> warnings;
  std::vector<std::string> failures;  // per-point failure messages
  bool ok() const { return failures.empty(); }
};

namespace detail {

struct ScanPoint {
  std::string label;
  models::ModelSpec spec;
};

inline models::ModelSpec apply_theta(models::ModelSpec spec, double theta,
                                     double delta_abs) {
  const auto [dx, dy] = models::theta_to_delta({delta_abs, theta});
  spec.dx = dx;
  spec.dy = dy;
  return spec;
}

inline std::vector<ScanPoint> scan_points(const ExperimentConfig& c) {
  models::ModelSpec base = c.resolved_model();
  if (c.theta && c.scan_theta.empty()) base = apply_theta(base, *c.theta, c.delta_abs);

  std::vector<ScanPoint> pts;
  if (c.scan_theta.empty() && c.scan_hy.empty()) {
    pts.push_back({"point", base});
  } else if (c.scan_theta.empty()) {
    for (double hy : c.scan_hy) {
      models::ModelSpec s = base;
      s.hy = hy;
      pts.push_back({"hy=" + io::format_label(hy), s});
    }
  } else if (c.scan_hy.empty()) {
    for (double th : c.scan_theta)
      pts.push_back({"theta=" + io::format_label(th),
                     apply_theta(base, th, c.delta_abs)});
  } else {
    for (double th : c.scan_theta)
      for (double hy : c.scan_hy) {
        models::ModelSpec s = apply_theta(base, th, c.delta_abs);
        s.hy = hy;
        pts.push_back(
            {"theta=" + io::format_label(th) + ";hy=" + io::format_label(hy), s});
      }
  }
  return pts;
}

inline void warn_scale(const models::ModelSpec& spec, RunReport& report) {
  const bool big_spins =
      spec.kind != models::ModelKind::Fermi && spec.num_sites > 16;
  const bool big_fermi =
      spec.kind == models::ModelKind::Fermi && spec.num_sites > 8;
  if (big_spins || big_fermi)
    report.warnings.push_back(
        "N = " + std::to_string(spec.num_sites) +
        " sites exceeds the desk-scale envelope; expect long runtimes");
}

inline std::string zero_pad(std::size_t k, int width = 3) {
  std::string s = std::to_string(k);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

struct IndexWriter {
  std::string rows = "id,label,file,status,message\n";
  std::size_t next_id = 0;

  void ok(const std::string& label, const std::string& file) {
    rows += zero_pad(next_id++) + "," + label + "," + file + ",ok,\n";
  }
  void error(const std::string& label, const std::string& message) {
    std::string safe = message;
    for (char& ch : safe)
      if (ch == ',' || ch == '\n') ch = ';';
    rows += zero_pad(next_id++) + "," + label + ",,error," + safe + "\n";
  }
};

}  // namespace detail

inline void write_manifest(const ExperimentConfig& config, RunReport& report,
                           double wall_seconds) {
  report.outputs.push_back("manifest.json");
  nlohmann::ordered_json m;
  m["tool"] = "epsim";
  m["version"] = kVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["config"] = config_json(config);
  m["seed"] = config.seed;
  m["wall_time_seconds"] = wall_seconds;
  m["outputs"] = report.outputs;
  m["warnings"] = report.warnings;
  m["failures"] = report.failures;
  io::write_text_file(
      (std::filesystem::path(config.out_dir) / "manifest.json").string(),
      m.dump(2) + "\n");
}

// Coherence-trace scan: the engine behind the fig1/fig2/figS1/figS2 presets
// and explicit-model runs. Points run concurrently; files are written by the
// calling thread only.
inline RunReport run_scan(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();
  RunReport report;
  report.out_dir = config.out_dir;
  fs::create_directories(config.out_dir);

  const std::vector<detail::ScanPoint> points = detail::scan_points(config);
  const std::vector<double> times = config.time.times();

  struct PointResult {
    bool ok = false;
    std::string error;
    dynamics::CoherenceTrace trace;
  };
  std::vector<PointResult> results(points.size());

  parallel_for(points.size(), [&](std::size_t k) {
    try {
      const models::ModelSpec& spec = points[k].spec;
      spec.validate();
      const OperatorSum H = models::build_env(spec);
      const OperatorSum V = models::build_coupling(spec);
      const StateVector G =
          dynamics::ground_state_auto(H, models::polarized_reference_bits(spec));
      results[k].trace = dynamics::coherence_trace(H, V, G, times, config.method);
      results[k].ok = true;
    } catch (const std::exception& e) {
      results[k].error = e.what();
    }
  });

  for (const auto& p : points) detail::warn_scale(p.spec, report);

  detail::IndexWriter index;
  std::string summary = "t";
  for (std::size_t k = 0; k < points.size(); ++k)
    if (results[k].ok) summary += ",C[" + points[k].label + "]";
  summary += '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    summary += io::format_double(times[i]);
    for (std::size_t k = 0; k < points.size(); ++k)
      if (results[k].ok)
        summary += "," + io::format_double(results[k].trace.coherence_clamped(i));
    summary += '\n';
  }

  for (std::size_t k = 0; k < points.size(); ++k) {
    if (results[k].ok) {
      const std::string file = "trace_" + detail::zero_pad(k) + ".csv";
      io::write_text_file((fs::path(config.out_dir) / file).string(),
                          io::trace_csv(results[k].trace));
      report.outputs.push_back(file);
      index.ok(points[k].label, file);
    } else {
      index.error(points[k].label, results[k].error);
      report.failures.push_back(points[k].label + ": " + results[k].error);
    }
  }
  io::write_text_file((fs::path(config.out_dir) / "summary.csv").string(), summary);
  report.outputs.push_back("summary.csv");
  index.ok("summary", "summary.csv");
  index.ok("manifest", "manifest.json");
  index.ok("index", "index.csv");
  io::write_text_file((fs::path(config.out_dir) / "index.csv").string(), index.rows);
  report.outputs.push_back("index.csv");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_manifest(config, report, wall);
  return report;
}

// figS3: susceptibility maps for the balanced and Hermitian-only couplings.
inline RunReport run_susceptibility_maps(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();
  RunReport report;
  report.out_dir = config.out_dir;
  fs::create_directories(config.out_dir);

  const models::ModelSpec base = config.resolved_model();
  const std::vector<double> hx =
      config.map_hx.empty() ? detail::linspace(0.5, 1.5, 11) : config.map_hx;
  const std::vector<double> hy =
      config.map_hy.empty() ? detail::linspace(0.0, 1.5, 31) : config.map_hy;

  detail::IndexWriter index;
  const double d = config.delta_abs;
  const std::pair<const char*, std::pair<double, double>> variants[] = {
      {"map_balanced.csv", {d / std::sqrt(2.0), d / std::sqrt(2.0)}},
      {"map_hermitian.csv", {d, 0.0}}};
  for (const auto& [file, delta] : variants) {
    try {
      const spectral::SusceptibilityMap map =
          spectral::susceptibility_map(base, hx, hy, delta);
      io::write_text_file((fs::path(config.out_dir) / file).string(), io::map_csv(map));
      report.outputs.push_back(file);
      index.ok("", file);
    } catch (const std::exception& e) {
      report.failures.push_back(std::string(file) + ": " + e.what());
      index.error(file, e.what());
    }
  }
  index.ok("manifest", "manifest.json");
  index.ok("index", "index.csv");
  io::write_text_file((fs::path(config.out_dir) / "index.csv").string(), index.rows);
  report.outputs.push_back("index.csv");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_manifest(config, report, wall);
  return report;
}

// fig3b: per hy, the dense reference curve, the exact-amplitude circuit curve
// on the adaptive schedule, and shot-sampled estimates on a coarse schedule
// (postselection thins trajectories ~4x per step, so only early points carry
// meaningful statistics).
inline RunReport run_circuit_preset(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();
  RunReport report;
  report.out_dir = config.out_dir;
  fs::create_directories(config.out_dir);

  models::ModelSpec base = config.resolved_model();
  if (base.num_sites != 2) {
    report.warnings.push_back("circuit preset always runs the two-site environment");
    base.num_sites = 2;
  }
  const std::vector<double> hys =
      config.scan_hy.empty() ? std::vector<double>{0.2, 0.5, 0.9} : config.scan_hy;

  detail::IndexWriter index;
  for (std::size_t k = 0; k < hys.size(); ++k) {
    models::ModelSpec spec = base;
    spec.hy = hys[k];
    const std::string label = "hy=" + io::format_label(hys[k]);
    const std::string tag = detail::zero_pad(k);
    try {
      const std::vector<double> dts =
          circuit::adaptive_schedule(spec, 1e-2, config.time.t_max);
      const circuit::CircuitCoherenceResult circ =
          circuit::coherence_from_circuit(spec, dts);
      if (circ.broken_regime)
        report.warnings.push_back(label + ": broken-regime flag set on the estimator");

      models::ModelSpec env = spec;
      env.dx = env.dy = 0;
      const OperatorSum H = models::build_env(env);
      const OperatorSum V = models::build_coupling(spec);
      const StateVector G =
          spectral::ground_state_ising2_closed_form(spec.J, spec.hx, spec.hy);
      const dynamics::CoherenceTrace dense =
          dynamics::coherence_trace(H, V, G, circ.trace.times, dynamics::Method::Dense);

      const std::string circ_file = "trace_circuit_" + tag + ".csv";
      const std::string dense_file = "trace_dense_" + tag + ".csv";
      io::write_text_file((fs::path(config.out_dir) / circ_file).string(),
                          io::trace_csv(circ.trace));
      io::write_text_file((fs::path(config.out_dir) / dense_file).string(),
                          io::trace_csv(dense));
      report.outputs.push_back(circ_file);
      report.outputs.push_back(dense_file);
      index.ok(label + ";mode=circuit", circ_file);
      index.ok(label + ";mode=dense", dense_file);

      const std::vector<double> coarse(20, config.time.t_max / 20);
      std::string shots_csv = "t,C,overlap,normd_sq,p_accept,p00,accepted,requested\n";
      nlohmann::ordered_json stats_list = nlohmann::ordered_json::array();
      for (std::size_t n_steps = 1; n_steps <= coarse.size(); ++n_steps) {
        const circuit::Circuit probe =
            circuit::build_protocol_circuit(spec, coarse, n_steps, true);
        StateVector in = StateVector::Zero(8);
        in[0] = 1;
        const double p_acc =
            circuit::run_exact(probe, in).cumulative_postselect_probability;
        if (p_acc * static_cast<double>(config.shots) < 50) break;
        const circuit::ShotCoherencePoint pt = circuit::coherence_from_shots(
            spec, coarse, n_steps, config.shots,
            config.seed + 1000 * k + n_steps);
        shots_csv += io::format_double(pt.t) + "," + io::format_double(pt.coherence) +
                     "," + io::format_double(pt.overlap) + "," +
                     io::format_double(pt.normd_sq) + "," +
                     io::format_double(pt.p_accept) + "," + io::format_double(pt.p00) +
                     "," + std::to_string(pt.stats.shots_accepted) + "," +
                     std::to_string(pt.stats.shots_requested) + "\n";
        nlohmann::ordered_json entry = io::trajectory_stats_json(pt.stats);
        entry["t"] = pt.t;
        stats_list.push_back(entry);
      }
      const std::string shots_file = "trace_shots_" + tag + ".csv";
      io::write_text_file((fs::path(config.out_dir) / shots_file).string(), shots_csv);
      report.outputs.push_back(shots_file);
      index.ok(label + ";mode=shots", shots_file);
      const std::string stats_file = "shots_stats_" + tag + ".json";
      io::write_text_file((fs::path(config.out_dir) / stats_file).string(),
                          stats_list.dump(2) + "\n");
      report.outputs.push_back(stats_file);
      index.ok(label + ";mode=shots-stats", stats_file);

      if (config.dump_gates) {
        const std::string gates_file = "gates_" + tag + ".txt";
        const circuit::Circuit one_step =
            circuit::build_protocol_circuit(spec, dts, 1, true);
        io::write_text_file((fs::path(config.out_dir) / gates_file).string(),
                            one_step.to_gate_list());
        report.outputs.push_back(gates_file);
        index.ok(label + ";mode=gates", gates_file);
      }
    } catch (const std::exception& e) {
      report.failures.push_back(label + ": " + e.what());
      index.error(label, e.what());
    }
  }
  index.ok("manifest", "manifest.json");
  index.ok("index", "index.csv");
  io::write_text_file((fs::path(config.out_dir) / "index.csv").string(), index.rows);
  report.outputs.push_back("index.csv");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_manifest(config, report, wall);
  return report;
}

// Entry point; the caller builds the config (resolve_preset + overrides, or
// an explicit model).
inline RunReport run(const ExperimentConfig& config) {
  config.validate();
  if (config.preset == "figS3") return run_susceptibility_maps(config);
  if (config.preset == "fig3b") return run_circuit_preset(config);
  return run_scan(config);
}

// Preset entry point with JSON overrides (the CLI maps flags onto the same
// keys as the config file).
inline RunReport run_preset(const std::string& name,
                            const nlohmann::json& overrides = nlohmann::json::object()) {
  ExperimentConfig c = resolve_preset(name);
  apply_json(c, overrides);
  c.preset = name;
  c.model_explicit = false;
  return run(c);
}

}  // namespace epsim::cli
