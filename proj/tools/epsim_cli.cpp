// epsim — decoherence dynamics of a qubit against non-Hermitian environments:
// figure presets, parameter scans, susceptibility maps and the two-site
// measurement-postselection circuit protocol.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "epsim/experiment.hpp"
#include "epsim/version.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"epsim — exceptional-point decoherence simulator"};
  app.set_version_flag("--version", epsim::kVersion);

  std::string config_path, preset, model, method, out_dir;
  int num_sites = 0, steps = 0, filling = -1, n_override = 0;
  double J = 0, U = 0, hx = 0, hy = 0, dx = 0, dy = 0, theta = 0, delta_abs = 0,
         tmax = 0;
  std::uint64_t shots = 0, seed = 0;
  bool dump_gates = false, list_presets = false;
  std::vector<double> scan_hy, scan_theta;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--preset", preset,
                 "figure preset (fig1b1 fig1b2 fig1c1 fig1c2 fig2a fig2b fig3b "
                 "figS1 figS2 figS3)");
  app.add_flag("--list-presets", list_presets, "list preset names and exit");
  app.add_option("--model", model, "model kind: ising | heisenberg | fermi");
  app.add_option("-N,--num-sites", num_sites, "environment sites");
  app.add_option("--n-override", n_override, "override the preset's N");
  app.add_option("--J", J, "bond coupling");
  app.add_option("--U", U, "on-site interaction (fermi)");
  app.add_option("--hx", hx, "real transverse field");
  app.add_option("--hy", hy, "imaginary transverse field strength");
  app.add_option("--dx", dx, "Hermitian coupling shift");
  app.add_option("--dy", dy, "non-Hermitian coupling shift");
  app.add_option("--filling", filling, "fermi particle number (default N)");
  app.add_option("--theta", theta, "coupling angle; (dx,dy) = |d|(sin,cos)");
  app.add_option("--delta-abs", delta_abs, "coupling magnitude |delta|");
  app.add_option("--scan-hy", scan_hy, "hy scan values")->delimiter(',');
  app.add_option("--scan-theta", scan_theta, "theta scan values")->delimiter(',');
  app.add_option("--tmax", tmax, "evolution time");
  app.add_option("--steps", steps, "time grid steps");
  app.add_option("--method", method, "propagator: krylov | dense");
  app.add_option("--shots", shots, "trajectories for shot mode");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dump-gates", dump_gates, "write the gate list (fig3b)");

  CLI11_PARSE(app, argc, argv);

  if (list_presets) {
    for (const auto& name : epsim::cli::preset_names()) std::cout << name << "\n";
    return 0;
  }

  try {
    json j_file = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot read config file: " + config_path);
      in >> j_file;
    }

    // Flags land on the same keys as the config file and win over it.
    json j_flags = json::object();
    json jmodel = json::object();
    if (app.count("--model")) jmodel["kind"] = model;
    if (app.count("--num-sites")) jmodel["N"] = num_sites;
    if (app.count("--J")) jmodel["J"] = J;
    if (app.count("--U")) jmodel["U"] = U;
    if (app.count("--hx")) jmodel["hx"] = hx;
    if (app.count("--hy")) jmodel["hy"] = hy;
    if (app.count("--dx")) jmodel["dx"] = dx;
    if (app.count("--dy")) jmodel["dy"] = dy;
    if (app.count("--filling")) jmodel["filling"] = filling;
    if (!jmodel.empty()) j_flags["model"] = jmodel;
    if (app.count("--theta")) j_flags["theta"] = theta;
    if (app.count("--delta-abs")) j_flags["delta_abs"] = delta_abs;
    json jscan = json::object();
    if (app.count("--scan-hy")) jscan["hy"] = scan_hy;
    if (app.count("--scan-theta")) jscan["theta"] = scan_theta;
    if (!jscan.empty()) j_flags["scan"] = jscan;
    json jtime = json::object();
    if (app.count("--tmax")) jtime["t_max"] = tmax;
    if (app.count("--steps")) jtime["steps"] = steps;
    if (!jtime.empty()) j_flags["time"] = jtime;
    if (app.count("--method")) j_flags["method"] = method;
    if (app.count("--shots")) j_flags["shots"] = shots;
    if (app.count("--seed")) j_flags["seed"] = seed;
    if (app.count("--out")) j_flags["out"] = out_dir;
    if (app.count("--n-override")) j_flags["N_override"] = n_override;
    if (dump_gates) j_flags["dump_gates"] = true;

    std::string preset_name = preset;
    if (preset_name.empty() && j_file.contains("preset") && !j_file["preset"].is_null())
      preset_name = j_file["preset"].get<std::string>();

    epsim::cli::ExperimentConfig config;
    if (!preset_name.empty()) config = epsim::cli::resolve_preset(preset_name);
    epsim::cli::apply_json(config, j_file);
    epsim::cli::apply_json(config, j_flags);
    config.preset = preset_name;

    const epsim::cli::RunReport report = epsim::cli::run(config);
    std::cout << "wrote " << report.outputs.size() << " files to " << report.out_dir
              << "\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!report.ok()) {
      for (const auto& f : report.failures) std::cerr << "point failed: " << f << "\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
