// Command-line frontend: run, eig, converge, cfl, cloak.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "anisofdtd/analysis.hpp"
#include "anisofdtd/config.hpp"
#include "anisofdtd/solver.hpp"
#include "anisofdtd/study.hpp"

namespace fs = std::filesystem;
using namespace anisofdtd;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3, kGuard = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool force_guard = false;
  bool compare_schemes = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig load(const Options& opt) {
  RunConfig c = load_config(opt.config);
  if (opt.seed) c.seed = *opt.seed;
  return c;
}

fs::path prepare_outputs(const RunConfig& c) {
  const fs::path dir = c.outputs.directory;
  fs::create_directories(dir);
  std::ofstream(dir / "effective_config.yaml") << emit_config(c);
  return dir;
}

// dt_max by spectral radius; on non-convergence the last estimate is used.
CflReport cfl_or_estimate(const YeeGrid& grid, const MaterialGrid& m, SchemeKind s) {
  try {
    return compute_cfl(grid, m, s);
  } catch (const NonConvergence& e) {
    std::cerr << "warning: " << e.what() << "; using last estimate " << e.last_estimate() << "\n";
    CflReport r;
    r.spectral_radius = e.last_estimate();
    r.dt_max = 2.0 / std::sqrt(r.spectral_radius);
    return r;
  }
}

double choose_dt(const RunConfig& c, const CflReport& cfl) {
  if (c.dt) {
    if (*c.dt > cfl.dt_max) {
      std::cerr << "warning: dt " << *c.dt << " exceeds the stability bound " << cfl.dt_max
                << "; the run may diverge\n";
    }
    return *c.dt;
  }
  return c.cfl_factor.value_or(kDefaultCflFactor) * cfl.dt_max;
}

void write_box_dump(const fs::path& path, const Simulation& sim, const BoxConfig& box) {
  const auto cells = box_cells(sim.grid(), SamplingBox{box.lo, box.hi});
  std::ofstream out(path);
  out << "i,j,k,x,y,z,Ex,Ey,Ez\n" << std::setprecision(17);
  const FieldSet& f = sim.fields();
  for (std::size_t c : cells) {
    const Index3 q = sim.grid().unlinear(c);
    const Vec3 p = sim.grid().cell_center(q);
    out << q.i << ',' << q.j << ',' << q.k << ',' << p[0] << ',' << p[1] << ',' << p[2] << ','
        << f.get(FieldFamily::E, 0)[c] << ',' << f.get(FieldFamily::E, 1)[c] << ','
        << f.get(FieldFamily::E, 2)[c] << '\n';
  }
}

struct RunResult {
  double wall = 0.0;
  double dt = 0.0;
  double dt_max = 0.0;
  double final_energy = 0.0;
};

RunResult execute_run(const RunConfig& c, const fs::path& dir, bool write_files) {
  const YeeGrid grid = make_grid(c);
  MaterialGrid materials = make_materials(c, grid);
  const CflReport cfl = cfl_or_estimate(grid, materials, c.scheme);
  const double dt = choose_dt(c, cfl);

  Simulation sim(grid, std::move(materials), c.scheme, dt);
  if (c.pml) sim.enable_pml(make_pml_params(*c.pml));
  for (const auto& p : c.point_sources) sim.add_point_source(make_point_source(p));
  if (c.plane_wave) sim.set_plane_wave(make_plane_wave(*c.plane_wave));

  std::ofstream energy, probes;
  if (write_files && c.outputs.energy_every > 0) {
    energy.open(dir / "energy.csv");
    energy << "step,time,energy,energy_norm\n" << std::setprecision(17);
  }
  if (write_files && !c.outputs.probes.empty()) {
    probes.open(dir / "probes.csv");
    probes << "step,time";
    for (const auto& p : c.outputs.probes) {
      probes << ',' << component_name(p.component) << '_' << p.cell.i << '_' << p.cell.j << '_'
             << p.cell.k;
    }
    probes << '\n' << std::setprecision(17);
  }
  for (const auto& p : c.outputs.probes) {
    if (!grid.contains(p.cell)) throw InvalidInput("probe cell outside the grid");
  }

  auto observer = [&](const Simulation& s) {
    const std::int64_t n = s.time_level();
    if (energy.is_open() && n % c.outputs.energy_every == 0) {
      energy << n << ',' << s.time() << ',' << s.energy() << ','
             << energy_norm(s.fields(), s.materials()) << '\n';
    }
    if (probes.is_open()) {
      probes << n << ',' << s.time();
      for (const auto& p : c.outputs.probes) {
        probes << ',' << s.fields().get(family_of(p.component), axis_of(p.component))[grid.linear(p.cell.i, p.cell.j, p.cell.k)];
      }
      probes << '\n';
    }
    if (write_files && c.outputs.snapshot_every > 0 && n % c.outputs.snapshot_every == 0) {
      for (Component comp : c.outputs.snapshot_components) {
        std::ostringstream name;
        name << "snap_" << component_name(comp) << '_' << std::setw(9) << std::setfill('0') << n
             << ".bin";
        write_snapshot(dir / name.str(), grid, s.fields(), comp);
      }
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  sim.run(c.steps, write_files ? std::function<void(const Simulation&)>(observer)
                               : std::function<void(const Simulation&)>{});
  RunResult r{seconds_since(t0), dt, cfl.dt_max, sim.energy()};
  if (write_files && c.outputs.sampling_box) {
    write_box_dump(dir / "sampling_box.csv", sim, *c.outputs.sampling_box);
  }
  return r;
}

int cmd_run(const Options& opt) {
  RunConfig c = load(opt);
  const fs::path dir = prepare_outputs(c);
  const RunResult r = execute_run(c, dir, true);
  json summary = {{"command", "run"},
                  {"scheme", std::string(scheme_name(c.scheme))},
                  {"steps", c.steps},
                  {"dt", r.dt},
                  {"dt_max", r.dt_max},
                  {"final_energy", r.final_energy},
                  {"wall_seconds", r.wall}};
  std::cout << "run: " << c.steps << " steps, dt " << r.dt << " (bound " << r.dt_max << "), "
            << r.wall << " s\n";
  if (opt.compare_schemes) {
    RunConfig other = c;
    other.scheme = c.scheme == SchemeKind::averaged ? SchemeKind::non_averaged : SchemeKind::averaged;
    if (!other.dt) other.dt = r.dt;  // same dt for a fair comparison
    other.cfl_factor.reset();
    const RunResult o = execute_run(other, dir, false);
    const double avg = c.scheme == SchemeKind::averaged ? r.wall : o.wall;
    const double non = c.scheme == SchemeKind::averaged ? o.wall : r.wall;
    summary["wall_seconds_averaged"] = avg;
    summary["wall_seconds_non_averaged"] = non;
    summary["averaged_to_non_averaged"] = avg / non;
    std::cout << "timing: averaged " << avg << " s, non-averaged " << non << " s, ratio "
              << avg / non << "\n";
  }
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  return kOk;
}

int cmd_eig(const Options& opt) {
  RunConfig c = load(opt);
  const fs::path dir = prepare_outputs(c);
  const YeeGrid grid = make_grid(c);
  const MaterialGrid materials = make_materials(c, grid);
  const CflReport cfl = cfl_or_estimate(grid, materials, c.scheme);
  const double dt = choose_dt(c, cfl);
  const auto t0 = std::chrono::steady_clock::now();
  const UpdateMatrix um = build_update_matrix(grid, materials, c.scheme, dt, opt.force_guard,
                                              c.dt ? dt / cfl.dt_max : c.cfl_factor.value_or(kDefaultCflFactor));
  const SpectrumReport spec = eigen_spectrum(um.a);
  write_spectrum_csv(dir / "spectrum.csv", spec);
  double max_abs = 0.0;
  for (const auto& l : spec.eigenvalues) max_abs = std::max(max_abs, std::abs(l));
  const json summary = {{"command", "eig"},
                        {"scheme", std::string(scheme_name(c.scheme))},
                        {"dimension", um.a.rows()},
                        {"dt", dt},
                        {"dt_max", cfl.dt_max},
                        {"cfl_factor", um.cfl_factor},
                        {"max_deviation", spec.max_deviation},
                        {"max_abs_eigenvalue", max_abs},
                        {"backend", spec.backend},
                        {"material_digest", um.material_digest},
                        {"wall_seconds", seconds_since(t0)}};
  std::ofstream(dir / "eig_summary.json") << summary.dump(2) << '\n';
  std::cout << "eig: " << um.a.rows() << " eigenvalues, max ||lambda|-1| = " << spec.max_deviation
            << ", max |lambda| = " << max_abs << "\n";
  return kOk;
}

int cmd_converge(const Options& opt) {
  RunConfig c = load(opt);
  if (!c.convergence) throw ConfigError("config: converge needs a 'convergence' block");
  const fs::path dir = prepare_outputs(c);
  const CloakStudyConfig study = make_study_config(c);
  std::vector<StudyCase> cases = c.convergence->cases;
  if (cases.empty()) {
    for (CloakKind k : {CloakKind::smooth, CloakKind::nonsmooth}) {
      for (SchemeKind s : {SchemeKind::averaged, SchemeKind::non_averaged}) cases.push_back({k, s});
    }
  }
  const auto reports = run_cloak_convergence(study, c.convergence->ppw, cases,
                                             [](const std::string& s) { std::cout << s << std::endl; });
  json summary = json::array();
  for (const auto& r : reports) {
    std::string label = case_label(r.study);
    std::replace(label.begin(), label.end(), '/', '_');
    write_convergence_csv(dir / ("convergence_" + label + ".csv"), r);
    json pts = json::array();
    for (const auto& p : r.points) pts.push_back({{"ppw", p.ppw}, {"error", p.error}});
    summary.push_back({{"case", case_label(r.study)}, {"order", r.order}, {"points", pts}});
    std::cout << case_label(r.study) << ": order " << r.order << "\n";
  }
  std::ofstream(dir / "convergence_summary.json") << summary.dump(2) << '\n';
  return kOk;
}

int cmd_cfl(const Options& opt) {
  RunConfig c = load(opt);
  const YeeGrid grid = make_grid(c);
  const MaterialGrid materials = make_materials(c, grid);
  const CflReport r = compute_cfl(grid, materials, c.scheme);
  const double courant = grid.min_spacing() / std::sqrt(3.0);
  std::cout << std::setprecision(12) << "dt_max " << r.dt_max << "\nspectral_radius "
            << r.spectral_radius << "\niterations " << r.iterations << "\nresidual "
            << r.residual << "\nvacuum_courant " << courant << "\nrecommended_dt "
            << c.cfl_factor.value_or(kDefaultCflFactor) * r.dt_max << "\n";
  return kOk;
}

int cmd_cloak(const Options& opt) {
  RunConfig c = load(opt);
  if (!c.material.cloak) throw ConfigError("config: cloak needs a 'material.cloak' block");
  const fs::path dir = prepare_outputs(c);
  const YeeGrid grid = make_grid(c);
  const MaterialGrid m = make_materials(c, grid);
  const CloakSpec spec = make_cloak_spec(*c.material.cloak, grid);
  write_material_grid(dir / "materials.afm", m);
  write_cloak_cut_csv(dir / "cloak_cut.csv", grid, m, spec.center);
  std::cout << "cloak: wrote " << (dir / "materials.afm").string() << " and "
            << (dir / "cloak_cut.csv").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic FDTD solver"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "YAML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the configured random seed");
    sub->add_option("--threads", opt.threads, "Worker threads (1 for bit-reproducible runs)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--force-size-guard", opt.force_guard, "Allow update matrices above the size guard");
  };
  auto* run = app.add_subcommand("run", "Time-step a configuration");
  add_common(run);
  run->add_flag("--compare-schemes", opt.compare_schemes,
                "Also time the other scheme with the same dt and report the ratio");
  auto* eig = app.add_subcommand("eig", "Eigenvalues of the one-step update matrix");
  add_common(eig);
  auto* conv = app.add_subcommand("converge", "Cloak convergence study");
  add_common(conv);
  auto* cfl = app.add_subcommand("cfl", "Stability bound on dt");
  add_common(cfl);
  auto* cloak = app.add_subcommand("cloak", "Write a cloak material file and axis cut");
  add_common(cloak);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  for (auto* sub : {run, eig, conv, cfl, cloak}) {
    if (sub->parsed() && sub->count("--seed") > 0) opt.seed = seed;
  }
#ifdef _OPENMP
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
#endif

  try {
    if (run->parsed()) return cmd_run(opt);
    if (eig->parsed()) return cmd_eig(opt);
    if (conv->parsed()) return cmd_converge(opt);
    if (cfl->parsed()) return cmd_cfl(opt);
    if (cloak->parsed()) return cmd_cloak(opt);
  } catch (const GuardViolation& e) {
    std::cerr << "error: " << e.what() << " (use --force-size-guard)\n";
    return kGuard;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
