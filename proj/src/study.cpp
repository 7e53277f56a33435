#include "anisofdtd/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

bool SamplingBox::contains(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < lo[a] || p[a] > hi[a]) return false;
  }
  return true;
}

std::string SamplingBox::describe() const {
  std::ostringstream os;
  os << "[" << lo[0] << "," << hi[0] << "]x[" << lo[1] << "," << hi[1] << "]x[" << lo[2] << ","
     << hi[2] << "] um";
  return os.str();
}

YeeGrid study_grid(const CloakStudyConfig& cfg, double ppw) {
  if (!(ppw > 0.0)) throw InvalidInput("points per wavelength must be positive");
  const double h = cfg.wavelength / ppw;
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const double cells = cfg.domain[a] / h;
    dims[a] = static_cast<int>(std::lround(cells));
    if (std::abs(cells - dims[a]) > 1e-6) {
      throw InvalidInput("domain extent is not a whole number of cells at this resolution");
    }
  }
  dims[2] += 2 * cfg.pml.n_cells;
  const AxisBoundary periodic{};
  const AxisBoundary pml{BoundaryKind::upml, BoundaryKind::upml};
  return YeeGrid(dims, {h, h, h}, {periodic, periodic, pml},
                 {0.0, 0.0, -cfg.pml.n_cells * h});
}

int study_plane_index(const CloakStudyConfig& cfg, const YeeGrid& grid) {
  return static_cast<int>(std::lround((cfg.plane_height - grid.origin()[2]) / grid.spacing(2)));
}

std::vector<std::size_t> box_cells(const YeeGrid& grid, const SamplingBox& box) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (box.contains(grid.cell_center(grid.unlinear(c)))) out.push_back(c);
  }
  if (out.empty()) throw InvalidInput("sampling box contains no cell centres");
  return out;
}

double period_locked_dt(double period, double target) {
  if (!(period > 0.0) || !(target > 0.0)) throw InvalidInput("period and dt must be positive");
  const double steps = std::ceil(period / target - 1e-12);
  return period / steps;
}

std::vector<std::complex<double>> plane_wave_phasors(const YeeGrid& grid,
                                                     const MaterialGrid& materials,
                                                     SchemeKind scheme, double dt,
                                                     const PlaneWaveSpec& wave,
                                                     const PmlParams& pml,
                                                     const std::vector<std::size_t>& cells,
                                                     int settle_periods, int dft_periods) {
  const double period = wave.wavelength;  // c = 1
  const double steps_real = period / dt;
  const auto per = static_cast<std::int64_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(per)) > 1e-9 * steps_real) {
    throw InvalidInput("dt must divide the period into whole steps");
  }
  if (settle_periods < 0 || dft_periods < 1) throw InvalidInput("invalid period counts");
  Simulation sim(grid, materials, scheme, dt);
  sim.enable_pml(pml);
  sim.set_plane_wave(wave);
  sim.run(settle_periods * per);

  const double omega = 2.0 * std::numbers::pi / period;
  const std::int64_t count = dft_periods * per;
  std::vector<std::complex<double>> acc(3 * cells.size());
  for (std::int64_t s = 0; s < count; ++s) {
    sim.run(1);
    const double t = sim.time();
    const std::complex<double> w = std::polar(2.0 / static_cast<double>(count), omega * t);
    const FieldSet& f = sim.fields();
    for (std::size_t q = 0; q < cells.size(); ++q) {
      for (int a = 0; a < 3; ++a) acc[3 * q + a] += w * f.get(FieldFamily::E, a)[cells[q]];
    }
  }
  return acc;
}

std::string case_label(const StudyCase& c) {
  return std::string(c.kind == CloakKind::smooth ? "smooth" : "nonsmooth") + "/" +
         std::string(scheme_name(c.scheme));
}

StudyCase parse_case_label(const std::string& label) {
  const auto slash = label.find('/');
  if (slash == std::string::npos) throw InvalidInput("case must read <cloak>/<scheme>: " + label);
  const std::string kind = label.substr(0, slash);
  StudyCase c;
  if (kind == "smooth") {
    c.kind = CloakKind::smooth;
  } else if (kind == "nonsmooth") {
    c.kind = CloakKind::nonsmooth;
  } else {
    throw InvalidInput("unknown cloak kind: " + kind);
  }
  c.scheme = parse_scheme(label.substr(slash + 1));
  return c;
}

std::vector<ErrorReport> run_cloak_convergence(
    const CloakStudyConfig& cfg, const std::vector<double>& ppws,
    const std::vector<StudyCase>& cases, const std::function<void(const std::string&)>& log) {
  if (ppws.empty() || cases.empty()) throw InvalidInput("convergence study needs resolutions and cases");
  auto say = [&log](const std::string& s) {
    if (log) log(s);
  };
  std::vector<ErrorReport> reports(cases.size());
  for (std::size_t c = 0; c < cases.size(); ++c) {
    reports[c].study = cases[c];
    reports[c].box = cfg.box.describe();
  }
  for (double ppw : ppws) {
    const YeeGrid grid = study_grid(cfg, ppw);
    const int plane = study_plane_index(cfg, grid);
    const std::vector<std::size_t> cells = box_cells(grid, cfg.box);
    // Cells in the PML layers (and one standoff) stay background.
    const PmlProfile profile = build_pml(cfg.pml, grid);
    const auto in_layer = [&profile](const Index3& q) { return profile.cell_in_layer(q.k, 1); };

    // One material grid per cloak kind, shared by the schemes.
    std::vector<MaterialGrid> by_kind;
    std::vector<CloakKind> kinds;
    std::vector<std::size_t> mat_of(cases.size());
    double dt_max = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& sc = cases[c];
      auto t0 = std::chrono::steady_clock::now();
      const auto found = std::find(kinds.begin(), kinds.end(), sc.kind);
      if (found == kinds.end()) {
        CloakSpec spec = cfg.cloak;
        spec.kind = sc.kind;
        by_kind.push_back(build_cloak(spec, grid, in_layer));
        kinds.push_back(sc.kind);
        mat_of[c] = by_kind.size() - 1;
      } else {
        mat_of[c] = static_cast<std::size_t>(found - kinds.begin());
      }
      const CflReport cfl = compute_cfl(grid, by_kind[mat_of[c]], sc.scheme);
      dt_max = std::min(dt_max, cfl.dt_max);
      std::ostringstream os;
      os << "ppw " << ppw << " " << case_label(sc) << ": materials + CFL in "
         << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
         << " s, dt_max " << cfl.dt_max;
      say(os.str());
    }
    const double dt = period_locked_dt(cfg.wavelength, cfg.cfl_factor * dt_max);

    PlaneWaveSpec wave;
    wave.wavelength = cfg.wavelength;
    wave.axis = 2;
    wave.direction = -1;
    wave.plane_index = plane;
    wave.polarization = {0.0, 1.0, 0.0};
    wave.ramp_periods = cfg.ramp_periods;

    auto t0 = std::chrono::steady_clock::now();
    const auto reference =
        plane_wave_phasors(grid, MaterialGrid::vacuum(grid.dims()), SchemeKind::non_averaged, dt,
                           wave, cfg.pml, cells, cfg.settle_periods, cfg.dft_periods);
    {
      std::ostringstream os;
      os << "ppw " << ppw << " reference: " << std::llround(cfg.wavelength / dt)
         << " steps/period, "
         << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s";
      say(os.str());
    }
    for (std::size_t c = 0; c < cases.size(); ++c) {
      t0 = std::chrono::steady_clock::now();
      const auto test = plane_wave_phasors(grid, by_kind[mat_of[c]], cases[c].scheme, dt, wave, cfg.pml, cells,
                                           cfg.settle_periods, cfg.dft_periods);
      const RelativeErrorReport err = relative_error(test, reference, 3);
      reports[c].points.push_back({ppw, err.value});
      std::ostringstream os;
      os << "ppw " << ppw << " " << case_label(cases[c]) << ": error " << err.value << " ("
         << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)";
      say(os.str());
    }
  }
  for (auto& r : reports) {
    if (r.points.size() >= 2) r.order = convergence_order(r.points);
  }
  return reports;
}

void write_convergence_csv(const std::filesystem::path& path, const ErrorReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << "# " << case_label(report.study) << " order " << report.order << " box " << report.box
      << "\nppw,relative_error\n"
      << std::setprecision(12);
  for (const auto& p : report.points) out << p.ppw << ',' << p.error << '\n';
}

void write_cloak_cut_csv(const std::filesystem::path& path, const YeeGrid& grid,
                         const MaterialGrid& materials, const Vec3& center) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  auto cell_of = [&grid](int axis, double x) {
    const int i = static_cast<int>(std::floor((x - grid.origin()[axis]) / grid.spacing(axis)));
    return std::clamp(i, 0, grid.n(axis) - 1);
  };
  const int j = cell_of(1, center[1]);
  const int k = cell_of(2, center[2]);
  out << "x,eps_xx,eps_xy,eps_xz,eps_yy,eps_yz,eps_zz,mu_xx,mu_xy\n" << std::setprecision(12);
  for (int i = 0; i < grid.nx(); ++i) {
    const std::size_t c = grid.linear(i, j, k);
    const Tensor3& e = materials.eps(c);
    const Tensor3& m = materials.mu(c);
    out << grid.cell_center({i, j, k})[0] << ',' << e(0, 0) << ',' << e(0, 1) << ',' << e(0, 2)
        << ',' << e(1, 1) << ',' << e(1, 2) << ',' << e(2, 2) << ',' << m(0, 0) << ',' << m(0, 1)
        << '\n';
  }
}

}  // namespace anisofdtd
