#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "anisofdtd/analysis.hpp"
#include "anisofdtd/boundary.hpp"
#include "anisofdtd/errors.hpp"
#include "anisofdtd/solver.hpp"
#include "oracles.hpp"

using namespace anisofdtd;

namespace {

const AxisBoundary kPeriodic{};
const AxisBoundary kPec{BoundaryKind::pec, BoundaryKind::pec};
const AxisBoundary kUpml{BoundaryKind::upml, BoundaryKind::upml};

// Curl-curl eigenvalues of a vacuum PEC box with n cells per axis (unit
// spacing): 4 sum sin^2(pi m_a / (2 n_a)), at most one index zero. Modes
// with all indices non-zero carry two polarisations and appear twice.
std::vector<double> cavity_spectrum(const std::array<int, 3>& n) {
  std::vector<double> out;
  for (int a = 0; a < n[0]; ++a) {
    for (int b = 0; b < n[1]; ++b) {
      for (int c = 0; c < n[2]; ++c) {
        if ((a == 0) + (b == 0) + (c == 0) > 1) continue;
        double v = 0.0;
        const int m[3] = {a, b, c};
        for (int q = 0; q < 3; ++q) v += 4.0 * std::pow(std::sin(std::numbers::pi * m[q] / (2.0 * n[q])), 2);
        out.push_back(v);
        if (a && b && c) out.push_back(v);
      }
    }
  }
  return out;
}

// Curl-curl eigenvalue recovered from a leapfrog eigenphase.
double kappa_of_phase(double phase, double dt) {
  const double s = 2.0 / dt * std::sin(0.5 * phase);
  return s * s;
}

struct ReflectionRun {
  double scattered = 0.0;  // max steady amplitude upstream of the TFSF plane
  double total = 0.0;      // max steady amplitude downstream
};

// Plane wave travelling in -z through a TFSF plane towards the low UPML; the
// scattered-field region above the plane sees only what comes back.
ReflectionRun reflection_run(int order, int lam_cells, int nz, int npml, double ramp) {
  const int nx = order ? 2 * lam_cells : 2;
  const YeeGrid g({nx, 2, nz}, {1, 1, 1}, {kPeriodic, kPeriodic, kUpml});
  const double period = lam_cells;
  const long per_steps = std::lround(period / (0.4 / std::sqrt(3.0)));
  const double dt = period / per_steps;
  Simulation sim(g, MaterialGrid::vacuum(g.dims()), SchemeKind::non_averaged, dt);
  PmlParams pp;
  pp.n_cells = npml;
  sim.enable_pml(pp);
  PlaneWaveSpec w;
  w.wavelength = lam_cells;
  w.direction = -1;
  w.plane_index = nz - npml - 8;
  w.transverse_orders = {order, 0};
  w.ramp_periods = ramp;
  sim.set_plane_wave(w);
  sim.run((4 * nz / lam_cells + 10) * per_steps);

  std::vector<std::size_t> sf, tf;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (k > w.plane_index && k < nz - npml - 1) sf.push_back(g.linear(i, j, k));
        if (k > npml + 1 && k < w.plane_index - 2) tf.push_back(g.linear(i, j, k));
      }
    }
  }
  const double omega = 2.0 * std::numbers::pi / period;
  std::vector<std::complex<double>> a(sf.size()), b(tf.size());
  for (long s = 0; s < per_steps; ++s) {
    sim.step();
    const auto wt = std::polar(2.0 / per_steps, omega * sim.time());
    const auto& ey = sim.fields()[Component::Ey];
    for (std::size_t q = 0; q < sf.size(); ++q) a[q] += wt * ey[sf[q]];
    for (std::size_t q = 0; q < tf.size(); ++q) b[q] += wt * ey[tf[q]];
  }
  ReflectionRun r;
  for (auto z : a) r.scattered = std::max(r.scattered, std::abs(z));
  for (auto z : b) r.total = std::max(r.total, std::abs(z));
  return r;
}

}  // namespace

TEST_SUITE("boundary") {

TEST_CASE("periodic index wraps both ways") {
  CHECK(periodic_index(-1, 5) == 4);
  CHECK(periodic_index(5, 5) == 0);
  CHECK(periodic_index(-11, 5) == 4);
  CHECK(periodic_index(3, 5) == 3);
}

TEST_CASE("axis neighbours wrap, vanish or clamp") {
  const YeeGrid g({4, 3, 3}, {1, 1, 1}, {kPeriodic, kPec, kPec});
  const AxisNeighbors p = make_axis_neighbors(g, 0);
  CHECK(p.prev[0] == 3);
  CHECK(p.next[3] == 0);
  CHECK(p.prev_material[0] == 3);
  const AxisNeighbors b = make_axis_neighbors(g, 1);
  CHECK(b.prev[0] == -1);
  CHECK(b.next[2] == -1);
  CHECK(b.next[1] == 2);
  CHECK(b.prev_material[0] == 0);
  CHECK(b.next_material[2] == 2);
}

TEST_CASE("PEC zeroes tangential components on the high walls only") {
  const YeeGrid g({3, 4, 5}, {1, 1, 1}, {kPeriodic, kPec, kPec});
  FieldSet f(g.cell_count());
  oracle::randomize(f, 1);
  const FieldSet before = f;
  apply_pec(f, g, FieldFamily::E);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Index3 q = g.unlinear(c);
    const bool top_y = q.j == 3, top_z = q.k == 4;
    CHECK((f[Component::Ex][c] == 0.0) == (top_y || top_z));
    CHECK((f[Component::Ey][c] == 0.0) == top_z);
    CHECK((f[Component::Ez][c] == 0.0) == top_y);
    CHECK(f[Component::Dx][c] == before[Component::Dx][c]);
  }
}

TEST_CASE("PML grading and validation") {
  CHECK(default_pml_sigma_max(3, 10, 0.01) == doctest::Approx(8.0 * 4.0 / 0.1));
  const YeeGrid g({2, 2, 40}, {0.01, 0.01, 0.01}, {kPeriodic, kPeriodic, kUpml});
  const PmlProfile p = build_pml(PmlParams{}, g);
  CHECK(p.axis == 2);
  CHECK(p.sigma_max == doctest::Approx(default_pml_sigma_max(3, 10, 0.01)));
  CHECK(p.sigma(0.0) == 0.0);
  CHECK(p.sigma(10.0) == doctest::Approx(p.sigma_max));
  CHECK(p.sigma(5.0) == doctest::Approx(p.sigma_max / 8.0));
  CHECK(p.kappa(7.0) == 1.0);
  CHECK(p.depth_cells(20.0) == 0.0);
  CHECK(p.depth_cells(-0.5) == 10.0);
  CHECK(p.cell_in_layer(9));
  CHECK_FALSE(p.cell_in_layer(10));
  CHECK(p.cell_in_layer(10, 1));
  CHECK(p.cell_in_layer(30));

  const YeeGrid thin({2, 2, 15}, {1, 1, 1}, {kPeriodic, kPeriodic, kUpml});
  CHECK_THROWS_AS(build_pml(PmlParams{}, thin), InvalidInput);
  const YeeGrid none({4, 4, 4}, {1, 1, 1}, {});
  CHECK_THROWS_AS(build_pml(PmlParams{}, none), InvalidInput);
  const YeeGrid two({40, 4, 40}, {1, 1, 1}, {kUpml, kPeriodic, kUpml});
  CHECK_THROWS_AS(build_pml(PmlParams{}, two), InvalidInput);
}

TEST_CASE("PEC cavity eigenphases follow the discrete dispersion relation") {
  const std::array<int, 3> n{4, 5, 6};
  const YeeGrid g(n, {1, 1, 1}, {kPec, kPec, kPec});
  const double dt = 0.3;
  const UpdateMatrix u = build_update_matrix(g, MaterialGrid::vacuum(g.dims()), SchemeKind::non_averaged, dt);
  const SpectrumReport s = eigen_spectrum(u.a);
  const std::vector<double> expected = cavity_spectrum(n);
  double lowest = 1e300, worst = 0.0;
  int oscillating = 0;
  for (const auto& z : s.eigenvalues) {
    // Tangential components pinned by the walls map to zero.
    if (std::abs(z) < 1e-12) continue;
    CHECK(std::abs(std::abs(z) - 1.0) < 1e-10);
    const double phase = std::abs(std::arg(z));
    if (phase < 1e-7) continue;
    ++oscillating;
    const double kappa = kappa_of_phase(phase, dt);
    lowest = std::min(lowest, kappa);
    double best = 1e300;
    for (double v : expected) best = std::min(best, std::abs(v - kappa));
    worst = std::max(worst, best);
  }
  CHECK(worst < 1e-9);
  CHECK(lowest == doctest::Approx(*std::min_element(expected.begin(), expected.end())).epsilon(1e-10));
  // Every analytic mode appears as a conjugate pair.
  CHECK(oscillating == 2 * static_cast<int>(expected.size()));
}

TEST_CASE("slab cavity frequency at 20 points per wavelength") {
  // Ten cells between the walls host a half wavelength of twenty cells.
  const YeeGrid g({2, 2, 10}, {1, 1, 1}, {kPeriodic, kPeriodic, kPec});
  const double dt = 0.4 / std::sqrt(3.0);
  const UpdateMatrix u = build_update_matrix(g, MaterialGrid::vacuum(g.dims()), SchemeKind::averaged, dt);
  double lowest = 1e300;
  for (const auto& z : eigen_spectrum(u.a).eigenvalues) {
    const double phase = std::abs(std::arg(z));
    if (phase > 1e-7) lowest = std::min(lowest, phase);
  }
  const double discrete = 2.0 * std::asin(dt * std::sin(std::numbers::pi / 20.0));
  const double continuum = dt * 2.0 * std::numbers::pi / 20.0;
  CHECK(std::abs(lowest / discrete - 1.0) < 5e-3);
  CHECK(lowest == doctest::Approx(discrete).epsilon(1e-10));
  CHECK(std::abs(lowest / continuum - 1.0) < 5e-3);
}

TEST_CASE("UPML reflection at normal incidence is below 1e-4") {
  const ReflectionRun r = reflection_run(0, 20, 100, 10, 3.0);
  CHECK(r.total == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.scattered < 1e-4);
}

TEST_CASE("UPML reflection at 30 degrees is below 1e-3") {
  // One transverse order on a two-wavelength period: sin(theta) = 1/2.
  const ReflectionRun r = reflection_run(1, 20, 100, 10, 10.0);
  CHECK(r.total == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.scattered < 1e-3);
}

TEST_CASE("UPML energy never grows once the source is off") {
  const int nz = 60;
  const YeeGrid g({6, 6, nz}, {1, 1, 1}, {kPeriodic, kPeriodic, kUpml});
  Simulation sim(g, MaterialGrid::vacuum(g.dims()), SchemeKind::non_averaged, 0.4 / std::sqrt(3.0));
  sim.enable_pml(PmlParams{});
  // Divergence-free start (D = curl of a localised edge field) so that no
  // static charge is left behind.
  FieldSet a(g.cell_count());
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Index3 q = g.unlinear(c);
    const double z = q.k - 0.5 * nz;
    a[Component::Hx][c] = std::exp(-z * z / 8.0) * std::cos(2.0 * std::numbers::pi * q.j / 6.0);
  }
  CurlOperator(g).apply_ch(cview(a, FieldFamily::H), view(sim.fields(), FieldFamily::D), 1.0);
  sim.sync_fields();

  // Leapfrog energy 1/2 (D^n.E^n + B^(n-1/2).H^(n+1/2)).
  auto dot = [](const FieldSet& x, FieldFamily fx, const FieldSet& y, FieldFamily fy) {
    double s = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      const auto& u = x.get(fx, ax);
      const auto& v = y.get(fy, ax);
      for (std::size_t c = 0; c < u.size(); ++c) s += u[c] * v[c];
    }
    return s;
  };
  double first = -1.0, prev = 0.0, worst = -1.0;
  for (int s = 0; s < 3000; ++s) {
    const FieldSet before = sim.fields();
    sim.step();
    const double w = 0.5 * (dot(before, FieldFamily::D, before, FieldFamily::E) +
                            dot(before, FieldFamily::B, sim.fields(), FieldFamily::H));
    if (first < 0.0) {
      first = w;
    } else {
      worst = std::max(worst, (w - prev) / first);
    }
    prev = w;
  }
  CHECK(worst <= 1e-12);
  CHECK(prev < 0.2 * first);
}

}
