#include "anisofdtd/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

double gaussian_amplitude(double t, const GaussianPulse& pulse) {
  const double u = (t - pulse.t0) / pulse.tau;
  return pulse.amplitude * std::exp(-u * u);
}

void PointSource::validate(const YeeGrid& grid) const {
  if (!(pulse.tau > 0.0)) throw InvalidInput("point source tau must be positive");
  if (family_of(component) != FieldFamily::E) {
    throw InvalidInput("point source must drive an E component");
  }
  if (!grid.contains(cell)) throw InvalidInput("point source cell outside the grid");
}

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

int axis_index(const Index3& c, int axis) { return axis == 0 ? c.i : (axis == 1 ? c.j : c.k); }

Index3 make_index(int axis, int along, int u, int v) {
  // u runs along (axis+1)%3, v along (axis+2)%3
  std::array<int, 3> idx{};
  idx[axis] = along;
  idx[(axis + 1) % 3] = u;
  idx[(axis + 2) % 3] = v;
  return {idx[0], idx[1], idx[2]};
}

}  // namespace

PlaneWaveSource::PlaneWaveSource(const PlaneWaveSpec& spec, const YeeGrid& grid, double dt,
                                 const MaterialGrid& materials)
    : spec_(spec), grid_(grid), dt_(dt) {
  const int a = spec.axis;
  if (a < 0 || a > 2) throw InvalidInput("plane wave axis must be 0, 1 or 2");
  if (spec.direction != 1 && spec.direction != -1) {
    throw InvalidInput("plane wave direction must be +1 or -1");
  }
  if (!(spec.wavelength > 0.0)) throw InvalidInput("plane wave wavelength must be positive");
  if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
  if (grid.boundary(a).periodic()) {
    throw InvalidInput("TFSF plane needs a non-periodic propagation axis");
  }
  const int p = spec.plane_index;
  if (p < 1 || p > grid.n(a) - 1) throw InvalidInput("TFSF plane must lie strictly inside the grid");
  if (materials.dims() != grid.dims()) throw InvalidInput("material grid does not match lattice");
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const int along = axis_index(grid.unlinear(c), a);
    if (along >= p - 2 && along <= p + 1 && !materials.is_vacuum_cell(c)) {
      throw InvalidInput("TFSF plane requires vacuum cells next to the injection plane");
    }
  }

  omega_ = 2.0 * std::numbers::pi / spec.wavelength;
  double rhs = std::pow(std::sin(0.5 * omega_ * dt) / dt, 2);
  for (int t = 1; t <= 2; ++t) {
    const int d = (a + t) % 3;
    const int m = spec.transverse_orders[t - 1];
    if (m != 0 && !grid.boundary(d).periodic()) {
      throw InvalidInput("oblique plane waves need periodic transverse axes");
    }
    k_[d] = 2.0 * std::numbers::pi * m / (grid.n(d) * grid.spacing(d));
    rhs -= std::pow(std::sin(0.5 * k_[d] * grid.spacing(d)) / grid.spacing(d), 2);
  }
  const double s2 = rhs * grid.spacing(a) * grid.spacing(a);
  if (!(s2 > 0.0 && s2 <= 1.0)) {
    throw InvalidInput("plane wave does not propagate on this grid at this dt");
  }
  k_[a] = spec.direction * 2.0 * std::asin(std::sqrt(s2)) / grid.spacing(a);

  Vec3 kt{};
  for (int d = 0; d < 3; ++d) kt[d] = 2.0 * std::sin(0.5 * k_[d] * grid.spacing(d)) / grid.spacing(d);
  const double wt = 2.0 * std::sin(0.5 * omega_ * dt) / dt;
  const double kn = std::sqrt(dot(kt, kt));
  Vec3 e = spec.polarization;
  const double proj = dot(e, kt) / (kn * kn);
  for (int d = 0; d < 3; ++d) e[d] -= proj * kt[d];
  const double en = std::sqrt(dot(e, e));
  if (!(en > 1e-12 * std::sqrt(dot(spec.polarization, spec.polarization)))) {
    throw InvalidInput("plane wave polarisation is parallel to the wavevector");
  }
  for (int d = 0; d < 3; ++d) e0_[d] = spec.amplitude * e[d] / en;
  const Vec3 h = cross(kt, e0_);
  for (int d = 0; d < 3; ++d) h0_[d] = h[d] / wt;
  sign_ = spec.direction == -1 ? 1.0 : -1.0;
}

double PlaneWaveSource::ramp(double t) const {
  if (spec_.ramp_periods <= 0.0) return 1.0;
  const double period = 2.0 * std::numbers::pi / omega_;
  const double x = std::clamp(t / (spec_.ramp_periods * period), 0.0, 1.0);
  return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

double PlaneWaveSource::incident(Component c, const Vec3& point, double t) const {
  const FieldFamily f = family_of(c);
  const Vec3& amp = (f == FieldFamily::E || f == FieldFamily::D) ? e0_ : h0_;
  const double r = ramp(t);
  if (r == 0.0) return 0.0;
  return amp[axis_of(c)] * r * std::cos(dot(k_, point) - omega_ * t + spec_.phase);
}

// The plane separates B/H at index p (and D/E at p - 1) along the axis. With
// the total field on the low side (direction -1) the D at p - 1 needs the
// incident H at p added, and B at p needs the incident E at p - 1 removed.
void PlaneWaveSource::correct_b(FieldSet& fields, std::int64_t n) const {
  if (spec_.amplitude == 0.0) return;
  const int a = spec_.axis, b = (a + 1) % 3, c = (a + 2) % 3;
  const int p = spec_.plane_index;
  const double t = n * dt_;
  const double f = sign_ * dt_ / grid_.spacing(a);
  auto& bb = fields.get(FieldFamily::B, b);
  auto& bc = fields.get(FieldFamily::B, c);
  const Component ec = component_of(FieldFamily::E, c);
  const Component eb = component_of(FieldFamily::E, b);
  for (int v = 0; v < grid_.n(c); ++v) {
    for (int u = 0; u < grid_.n(b); ++u) {
      const Index3 hi = make_index(a, p, u, v);
      const Index3 lo = make_index(a, p - 1, u, v);
      const std::size_t idx = grid_.linear(hi);
      bb[idx] += f * incident(ec, field_position(grid_, ec, lo), t);
      bc[idx] -= f * incident(eb, field_position(grid_, eb, lo), t);
    }
  }
}

void PlaneWaveSource::correct_d(FieldSet& fields, std::int64_t n) const {
  if (spec_.amplitude == 0.0) return;
  const int a = spec_.axis, b = (a + 1) % 3, c = (a + 2) % 3;
  const int p = spec_.plane_index;
  const double t = (n + 0.5) * dt_;
  const double f = sign_ * dt_ / grid_.spacing(a);
  auto& db = fields.get(FieldFamily::D, b);
  auto& dc = fields.get(FieldFamily::D, c);
  const Component hc = component_of(FieldFamily::H, c);
  const Component hb = component_of(FieldFamily::H, b);
  for (int v = 0; v < grid_.n(c); ++v) {
    for (int u = 0; u < grid_.n(b); ++u) {
      const Index3 hi = make_index(a, p, u, v);
      const Index3 lo = make_index(a, p - 1, u, v);
      const std::size_t idx = grid_.linear(lo);
      db[idx] -= f * incident(hc, field_position(grid_, hc, hi), t);
      dc[idx] += f * incident(hb, field_position(grid_, hb, hi), t);
    }
  }
}

}  // namespace anisofdtd
