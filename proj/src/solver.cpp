#include "anisofdtd/solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

namespace {

enum : int { XX = 0, XY = 1, XZ = 2, YY = 3, YZ = 4, ZZ = 5 };

// Packs xi (electric) or zeta as six unique entries per cell.
std::vector<double> pack(const MaterialGrid& m, bool electric) {
  std::vector<double> out(6 * m.cell_count());
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    const Tensor3& t = electric ? m.xi(c) : m.zeta(c);
    double* p = out.data() + 6 * c;
    p[XX] = t(0, 0);
    p[XY] = t(0, 1);
    p[XZ] = t(0, 2);
    p[YY] = t(1, 1);
    p[YZ] = t(1, 2);
    p[ZZ] = t(2, 2);
  }
  return out;
}

std::array<AxisNeighbors, 3> all_neighbors(const YeeGrid& g) {
  return {make_axis_neighbors(g, 0), make_axis_neighbors(g, 1), make_axis_neighbors(g, 2)};
}

constexpr std::ptrdiff_t kAbsent = -1;

}  // namespace

std::string_view scheme_name(SchemeKind s) {
  return s == SchemeKind::averaged ? "averaged" : "non_averaged";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "averaged") return SchemeKind::averaged;
  if (name == "non_averaged" || name == "nonaveraged" || name == "non-averaged") {
    return SchemeKind::non_averaged;
  }
  throw InvalidInput("unknown scheme '" + std::string(name) + "'");
}

ConstVec3 cview(const FieldSet& f, FieldFamily family) {
  return {f.get(family, 0).data(), f.get(family, 1).data(), f.get(family, 2).data()};
}

MutVec3 view(FieldSet& f, FieldFamily family) {
  return {f.get(family, 0).data(), f.get(family, 1).data(), f.get(family, 2).data()};
}

CurlOperator::CurlOperator(const YeeGrid& grid) : grid_(grid), nb_(all_neighbors(grid)) {}

void CurlOperator::apply_ce(ConstVec3 e, MutVec3 out, double factor) const {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double fx = factor / grid_.spacing(0);
  const double fy = factor / grid_.spacing(1);
  const double fz = factor / grid_.spacing(2);
  const int* prev_i = nb_[0].prev.data();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    const int km = nb_[2].prev[k];
    for (int j = 0; j < ny; ++j) {
      const int jm = nb_[1].prev[j];
      const std::size_t row = grid_.linear(0, j, k);
      const std::ptrdiff_t rjm = jm >= 0 ? static_cast<std::ptrdiff_t>(grid_.linear(0, jm, k)) : kAbsent;
      const std::ptrdiff_t rkm = km >= 0 ? static_cast<std::ptrdiff_t>(grid_.linear(0, j, km)) : kAbsent;
      for (int i = 0; i < nx; ++i) {
        const int im = prev_i[i];
        const std::size_t c = row + i;
        const double ex = e[0][c], ey = e[1][c], ez = e[2][c];
        const double ez_jm = rjm >= 0 ? e[2][rjm + i] : 0.0;
        const double ex_jm = rjm >= 0 ? e[0][rjm + i] : 0.0;
        const double ey_km = rkm >= 0 ? e[1][rkm + i] : 0.0;
        const double ex_km = rkm >= 0 ? e[0][rkm + i] : 0.0;
        const double ez_im = im >= 0 ? e[2][row + im] : 0.0;
        const double ey_im = im >= 0 ? e[1][row + im] : 0.0;
        out[0][c] += fy * (ez - ez_jm) - fz * (ey - ey_km);
        out[1][c] += fz * (ex - ex_km) - fx * (ez - ez_im);
        out[2][c] += fx * (ey - ey_im) - fy * (ex - ex_jm);
      }
    }
  }
}

void CurlOperator::apply_ch(ConstVec3 h, MutVec3 out, double factor) const {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double fx = factor / grid_.spacing(0);
  const double fy = factor / grid_.spacing(1);
  const double fz = factor / grid_.spacing(2);
  const int* next_i = nb_[0].next.data();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    const int kp = nb_[2].next[k];
    for (int j = 0; j < ny; ++j) {
      const int jp = nb_[1].next[j];
      const std::size_t row = grid_.linear(0, j, k);
      const std::ptrdiff_t rjp = jp >= 0 ? static_cast<std::ptrdiff_t>(grid_.linear(0, jp, k)) : kAbsent;
      const std::ptrdiff_t rkp = kp >= 0 ? static_cast<std::ptrdiff_t>(grid_.linear(0, j, kp)) : kAbsent;
      for (int i = 0; i < nx; ++i) {
        const int ip = next_i[i];
        const std::size_t c = row + i;
        const double hx = h[0][c], hy = h[1][c], hz = h[2][c];
        const double hz_jp = rjp >= 0 ? h[2][rjp + i] : 0.0;
        const double hx_jp = rjp >= 0 ? h[0][rjp + i] : 0.0;
        const double hy_kp = rkp >= 0 ? h[1][rkp + i] : 0.0;
        const double hx_kp = rkp >= 0 ? h[0][rkp + i] : 0.0;
        const double hz_ip = ip >= 0 ? h[2][row + ip] : 0.0;
        const double hy_ip = ip >= 0 ? h[1][row + ip] : 0.0;
        out[0][c] += fy * (hz_jp - hz) - fz * (hy_kp - hy);
        out[1][c] += fz * (hx_kp - hx) - fx * (hz_ip - hz);
        out[2][c] += fx * (hy_ip - hy) - fy * (hx_jp - hx);
      }
    }
  }
}

void curl_e_update_b(FieldSet& fields, const YeeGrid& grid, double dt) {
  CurlOperator(grid).apply_ce(cview(fields, FieldFamily::E), view(fields, FieldFamily::B), -dt);
}

void curl_h_update_d(FieldSet& fields, const YeeGrid& grid, double dt) {
  CurlOperator(grid).apply_ch(cview(fields, FieldFamily::H), view(fields, FieldFamily::D), dt);
}

ConstitutiveOperator::ConstitutiveOperator(const YeeGrid& grid, const MaterialGrid& materials,
                                           SchemeKind scheme)
    : grid_(grid), scheme_(scheme), nb_(all_neighbors(grid)) {
  if (materials.dims() != grid.dims()) throw InvalidInput("material grid does not match lattice");
  xi_ = pack(materials, true);
  zeta_ = pack(materials, false);
  if (scheme == SchemeKind::averaged) build_averaged();
}

void ConstitutiveOperator::build_averaged() {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const std::size_t n = grid_.cell_count();
  for (auto& v : ce_) v.assign(n, 0.0);
  for (auto& v : ch_) v.assign(n, 0.0);
  zero_row_.assign(nx, 0.0);
  const double* X = xi_.data();
  const double* Z = zeta_.data();
  for (int k = 0; k < nz; ++k) {
    const int kmm = nb_[2].prev_material[k];
    for (int j = 0; j < ny; ++j) {
      const int jmm = nb_[1].prev_material[j];
      for (int i = 0; i < nx; ++i) {
        const int imm = nb_[0].prev_material[i];
        const std::size_t c = grid_.linear(i, j, k);
        const std::size_t ci = grid_.linear(imm, j, k);
        const std::size_t cj = grid_.linear(i, jmm, k);
        const std::size_t ck = grid_.linear(i, j, kmm);
        const double* t = X + 6 * c;
        ce_[0][c] = 0.5 * (t[XX] + X[6 * ci + XX]);
        ce_[1][c] = 0.5 * (t[YY] + X[6 * cj + YY]);
        ce_[2][c] = 0.5 * (t[ZZ] + X[6 * ck + ZZ]);
        ce_[3][c] = t[XY];
        ce_[4][c] = t[XZ];
        ce_[5][c] = t[YZ];
        const double* z = Z + 6 * c;
        const auto quad = [&](std::size_t a, std::size_t q, std::size_t aq, int e) {
          return 0.25 * (z[e] + Z[6 * a + e] + Z[6 * q + e] + Z[6 * aq + e]);
        };
        ch_[0][c] = quad(cj, ck, grid_.linear(i, jmm, kmm), XX);
        ch_[1][c] = quad(ci, ck, grid_.linear(imm, j, kmm), YY);
        ch_[2][c] = quad(ci, cj, grid_.linear(imm, jmm, k), ZZ);
        ch_[3][c] = z[XY] + Z[6 * ck + XY];
        ch_[4][c] = z[XZ] + Z[6 * cj + XZ];
        ch_[5][c] = z[YZ] + Z[6 * ci + YZ];
      }
    }
  }
}

void ConstitutiveOperator::apply_e(ConstVec3 d, MutVec3 e) const {
  if (scheme_ == SchemeKind::averaged) avg_e(d, e); else nonavg(xi_, d, e);
}

void ConstitutiveOperator::apply_h(ConstVec3 b, MutVec3 h) const {
  if (scheme_ == SchemeKind::averaged) avg_h(b, h); else nonavg(zeta_, b, h);
}

void ConstitutiveOperator::nonavg(const std::vector<double>& t, ConstVec3 in, MutVec3 out) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid_.cell_count());
  const double* tp = t.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    const double* m = tp + 6 * c;
    const double a = in[0][c], b = in[1][c], v = in[2][c];
    out[0][c] = m[XX] * a + m[XY] * b + m[XZ] * v;
    out[1][c] = m[XY] * a + m[YY] * b + m[YZ] * v;
    out[2][c] = m[XZ] * a + m[YZ] * b + m[ZZ] * v;
  }
}

namespace {

// Row entry i, or zero past a non-periodic end when Edge.
template <bool Edge>
inline double at(const double* r, int i) {
  if constexpr (Edge) {
    return i >= 0 ? r[i] : 0.0;
  } else {
    return r[i];
  }
}

// Runs body<false> on the interior of a row and body<true> on its two ends.
template <class Body>
inline void sweep_row(int nx, const AxisNeighbors& nb, Body&& body) {
  body.template operator()<true>(0, nb.next[0], nb.prev[0], nb.prev_material[0]);
  for (int i = 1; i < nx - 1; ++i) body.template operator()<false>(i, i + 1, i - 1, i - 1);
  if (nx > 1) body.template operator()<true>(nx - 1, nb.next[nx - 1], nb.prev[nx - 1], nb.prev_material[nx - 1]);
}

}  // namespace

void ConstitutiveOperator::avg_e(ConstVec3 d, MutVec3 e) const {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double* zero = zero_row_.data();
  const auto row = [&](const double* base, int j, int k) -> const double* {
    return (j < 0 || k < 0) ? zero : base + grid_.linear(0, j, k);
  };
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    const int kp = nb_[2].next[k], km = nb_[2].prev[k], kmm = nb_[2].prev_material[k];
    for (int j = 0; j < ny; ++j) {
      const int jp = nb_[1].next[j], jm = nb_[1].prev[j], jmm = nb_[1].prev_material[j];
      const std::size_t r = grid_.linear(0, j, k);
      const std::size_t rj = grid_.linear(0, jmm, k), rk = grid_.linear(0, j, kmm);
      const double *d0 = d[0] + r, *d1 = d[1] + r, *d2 = d[2] + r;
      const double *d0_jm = row(d[0], jm, k), *d0_km = row(d[0], j, km);
      const double *d1_jp = row(d[1], jp, k), *d1_km = row(d[1], j, km), *d1_jp_km = row(d[1], jp, km);
      const double *d2_kp = row(d[2], j, kp), *d2_jm = row(d[2], jm, k), *d2_jm_kp = row(d[2], jm, kp);
      const double *cx = ce_[0].data() + r, *cy = ce_[1].data() + r, *cz = ce_[2].data() + r;
      const double *xy = ce_[3].data() + r, *xz = ce_[4].data() + r, *yz = ce_[5].data() + r;
      const double *xy_j = ce_[3].data() + rj, *yz_j = ce_[5].data() + rj;
      const double *xz_k = ce_[4].data() + rk, *yz_k = ce_[5].data() + rk;
      double *e0 = e[0] + r, *e1 = e[1] + r, *e2 = e[2] + r;
      sweep_row(nx, nb_[0], [&]<bool Edge>(int i, int ip, int im, int imm) {
        const double sx = d0[i] + at<Edge>(d0, ip);
        const double sy = d1[i] + d1_jp[i];
        const double sz = d2[i] + d2_kp[i];
        e0[i] = cx[i] * d0[i] + 0.25 * (xy[i] * sy + xy[imm] * (at<Edge>(d1, im) + at<Edge>(d1_jp, im))) +
                0.25 * (xz[i] * sz + xz[imm] * (at<Edge>(d2, im) + at<Edge>(d2_kp, im)));
        e1[i] = cy[i] * d1[i] + 0.25 * (xy[i] * sx + xy_j[i] * (d0_jm[i] + at<Edge>(d0_jm, ip))) +
                0.25 * (yz[i] * sz + yz_j[i] * (d2_jm[i] + d2_jm_kp[i]));
        e2[i] = cz[i] * d2[i] + 0.25 * (xz[i] * sx + xz_k[i] * (d0_km[i] + at<Edge>(d0_km, ip))) +
                0.25 * (yz[i] * sy + yz_k[i] * (d1_km[i] + d1_jp_km[i]));
      });
    }
  }
}

void ConstitutiveOperator::avg_h(ConstVec3 b, MutVec3 h) const {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double* zero = zero_row_.data();
  const auto row = [&](const double* base, int j, int k) -> const double* {
    return (j < 0 || k < 0) ? zero : base + grid_.linear(0, j, k);
  };
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    const int kp = nb_[2].next[k], km = nb_[2].prev[k], kmm = nb_[2].prev_material[k];
    for (int j = 0; j < ny; ++j) {
      const int jp = nb_[1].next[j], jm = nb_[1].prev[j], jmm = nb_[1].prev_material[j];
      const std::size_t r = grid_.linear(0, j, k);
      const std::size_t rj = grid_.linear(0, jmm, k), rk = grid_.linear(0, j, kmm);
      const double *b0 = b[0] + r, *b1 = b[1] + r, *b2 = b[2] + r;
      const double *b0_jp = row(b[0], jp, k), *b0_kp = row(b[0], j, kp);
      const double *b1_jm = row(b[1], jm, k), *b1_kp = row(b[1], j, kp), *b1_jm_kp = row(b[1], jm, kp);
      const double *b2_km = row(b[2], j, km), *b2_jp = row(b[2], jp, k), *b2_jp_km = row(b[2], jp, km);
      const double *cx = ch_[0].data() + r, *cy = ch_[1].data() + r, *cz = ch_[2].data() + r;
      // xy paired along z, xz along y, yz along x
      const double *pxy = ch_[3].data() + r, *pxz = ch_[4].data() + r, *pyz = ch_[5].data() + r;
      const double *pxy_j = ch_[3].data() + rj, *pyz_j = ch_[5].data() + rj;
      const double *pxz_k = ch_[4].data() + rk, *pyz_k = ch_[5].data() + rk;
      double *h0 = h[0] + r, *h1 = h[1] + r, *h2 = h[2] + r;
      sweep_row(nx, nb_[0], [&]<bool Edge>(int i, int ip, int im, int imm) {
        const double by_x = b1[i] + at<Edge>(b1, ip);
        const double bz_x = b2[i] + at<Edge>(b2, ip);
        h0[i] = cx[i] * b0[i] + 0.125 * (pxy[i] * by_x + pxy_j[i] * (b1_jm[i] + at<Edge>(b1_jm, ip))) +
                0.125 * (pxz[i] * bz_x + pxz_k[i] * (b2_km[i] + at<Edge>(b2_km, ip)));
        h1[i] = cy[i] * b1[i] + 0.125 * (pxy[i] * (b0[i] + b0_jp[i]) + pxy[imm] * (at<Edge>(b0, im) + at<Edge>(b0_jp, im))) +
                0.125 * (pyz[i] * (b2[i] + b2_jp[i]) + pyz_k[i] * (b2_km[i] + b2_jp_km[i]));
        h2[i] = cz[i] * b2[i] + 0.125 * (pxz[i] * (b0[i] + b0_kp[i]) + pxz[imm] * (at<Edge>(b0, im) + at<Edge>(b0_kp, im))) +
                0.125 * (pyz[i] * (b1[i] + b1_kp[i]) + pyz_j[i] * (b1_jm[i] + b1_jm_kp[i]));
      });
    }
  }
}

void constitutive_nonavg(FieldFamily kind, FieldSet& fields, const YeeGrid& grid,
                         const MaterialGrid& materials) {
  ConstitutiveOperator op(grid, materials, SchemeKind::non_averaged);
  if (kind == FieldFamily::E) {
    op.apply_e(cview(fields, FieldFamily::D), view(fields, FieldFamily::E));
  } else if (kind == FieldFamily::H) {
    op.apply_h(cview(fields, FieldFamily::B), view(fields, FieldFamily::H));
  } else {
    throw InvalidInput("constitutive update targets E or H");
  }
}

void constitutive_avg_e(FieldSet& fields, const YeeGrid& grid, const MaterialGrid& materials) {
  ConstitutiveOperator(grid, materials, SchemeKind::averaged)
      .apply_e(cview(fields, FieldFamily::D), view(fields, FieldFamily::E));
}

void constitutive_avg_h(FieldSet& fields, const YeeGrid& grid, const MaterialGrid& materials) {
  ConstitutiveOperator(grid, materials, SchemeKind::averaged)
      .apply_h(cview(fields, FieldFamily::B), view(fields, FieldFamily::H));
}

Simulation::Simulation(YeeGrid grid, MaterialGrid materials, SchemeKind scheme, double dt)
    : grid_(std::move(grid)),
      materials_(std::move(materials)),
      scheme_(scheme),
      dt_(dt),
      fields_(grid_.cell_count()),
      curl_(grid_),
      constitutive_(grid_, materials_, scheme),
      any_pec_(!grid_.all_periodic()) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive and finite");
}

void Simulation::enable_pml(const PmlParams& params) {
  const PmlProfile profile = build_pml(params, grid_);
  for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
    const Index3 idx = grid_.unlinear(c);
    const int along = profile.axis == 0 ? idx.i : (profile.axis == 1 ? idx.j : idx.k);
    if (profile.cell_in_layer(along, 1) && !materials_.is_vacuum_cell(c)) {
      throw InvalidInput("PML layers and their standoff cell must be vacuum");
    }
  }
  if (plane_wave_ && plane_wave_->spec().axis == profile.axis) {
    const int p = plane_wave_->spec().plane_index;
    if (profile.cell_in_layer(p - 1, 1) || profile.cell_in_layer(p, 1)) {
      throw InvalidInput("TFSF plane lies inside the PML");
    }
  }
  pml_ = std::make_unique<PmlUpdater>(profile, grid_, dt_);
}

void Simulation::add_point_source(const PointSource& source) {
  source.validate(grid_);
  point_sources_.push_back(source);
}

void Simulation::set_plane_wave(const PlaneWaveSpec& spec) {
  auto src = std::make_unique<PlaneWaveSource>(spec, grid_, dt_, materials_);
  if (pml_ && pml_->profile().axis == spec.axis) {
    const int p = spec.plane_index;
    if (pml_->profile().cell_in_layer(p - 1, 1) || pml_->profile().cell_in_layer(p, 1)) {
      throw InvalidInput("TFSF plane lies inside the PML");
    }
  }
  plane_wave_ = std::move(src);
}

void Simulation::clear_sources() {
  plane_wave_.reset();
  point_sources_.clear();
}

void Simulation::sync_fields() {
  if (any_pec_) apply_pec(fields_, grid_, FieldFamily::D);
  constitutive_.apply_e(cview(fields_, FieldFamily::D), view(fields_, FieldFamily::E));
  constitutive_.apply_h(cview(fields_, FieldFamily::B), view(fields_, FieldFamily::H));
  if (any_pec_) apply_pec(fields_, grid_, FieldFamily::E);
}

void Simulation::step() {
  const std::int64_t n = fields_.time_level;
  if (pml_) pml_->store_flux(fields_, FieldFamily::B);
  curl_.apply_ce(cview(fields_, FieldFamily::E), view(fields_, FieldFamily::B), -dt_);
  if (plane_wave_) plane_wave_->correct_b(fields_, n);
  constitutive_.apply_h(cview(fields_, FieldFamily::B), view(fields_, FieldFamily::H));
  if (pml_) pml_->apply(fields_, FieldFamily::H);

  if (pml_) pml_->store_flux(fields_, FieldFamily::D);
  curl_.apply_ch(cview(fields_, FieldFamily::H), view(fields_, FieldFamily::D), dt_);
  if (plane_wave_) plane_wave_->correct_d(fields_, n);
  if (any_pec_) apply_pec(fields_, grid_, FieldFamily::D);
  constitutive_.apply_e(cview(fields_, FieldFamily::D), view(fields_, FieldFamily::E));
  if (pml_) pml_->apply(fields_, FieldFamily::E);
  if (any_pec_) apply_pec(fields_, grid_, FieldFamily::E);

  const double t = static_cast<double>(n + 1) * dt_;
  for (const auto& s : point_sources_) {
    fields_[s.component][grid_.linear(s.cell)] += gaussian_amplitude(t, s.pulse);
  }
  fields_.time_level = n + 1;
}

void Simulation::run(std::int64_t steps, const std::function<void(const Simulation&)>& observer,
                     int check_interval) {
  if (steps < 0) throw InvalidInput("step count must be non-negative");
  if (check_interval < 1) check_interval = 1;
  for (std::int64_t s = 0; s < steps; ++s) {
    step();
    if ((s + 1) % check_interval == 0 || s + 1 == steps) {
      if (!fields_.all_finite()) {
        std::ostringstream os;
        os << "non-finite field detected at time level " << fields_.time_level;
        throw NumericalError(os.str());
      }
    }
    if (observer) observer(*this);
  }
}

double Simulation::energy() const {
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    const auto& d = fields_.get(FieldFamily::D, a);
    const auto& e = fields_.get(FieldFamily::E, a);
    const auto& b = fields_.get(FieldFamily::B, a);
    const auto& h = fields_.get(FieldFamily::H, a);
    for (std::size_t c = 0; c < d.size(); ++c) sum += d[c] * e[c] + b[c] * h[c];
  }
  return 0.5 * sum;
}

CflReport compute_cfl(const YeeGrid& grid, const MaterialGrid& materials, SchemeKind scheme,
                      const CflOptions& options) {
  // A = C_h M_zeta C_e M_xi is self-adjoint in <x, y> = x^T M_xi y. The power
  // sequence A^k v spans a Krylov space; Lanczos extracts its largest Ritz
  // value, which converges far faster than the plain power-iteration
  // quotient on clustered spectra while costing the same operator applies.
  const CurlOperator curl(grid);
  const ConstitutiveOperator mat(grid, materials, scheme);
  const bool pec = !grid.all_periodic();
  const std::size_t n = grid.cell_count();

  FieldSet v(n), v_prev(n), w(n), scratch(n);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int a = 0; a < 3; ++a)
    for (auto& x : v.get(FieldFamily::D, a)) x = uni(rng);

  auto dot = [](const FieldSet& p, FieldFamily fp, const FieldSet& q, FieldFamily fq) {
    double sum = 0.0;
    for (int a = 0; a < 3; ++a) {
      const auto& x = p.get(fp, a);
      const auto& y = q.get(fq, a);
      for (std::size_t c = 0; c < x.size(); ++c) sum += x[c] * y[c];
    }
    return sum;
  };
  // D slot holds the Lanczos vector, E slot its image under M_xi.
  auto apply_m = [&](FieldSet& f) {
    if (pec) apply_pec(f, grid, FieldFamily::D);
    mat.apply_e(cview(f, FieldFamily::D), view(f, FieldFamily::E));
    if (pec) apply_pec(f, grid, FieldFamily::E);
  };
  auto axpy = [](FieldSet& y, double alpha, const FieldSet& x) {
    for (int fam : {0, 1}) {
      const FieldFamily f = fam == 0 ? FieldFamily::D : FieldFamily::E;
      for (int a = 0; a < 3; ++a) {
        auto& yy = y.get(f, a);
        const auto& xx = x.get(f, a);
        for (std::size_t c = 0; c < yy.size(); ++c) yy[c] += alpha * xx[c];
      }
    }
  };
  auto scale = [](FieldSet& y, double s) {
    for (FieldFamily f : {FieldFamily::D, FieldFamily::E})
      for (int a = 0; a < 3; ++a)
        for (auto& x : y.get(f, a)) x *= s;
  };

  apply_m(v);
  double norm = std::sqrt(dot(v, FieldFamily::D, v, FieldFamily::E));
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("power iteration collapsed");
  scale(v, 1.0 / norm);

  std::vector<double> alpha, beta;
  double estimate = 0.0;
  double change = 1.0;
  double beta_prev = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    // w = A v, with M_xi w kept alongside
    for (int a = 0; a < 3; ++a) {
      std::fill(scratch.get(FieldFamily::B, a).begin(), scratch.get(FieldFamily::B, a).end(), 0.0);
      std::fill(w.get(FieldFamily::D, a).begin(), w.get(FieldFamily::D, a).end(), 0.0);
    }
    curl.apply_ce(cview(v, FieldFamily::E), view(scratch, FieldFamily::B), 1.0);
    mat.apply_h(cview(scratch, FieldFamily::B), view(scratch, FieldFamily::H));
    curl.apply_ch(cview(scratch, FieldFamily::H), view(w, FieldFamily::D), 1.0);
    const double a_j = dot(scratch, FieldFamily::B, scratch, FieldFamily::H);
    apply_m(w);
    axpy(w, -a_j, v);
    if (it > 1) axpy(w, -beta_prev, v_prev);
    alpha.push_back(a_j);

    const Eigen::Map<const Eigen::VectorXd> diag(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    double ritz = a_j;
    if (alpha.size() > 1) {
      const Eigen::Map<const Eigen::VectorXd> off(beta.data(), static_cast<Eigen::Index>(beta.size()));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
      ritz = es.eigenvalues().maxCoeff();
    }
    change = std::abs(ritz - estimate) / std::max(std::abs(ritz), 1e-300);
    estimate = ritz;
    const double b_j = std::sqrt(std::max(dot(w, FieldFamily::D, w, FieldFamily::E), 0.0));
    if ((it > 1 && change < options.tolerance) || !(b_j > 1e-14 * std::abs(ritz))) {
      if (!(estimate > 0.0)) throw NumericalError("curl-curl operator has no positive spectrum");
      return {2.0 / std::sqrt(estimate), estimate, it, change};
    }
    beta.push_back(b_j);
    beta_prev = b_j;
    std::swap(v_prev, v);
    std::swap(v, w);
    scale(v, 1.0 / b_j);
  }
  std::ostringstream os;
  os << "spectral radius iteration did not converge in " << options.max_iterations
     << " iterations (last relative change " << change << ")";
  throw NonConvergence(os.str(), estimate);
}

}  // namespace anisofdtd
