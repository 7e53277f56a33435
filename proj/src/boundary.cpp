#include "anisofdtd/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

AxisNeighbors make_axis_neighbors(const YeeGrid& grid, int axis) {
  const int n = grid.n(axis);
  const bool periodic = grid.boundary(axis).periodic();
  AxisNeighbors nb;
  nb.prev.resize(n);
  nb.next.resize(n);
  nb.prev_material.resize(n);
  nb.next_material.resize(n);
  for (int i = 0; i < n; ++i) {
    if (periodic) {
      nb.prev[i] = nb.prev_material[i] = periodic_index(i - 1, n);
      nb.next[i] = nb.next_material[i] = periodic_index(i + 1, n);
    } else {
      nb.prev[i] = i > 0 ? i - 1 : -1;
      nb.next[i] = i + 1 < n ? i + 1 : -1;
      nb.prev_material[i] = std::max(i - 1, 0);
      nb.next_material[i] = std::min(i + 1, n - 1);
    }
  }
  return nb;
}

void apply_pec(FieldSet& fields, const YeeGrid& grid, FieldFamily family) {
  for (int wall = 0; wall < 3; ++wall) {
    if (grid.boundary(wall).periodic()) continue;
    const int last = grid.n(wall) - 1;
    for (int comp = 0; comp < 3; ++comp) {
      if (comp == wall) continue;
      auto& arr = fields.get(family, comp);
      std::array<int, 3> lo{0, 0, 0};
      std::array<int, 3> hi{grid.nx(), grid.ny(), grid.nz()};
      lo[wall] = last;
      for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
          for (int i = lo[0]; i < hi[0]; ++i) arr[grid.linear(i, j, k)] = 0.0;
    }
  }
}

double default_pml_sigma_max(int m, int n_cells, double spacing) {
  return 8.0 * (m + 1) / (n_cells * spacing);
}

double PmlProfile::depth_cells(double v) const {
  double d = 0.0;
  if (low) d = std::max(d, (n_cells - 0.5) - v);
  if (high) d = std::max(d, v - (extent - 0.5 - n_cells));
  return std::clamp(d, 0.0, static_cast<double>(n_cells));
}

double PmlProfile::sigma(double depth) const {
  return sigma_max * std::pow(depth / n_cells, m);
}

double PmlProfile::kappa(double depth) const {
  return 1.0 + (kappa_max - 1.0) * std::pow(depth / n_cells, m);
}

bool PmlProfile::cell_in_layer(int index, int standoff) const {
  if (low && index < n_cells + standoff) return true;
  if (high && index >= extent - n_cells - standoff) return true;
  return false;
}

PmlProfile build_pml(const PmlParams& params, const YeeGrid& grid) {
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    const auto& b = grid.boundary(a);
    if (b.low == BoundaryKind::upml || b.high == BoundaryKind::upml) {
      if (axis >= 0) throw InvalidInput("UPML is supported on a single axis only");
      axis = a;
    }
  }
  if (axis < 0) throw InvalidInput("no axis carries a upml boundary");
  if (params.n_cells < 1) throw InvalidInput("PML needs at least one cell");
  if (params.m < 0) throw InvalidInput("PML grading order must be non-negative");
  if (2 * params.n_cells > grid.n(axis)) {
    throw InvalidInput("PML layer thicker than half the axis");
  }
  if (!(params.kappa_max >= 1.0)) throw InvalidInput("kappa_max must be >= 1");
  PmlProfile p;
  p.axis = axis;
  p.m = params.m;
  p.n_cells = params.n_cells;
  p.sigma_max = params.sigma_max < 0.0
                    ? default_pml_sigma_max(params.m, params.n_cells, grid.spacing(axis))
                    : params.sigma_max;
  p.kappa_max = params.kappa_max;
  p.low = grid.boundary(axis).low == BoundaryKind::upml;
  p.high = grid.boundary(axis).high == BoundaryKind::upml;
  p.extent = grid.n(axis);
  return p;
}

PmlUpdater::PmlUpdater(const PmlProfile& profile, const YeeGrid& grid, double dt)
    : profile_(profile) {
  const int pa = profile.axis;
  for (int fam = 0; fam < 2; ++fam) {
    const FieldFamily flux = fam == 0 ? FieldFamily::D : FieldFamily::B;
    for (int comp = 0; comp < 3; ++comp) {
      const double off = staggering_offset(component_of(flux, comp))[pa];
      auto& list = entries_[fam][comp];
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const Index3 idx = grid.unlinear(c);
        const int along = pa == 0 ? idx.i : (pa == 1 ? idx.j : idx.k);
        const double depth = profile.depth_cells(along + off);
        if (depth <= 0.0) continue;
        const double s = profile.sigma(depth);
        const double kap = profile.kappa(depth);
        if (comp == pa) {
          list.push_back({c, kap, 0.5 * s * dt});
        } else {
          const double den = kap + 0.5 * s * dt;
          list.push_back({c, (kap - 0.5 * s * dt) / den, 1.0 / den});
        }
      }
      saved_[fam][comp].assign(list.size(), 0.0);
      saved_field_[fam][comp].assign(list.size(), 0.0);
    }
  }
}

void PmlUpdater::store_flux(const FieldSet& fields, FieldFamily flux_family) {
  const int fam = flux_family == FieldFamily::D ? 0 : 1;
  const FieldFamily field = fam == 0 ? FieldFamily::E : FieldFamily::H;
  for (int comp = 0; comp < 3; ++comp) {
    const auto& src = fields.get(flux_family, comp);
    const auto& src_field = fields.get(field, comp);
    const auto& list = entries_[fam][comp];
    auto& dst = saved_[fam][comp];
    auto& dst_field = saved_field_[fam][comp];
    for (std::size_t q = 0; q < list.size(); ++q) {
      dst[q] = src[list[q].cell];
      dst_field[q] = src_field[list[q].cell];
    }
  }
}

void PmlUpdater::apply(FieldSet& fields, FieldFamily field_family) const {
  const bool electric = field_family == FieldFamily::E;
  const int fam = electric ? 0 : 1;
  const FieldFamily flux = electric ? FieldFamily::D : FieldFamily::B;
  for (int comp = 0; comp < 3; ++comp) {
    const auto& now = fields.get(flux, comp);
    auto& out = fields.get(field_family, comp);
    const auto& list = entries_[fam][comp];
    const auto& old = saved_[fam][comp];
    const auto& prev = saved_field_[fam][comp];
    if (comp == profile_.axis) {
      // dG/dt = kappa dF/dt + sigma F  (F flux, G field)
      for (std::size_t q = 0; q < list.size(); ++q) {
        const std::size_t c = list[q].cell;
        out[c] = prev[q] + list[q].a * (now[c] - old[q]) + list[q].b * (now[c] + old[q]);
      }
    } else {
      // dF/dt = kappa dG/dt + sigma G
      for (std::size_t q = 0; q < list.size(); ++q) {
        const std::size_t c = list[q].cell;
        out[c] = list[q].a * prev[q] + list[q].b * (now[c] - old[q]);
      }
    }
  }
}

std::size_t PmlUpdater::layer_component_count() const {
  std::size_t n = 0;
  for (const auto& fam : entries_)
    for (const auto& list : fam) n += list.size();
  return n;
}

}  // namespace anisofdtd
