#pragma once

#include <array>
#include <vector>

#include "anisofdtd/lattice.hpp"

namespace anisofdtd {

/// i mod n, always in [0, n).
constexpr int periodic_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

/// Neighbour index maps along one axis. Field neighbours outside a
/// non-periodic axis are absent (-1, contributing zero); material neighbours
/// clamp to the nearest in-domain cell.
struct AxisNeighbors {
  std::vector<int> prev, next;
  std::vector<int> prev_material, next_material;
};

AxisNeighbors make_axis_neighbors(const YeeGrid& grid, int axis);

/// Zeroes the tangential D and E components lying on the high-side PEC walls
/// of every non-periodic axis. The low-side walls sit half a cell below the
/// first cell and are realised by the absent-neighbour convention.
void apply_pec(FieldSet& fields, const YeeGrid& grid, FieldFamily family);

struct PmlParams {
  int m = 3;
  int n_cells = 10;
  /// Peak conductivity in normalised units (1/length). Negative selects the
  /// default 8 (m + 1) / (n_cells * spacing).
  double sigma_max = -1.0;
  double kappa_max = 1.0;

  friend bool operator==(const PmlParams&, const PmlParams&) = default;
};

double default_pml_sigma_max(int m, int n_cells, double spacing);

/// Polynomially graded UPML on the single axis whose faces are marked upml.
struct PmlProfile {
  int axis = 2;
  int m = 3;
  int n_cells = 10;
  double sigma_max = 0.0;
  double kappa_max = 1.0;
  bool low = false;
  bool high = false;
  int extent = 0;

  /// Depth into the layer (cells) of a position given in vertex-index units
  /// along the PML axis; 0 outside the layers.
  double depth_cells(double v) const;
  double sigma(double depth_cells) const;
  double kappa(double depth_cells) const;
  /// True when the cell overlaps a layer (with `standoff` extra cells).
  bool cell_in_layer(int index, int standoff = 0) const;
};

/// Throws when no axis (or more than one) carries upml faces, or when a layer
/// is thicker than half the axis.
PmlProfile build_pml(const PmlParams& params, const YeeGrid& grid);

/// Auxiliary state of the UPML constitutive update. Inside the layers the
/// flux-to-field relation for vacuum is replaced by the stretched-coordinate
/// update; components parallel to the PML axis and transverse ones use the
/// two forms of the uniaxial tensor.
class PmlUpdater {
 public:
  PmlUpdater(const PmlProfile& profile, const YeeGrid& grid, double dt);

  const PmlProfile& profile() const { return profile_; }

  /// Stores the flux (D or B) and its field (E or H) inside the layers ahead
  /// of the flux's curl update.
  void store_flux(const FieldSet& fields, FieldFamily flux_family);
  /// Overwrites E (from D) or H (from B) inside the layers.
  void apply(FieldSet& fields, FieldFamily field_family) const;
  std::size_t layer_component_count() const;

 private:
  struct Entry {
    std::size_t cell;
    double a;  // transverse: ca ; parallel: kappa
    double b;  // transverse: cb ; parallel: sigma*dt/2
  };
  PmlProfile profile_;
  // [family D/B][axis] entries, saved flux and saved field values.
  std::array<std::array<std::vector<Entry>, 3>, 2> entries_;
  std::array<std::array<std::vector<double>, 3>, 2> saved_;
  std::array<std::array<std::vector<double>, 3>, 2> saved_field_;
};

}  // namespace anisofdtd
