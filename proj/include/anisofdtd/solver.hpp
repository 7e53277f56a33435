#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "anisofdtd/boundary.hpp"
#include "anisofdtd/lattice.hpp"
#include "anisofdtd/materials.hpp"
#include "anisofdtd/source.hpp"

namespace anisofdtd {

enum class SchemeKind { non_averaged, averaged };

std::string_view scheme_name(SchemeKind s);
SchemeKind parse_scheme(std::string_view name);

/// Three component arrays of one field family.
using ConstVec3 = std::array<const double*, 3>;
using MutVec3 = std::array<double*, 3>;

ConstVec3 cview(const FieldSet& f, FieldFamily family);
MutVec3 view(FieldSet& f, FieldFamily family);

/// Discrete curls on the staggered lattice. C_e maps face values (E) to edge
/// values (B) with backward differences; C_h maps edge values (H) to face
/// values (D) with forward differences, and C_h = C_e^T. Values beyond a
/// non-periodic face are absent and read as zero.
class CurlOperator {
 public:
  explicit CurlOperator(const YeeGrid& grid);

  /// out += factor * C_e e
  void apply_ce(ConstVec3 e, MutVec3 out, double factor) const;
  /// out += factor * C_h h
  void apply_ch(ConstVec3 h, MutVec3 out, double factor) const;

 private:
  YeeGrid grid_;
  std::array<AxisNeighbors, 3> nb_;
};

/// B <- B - dt C_e E
void curl_e_update_b(FieldSet& fields, const YeeGrid& grid, double dt);
/// D <- D + dt C_h H
void curl_h_update_d(FieldSet& fields, const YeeGrid& grid, double dt);

/// Flux-to-field maps E = M_xi D and H = M_zeta B for either scheme.
///
/// Non-averaged: each cell multiplies its own three (non co-located) flux
/// components by its tensor. Averaged: every face value is the mean over the
/// two cells sharing the face, and every edge value the mean over the four
/// cells sharing the edge, of the per-cell products evaluated at the cell
/// vertices. Material neighbours beyond a non-periodic face are clamped to the
/// boundary cell; flux neighbours there are zero.
class ConstitutiveOperator {
 public:
  ConstitutiveOperator(const YeeGrid& grid, const MaterialGrid& materials, SchemeKind scheme);

  SchemeKind scheme() const { return scheme_; }
  void apply_e(ConstVec3 d, MutVec3 e) const;
  void apply_h(ConstVec3 b, MutVec3 h) const;

 private:
  void nonavg(const std::vector<double>& t, ConstVec3 in, MutVec3 out) const;
  void avg_e(ConstVec3 d, MutVec3 e) const;
  void avg_h(ConstVec3 b, MutVec3 h) const;
  void build_averaged();

  YeeGrid grid_;
  SchemeKind scheme_;
  // xx, xy, xz, yy, yz, zz per cell
  std::vector<double> xi_, zeta_;
  std::array<AxisNeighbors, 3> nb_;
  // Averaged scheme: E uses the face-averaged diagonals then xy, xz, yz;
  // H uses the edge-averaged diagonals then xy summed along z, xz along y
  // and yz along x.
  std::array<std::vector<double>, 6> ce_, ch_;
  std::vector<double> zero_row_;
};

/// E from D (kind E) or H from B (kind H) with the per-cell scheme.
void constitutive_nonavg(FieldFamily kind, FieldSet& fields, const YeeGrid& grid,
                         const MaterialGrid& materials);
void constitutive_avg_e(FieldSet& fields, const YeeGrid& grid, const MaterialGrid& materials);
void constitutive_avg_h(FieldSet& fields, const YeeGrid& grid, const MaterialGrid& materials);

/// Leapfrog stepper. The state is (D, B); E and H are derived and must be
/// consistent with the state when step() is entered (call sync_fields()
/// after writing D or B directly).
///
/// One step: B -= dt C_e E, TFSF B correction, H = M_zeta B (UPML inside the
/// layers), D += dt C_h H, TFSF D correction, PEC on D, E = M_xi D (UPML),
/// PEC on E, soft sources added to E.
class Simulation {
 public:
  Simulation(YeeGrid grid, MaterialGrid materials, SchemeKind scheme, double dt);

  const YeeGrid& grid() const { return grid_; }
  const MaterialGrid& materials() const { return materials_; }
  SchemeKind scheme() const { return scheme_; }
  double dt() const { return dt_; }
  std::int64_t time_level() const { return fields_.time_level; }
  double time() const { return static_cast<double>(fields_.time_level) * dt_; }

  FieldSet& fields() { return fields_; }
  const FieldSet& fields() const { return fields_; }

  /// Requires every cell within the layers (plus one standoff cell) to be
  /// vacuum.
  void enable_pml(const PmlParams& params);
  const PmlUpdater* pml() const { return pml_.get(); }
  void add_point_source(const PointSource& source);
  void set_plane_wave(const PlaneWaveSpec& spec);
  const PlaneWaveSource* plane_wave() const { return plane_wave_.get(); }
  void clear_sources();
  bool has_sources() const { return plane_wave_ || !point_sources_.empty(); }

  /// Recomputes E and H from D and B (with PEC).
  void sync_fields();
  void step();
  /// Runs `steps` steps; `observer` is called after each one. A non-finite
  /// field aborts with NumericalError (checked every `check_interval` steps
  /// and after the last).
  void run(std::int64_t steps, const std::function<void(const Simulation&)>& observer = {},
           int check_interval = 16);

  /// 1/2 (D.E + B.H) over all cells.
  double energy() const;

 private:
  YeeGrid grid_;
  MaterialGrid materials_;
  SchemeKind scheme_;
  double dt_;
  FieldSet fields_;
  CurlOperator curl_;
  ConstitutiveOperator constitutive_;
  std::unique_ptr<PmlUpdater> pml_;
  std::unique_ptr<PlaneWaveSource> plane_wave_;
  std::vector<PointSource> point_sources_;
  bool any_pec_;
};

struct CflReport {
  double dt_max = 0.0;
  double spectral_radius = 0.0;
  int iterations = 0;
  /// Relative change of the estimate in the last iteration.
  double residual = 0.0;
};

struct CflOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;
  std::uint64_t seed = 20240607;
};

/// dt_max = 2 / sqrt(rho(C_h M_zeta C_e M_xi)), rho by matrix-free Lanczos
/// in the M_xi inner product. Throws
/// NonConvergence (carrying the last spectral-radius estimate) at the cap.
CflReport compute_cfl(const YeeGrid& grid, const MaterialGrid& materials, SchemeKind scheme,
                      const CflOptions& options = {});

/// Default fraction of dt_max used when no explicit dt is given.
inline constexpr double kDefaultCflFactor = 0.4;

}  // namespace anisofdtd
