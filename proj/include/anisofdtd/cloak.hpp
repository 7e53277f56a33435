#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "anisofdtd/lattice.hpp"
#include "anisofdtd/materials.hpp"

namespace anisofdtd {

enum class CloakKind { smooth, nonsmooth };

/// Radial transformation-optics cloak. Lengths share the grid's units.
struct CloakSpec {
  CloakKind kind = CloakKind::smooth;
  Vec3 center{0.0, 0.0, 0.0};
  // smooth: r' = (1 - depth * exp(-(r/sigma)^n)) r
  double n = 3.0;
  double depth = 0.8;
  double sigma = 0.08;
  // nonsmooth: piecewise-linear r = f(r') with breakpoints R1', R2
  double r1 = 0.008;
  double r2 = 0.130;
  double r1_prime = 0.040;
  Tensor3 background_eps;
  Tensor3 background_mu;
  /// Full 64-point cell averaging (default) or centre-only sampling.
  bool cell_average = true;

  void validate() const;
};

/// Smooth map r -> r'. Throws on r < 0 or a non-smooth spec.
double smooth_map(double r, const CloakSpec& spec);
/// Derivative d r'/d r of the smooth map.
double smooth_map_derivative(double r, const CloakSpec& spec);
/// Inverse of the smooth map (Newton with bisection safeguard).
double smooth_map_inverse(double r_prime, const CloakSpec& spec);

/// Piecewise-linear map r' -> r. Throws on r' < 0 or a smooth spec.
double nonsmooth_map(double r_prime, const CloakSpec& spec);

using SpatialMap = std::function<Vec3(const Vec3&)>;

/// Central-difference Jacobian d map_p / d x_q at `point`.
Eigen::Matrix3d numerical_jacobian(const SpatialMap& map, const Vec3& point, double step);

/// |det L| L^-1 base L^-T. Throws InvalidInput for a singular Jacobian.
Tensor3 transform_material(const Eigen::Matrix3d& jacobian, const Tensor3& base);

/// Jacobian of the physical -> virtual map at a physical point, i.e. the
/// matrix that transform_material expects. `step` is the finite-difference
/// step; nonsmooth branch radii closer than `step` are nudged inward.
Eigen::Matrix3d cloak_jacobian(const CloakSpec& spec, const Vec3& physical_point, double step);

/// eps' and mu' of the cloak at a physical point.
std::pair<Tensor3, Tensor3> cloak_material_at(const CloakSpec& spec, const Vec3& point,
                                              double step);

/// Radius beyond which the cloak is indistinguishable from background.
double cloak_influence_radius(const CloakSpec& spec);

/// Per-cell cloak material. Cells entirely beyond the influence radius get the
/// background tensors, as do cells for which `force_background` returns true.
MaterialGrid build_cloak(const CloakSpec& spec, const YeeGrid& grid,
                         const std::function<bool(const Index3&)>& force_background = {});

}  // namespace anisofdtd
