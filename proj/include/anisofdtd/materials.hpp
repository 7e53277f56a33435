#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "anisofdtd/lattice.hpp"

namespace anisofdtd {

/// Real symmetric 3x3 material tensor (relative permittivity/permeability or
/// their inverses). Symmetry is exact: every constructor either builds from
/// the six unique entries or rejects asymmetric input.
class Tensor3 {
 public:
  Tensor3() : m_(Eigen::Matrix3d::Identity()) {}

  static Tensor3 identity() { return Tensor3(); }
  static Tensor3 from_symmetric(double xx, double xy, double xz, double yy, double yz,
                                double zz);
  /// Row-major nine entries; throws InvalidInput unless exactly symmetric.
  static Tensor3 from_entries(const std::array<double, 9>& rowmajor);
  /// Throws InvalidInput unless exactly symmetric.
  static Tensor3 from_matrix(const Eigen::Matrix3d& m);
  /// Mirrors the upper triangle; for computed results (inverses, congruences)
  /// whose lower triangle differs only by rounding.
  static Tensor3 from_upper(const Eigen::Matrix3d& m);

  double operator()(int p, int q) const { return m_(p, q); }
  const Eigen::Matrix3d& matrix() const { return m_; }
  std::array<double, 9> entries() const;

  Tensor3 scaled(double s) const;
  bool is_identity() const { return m_ == Eigen::Matrix3d::Identity(); }

  friend bool operator==(const Tensor3& a, const Tensor3& b) { return a.m_ == b.m_; }

 private:
  explicit Tensor3(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

struct SpdReport {
  bool spd = false;
  double min_eigenvalue = 0.0;
};

SpdReport check_spd(const Tensor3& t);

/// Inverse of an SPD tensor; throws InvalidInput for non-SPD input.
Tensor3 invert_tensor(const Tensor3& t);

enum class MaterialKind { eps, mu };

/// High-contrast fully anisotropic base tensors scaled by gamma.
Tensor3 preset_tensor(MaterialKind kind, double gamma);

/// Per-cell eps and mu with precomputed inverses xi = eps^-1, zeta = mu^-1.
/// Immutable once built.
class MaterialGrid {
 public:
  MaterialGrid(std::array<int, 3> dims, std::vector<Tensor3> eps, std::vector<Tensor3> mu);

  static MaterialGrid vacuum(std::array<int, 3> dims);

  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t cell_count() const { return eps_.size(); }
  const Tensor3& eps(std::size_t c) const { return eps_[c]; }
  const Tensor3& mu(std::size_t c) const { return mu_[c]; }
  const Tensor3& xi(std::size_t c) const { return xi_[c]; }
  const Tensor3& zeta(std::size_t c) const { return zeta_[c]; }
  const std::vector<Tensor3>& eps_all() const { return eps_; }
  const std::vector<Tensor3>& mu_all() const { return mu_; }
  bool is_vacuum_cell(std::size_t c) const { return eps_[c].is_identity() && mu_[c].is_identity(); }

  /// Copy with every tensor multiplied by gamma.
  MaterialGrid scaled(double gamma) const;
  /// 64-bit FNV-1a digest of the eps/mu payload, for run metadata.
  std::uint64_t digest() const;

 private:
  std::array<int, 3> dims_;
  std::vector<Tensor3> eps_, mu_, xi_, zeta_;
};

using MaterialFunction = std::function<Tensor3(const Vec3&)>;

/// Componentwise cell average of an analytic tensor field using a 4-point
/// Gauss-Legendre rule per axis. Throws InvalidInput on a non-SPD sample.
Tensor3 average_analytic(const MaterialFunction& fn, const Index3& cell, const YeeGrid& grid);

/// Gauss-Legendre nodes on [0,1] and their weights (sum to 1).
const std::array<double, 4>& gauss4_nodes();
const std::array<double, 4>& gauss4_weights();

enum class LayoutKind { vacuum, sphere, cube, random };

struct LayoutSpec {
  LayoutKind kind = LayoutKind::vacuum;
  double gamma = 1.0;
  /// Shape centre in cell units (vertex coordinates, so 0.5 is the centre of cell 0).
  Vec3 center{0.0, 0.0, 0.0};
  /// Sphere radius or cube half-edge, in cell units.
  double size = 0.0;
  /// Random layout category weights: aniso-eps only, aniso-mu only, both, vacuum.
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
};

MaterialGrid build_layout(const LayoutSpec& spec, const YeeGrid& grid, std::uint64_t seed);

/// Binary material file: "AFDTDMAT" magic, u32 version, u32 nx, ny, nz, u32
/// units flag (0 = relative to eps0/mu0), then per cell 9 eps and 9 mu f64
/// entries row-major. The loader validates symmetry and SPD.
void write_material_grid(const std::filesystem::path& path, const MaterialGrid& m);
MaterialGrid read_material_grid(const std::filesystem::path& path);

}  // namespace anisofdtd
