#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace anisofdtd {

enum class BoundaryKind { periodic, pec, upml };

struct AxisBoundary {
  BoundaryKind low = BoundaryKind::periodic;
  BoundaryKind high = BoundaryKind::periodic;

  bool periodic() const { return low == BoundaryKind::periodic; }
  friend bool operator==(const AxisBoundary&, const AxisBoundary&) = default;
};

/// The twelve staggered field arrays. D/E live on low-side faces, B/H on
/// low-side edges of the owning cell.
enum class Component : int { Dx, Dy, Dz, Ex, Ey, Ez, Bx, By, Bz, Hx, Hy, Hz };

inline constexpr int kComponentCount = 12;

enum class FieldFamily : int { D = 0, E = 1, B = 2, H = 3 };

constexpr Component component_of(FieldFamily family, int axis) {
  return static_cast<Component>(3 * static_cast<int>(family) + axis);
}
constexpr int axis_of(Component c) { return static_cast<int>(c) % 3; }
constexpr FieldFamily family_of(Component c) {
  return static_cast<FieldFamily>(static_cast<int>(c) / 3);
}
/// True for D/E (face-centred) components.
constexpr bool is_face_component(Component c) {
  return family_of(c) == FieldFamily::D || family_of(c) == FieldFamily::E;
}

std::string_view component_name(Component c);
Component parse_component(std::string_view name);

struct Index3 {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

using Vec3 = std::array<double, 3>;

/// Uniform staggered lattice: cell counts, spacings, per-axis boundary kinds
/// and the physical coordinate of vertex (0,0,0). Cells are linearised with x
/// fastest, then y, then z.
class YeeGrid {
 public:
  YeeGrid(std::array<int, 3> dims, Vec3 spacing,
          std::array<AxisBoundary, 3> boundaries, Vec3 origin = {0.0, 0.0, 0.0});

  int n(int axis) const { return dims_[axis]; }
  int nx() const { return dims_[0]; }
  int ny() const { return dims_[1]; }
  int nz() const { return dims_[2]; }
  const std::array<int, 3>& dims() const { return dims_; }
  double spacing(int axis) const { return spacing_[axis]; }
  const Vec3& spacings() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  const AxisBoundary& boundary(int axis) const { return boundaries_[axis]; }
  const std::array<AxisBoundary, 3>& boundaries() const { return boundaries_; }
  bool all_periodic() const;
  double min_spacing() const;
  double cell_volume() const { return spacing_[0] * spacing_[1] * spacing_[2]; }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }
  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  std::size_t linear(const Index3& c) const { return linear(c.i, c.j, c.k); }
  Index3 unlinear(std::size_t idx) const;
  bool contains(const Index3& c) const;

  /// Physical coordinate of vertex index v along an axis (v may be fractional).
  double coordinate(int axis, double v) const { return origin_[axis] + v * spacing_[axis]; }
  Vec3 cell_center(const Index3& c) const;

  friend bool operator==(const YeeGrid&, const YeeGrid&) = default;

 private:
  std::array<int, 3> dims_;
  Vec3 spacing_;
  std::array<AxisBoundary, 3> boundaries_;
  Vec3 origin_;
};

/// Staggering offsets (in units of the spacing) of a component inside its cell.
Vec3 staggering_offset(Component c);

/// Physical location of component c owned by cell; throws on out-of-range cells.
Vec3 field_position(const YeeGrid& grid, Component c, const Index3& cell);

/// Twelve scalar arrays sharing the grid shape. time_level counts completed
/// steps: D/E sit at t = n*dt, B/H at t = (n - 1/2)*dt.
struct FieldSet {
  std::array<std::vector<double>, kComponentCount> arrays;
  std::int64_t time_level = 0;

  FieldSet() = default;
  explicit FieldSet(std::size_t cells);

  std::vector<double>& operator[](Component c) { return arrays[static_cast<int>(c)]; }
  const std::vector<double>& operator[](Component c) const {
    return arrays[static_cast<int>(c)];
  }
  std::vector<double>& get(FieldFamily f, int axis) { return (*this)[component_of(f, axis)]; }
  const std::vector<double>& get(FieldFamily f, int axis) const {
    return (*this)[component_of(f, axis)];
  }
  std::size_t cell_count() const { return arrays[0].size(); }
  void zero();
  bool all_finite() const;
};

struct Lattice {
  YeeGrid grid;
  FieldSet fields;
};

/// Validates dims/spacings/boundaries and returns the grid with zeroed fields.
Lattice create_lattice(std::array<int, 3> dims, Vec3 spacing,
                       std::array<AxisBoundary, 3> boundaries, Vec3 origin = {0.0, 0.0, 0.0});

/// Binary snapshot of one component array: "AFDTDSNP" magic, u32 version,
/// u32 nx, ny, nz, f64 dx, dy, dz, 8-byte component name, f64 time level (in
/// steps; B/H carry the half-step offset), then nx*ny*nz little-endian f64.
void write_snapshot(const std::filesystem::path& path, const YeeGrid& grid,
                    const FieldSet& fields, Component c);

struct Snapshot {
  std::array<int, 3> dims{};
  Vec3 spacing{};
  Component component = Component::Dx;
  double time_level = 0.0;
  std::vector<double> values;
};

Snapshot read_snapshot(const std::filesystem::path& path);

/// CSV of a 2D cut through one component at a fixed index along `normal_axis`.
void write_csv_slice(const std::filesystem::path& path, const YeeGrid& grid,
                     const FieldSet& fields, Component c, int normal_axis, int index);

}  // namespace anisofdtd
