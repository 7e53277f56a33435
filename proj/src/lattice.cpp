#include "anisofdtd/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

namespace {

constexpr std::array<std::string_view, kComponentCount> kNames = {
    "Dx", "Dy", "Dz", "Ex", "Ey", "Ez", "Bx", "By", "Bz", "Hx", "Hy", "Hz"};

constexpr char kSnapshotMagic[8] = {'A', 'F', 'D', 'T', 'D', 'S', 'N', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidInput("truncated snapshot file");
  return v;
}

}  // namespace

std::string_view component_name(Component c) { return kNames[static_cast<int>(c)]; }

Component parse_component(std::string_view name) {
  for (int i = 0; i < kComponentCount; ++i) {
    if (kNames[i] == name) return static_cast<Component>(i);
  }
  throw InvalidInput("unknown field component '" + std::string(name) + "'");
}

YeeGrid::YeeGrid(std::array<int, 3> dims, Vec3 spacing,
                 std::array<AxisBoundary, 3> boundaries, Vec3 origin)
    : dims_(dims), spacing_(spacing), boundaries_(boundaries), origin_(origin) {
  static constexpr char kAxis[] = "xyz";
  for (int a = 0; a < 3; ++a) {
    if (dims_[a] < 2) {
      throw InvalidInput(std::string("grid needs at least 2 cells along ") + kAxis[a]);
    }
    if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) {
      throw InvalidInput(std::string("grid spacing along ") + kAxis[a] + " must be positive");
    }
    const bool lo_p = boundaries_[a].low == BoundaryKind::periodic;
    const bool hi_p = boundaries_[a].high == BoundaryKind::periodic;
    if (lo_p != hi_p) {
      throw InvalidInput(std::string("periodic boundary along ") + kAxis[a] +
                         " must be periodic on both faces");
    }
  }
}

bool YeeGrid::all_periodic() const {
  return std::all_of(boundaries_.begin(), boundaries_.end(),
                     [](const AxisBoundary& b) { return b.periodic(); });
}

double YeeGrid::min_spacing() const {
  return std::min({spacing_[0], spacing_[1], spacing_[2]});
}

Index3 YeeGrid::unlinear(std::size_t idx) const {
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return Index3{static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                static_cast<int>(idx / (nx * ny))};
}

bool YeeGrid::contains(const Index3& c) const {
  return c.i >= 0 && c.i < dims_[0] && c.j >= 0 && c.j < dims_[1] && c.k >= 0 &&
         c.k < dims_[2];
}

Vec3 YeeGrid::cell_center(const Index3& c) const {
  return {coordinate(0, c.i + 0.5), coordinate(1, c.j + 0.5), coordinate(2, c.k + 0.5)};
}

Vec3 staggering_offset(Component c) {
  const int a = axis_of(c);
  Vec3 off{};
  if (is_face_component(c)) {
    // Face normal to axis a: offset half a cell along the two other axes.
    off = {0.5, 0.5, 0.5};
    off[a] = 0.0;
  } else {
    // Edge parallel to axis a: offset half a cell along a only.
    off = {0.0, 0.0, 0.0};
    off[a] = 0.5;
  }
  return off;
}

Vec3 field_position(const YeeGrid& grid, Component c, const Index3& cell) {
  if (!grid.contains(cell)) {
    std::ostringstream os;
    os << "cell (" << cell.i << "," << cell.j << "," << cell.k << ") outside grid";
    throw InvalidInput(os.str());
  }
  const Vec3 off = staggering_offset(c);
  return {grid.coordinate(0, cell.i + off[0]), grid.coordinate(1, cell.j + off[1]),
          grid.coordinate(2, cell.k + off[2])};
}

FieldSet::FieldSet(std::size_t cells) {
  for (auto& a : arrays) a.assign(cells, 0.0);
}

void FieldSet::zero() {
  for (auto& a : arrays) std::fill(a.begin(), a.end(), 0.0);
  time_level = 0;
}

bool FieldSet::all_finite() const {
  for (const auto& a : arrays) {
    for (double v : a) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

Lattice create_lattice(std::array<int, 3> dims, Vec3 spacing,
                       std::array<AxisBoundary, 3> boundaries, Vec3 origin) {
  YeeGrid grid(dims, spacing, boundaries, origin);
  FieldSet fields(grid.cell_count());
  return Lattice{std::move(grid), std::move(fields)};
}

void write_snapshot(const std::filesystem::path& path, const YeeGrid& grid,
                    const FieldSet& fields, Component c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open snapshot file " + path.string());
  os.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  put(os, kSnapshotVersion);
  for (int a = 0; a < 3; ++a) put(os, static_cast<std::uint32_t>(grid.n(a)));
  for (int a = 0; a < 3; ++a) put(os, grid.spacing(a));
  char name[8] = {};
  const auto nm = component_name(c);
  std::memcpy(name, nm.data(), nm.size());
  os.write(name, sizeof(name));
  double level = static_cast<double>(fields.time_level);
  if (!is_face_component(c)) level -= 0.5;
  put(os, level);
  const auto& data = fields[c];
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!os) throw NumericalError("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open snapshot file " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) {
    throw InvalidInput("not a snapshot file: " + path.string());
  }
  if (take<std::uint32_t>(is) != kSnapshotVersion) {
    throw InvalidInput("unsupported snapshot version");
  }
  Snapshot s;
  for (int a = 0; a < 3; ++a) s.dims[a] = static_cast<int>(take<std::uint32_t>(is));
  for (int a = 0; a < 3; ++a) s.spacing[a] = take<double>(is);
  char name[9] = {};
  is.read(name, 8);
  s.component = parse_component(std::string_view(name));
  s.time_level = take<double>(is);
  const auto n = static_cast<std::size_t>(s.dims[0]) * s.dims[1] * s.dims[2];
  s.values.resize(n);
  is.read(reinterpret_cast<char*>(s.values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw InvalidInput("truncated snapshot payload");
  return s;
}

void write_csv_slice(const std::filesystem::path& path, const YeeGrid& grid,
                     const FieldSet& fields, Component c, int normal_axis, int index) {
  if (normal_axis < 0 || normal_axis > 2 || index < 0 || index >= grid.n(normal_axis)) {
    throw InvalidInput("slice index outside grid");
  }
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open " + path.string());
  const int ua = (normal_axis + 1) % 3;
  const int va = (normal_axis + 2) % 3;
  static constexpr char kAxis[] = "xyz";
  os << kAxis[ua] << ',' << kAxis[va] << ',' << component_name(c) << '\n';
  os.precision(17);
  const auto& data = fields[c];
  for (int v = 0; v < grid.n(va); ++v) {
    for (int u = 0; u < grid.n(ua); ++u) {
      std::array<int, 3> idx{};
      idx[normal_axis] = index;
      idx[ua] = u;
      idx[va] = v;
      const Index3 cell{idx[0], idx[1], idx[2]};
      const Vec3 p = field_position(grid, c, cell);
      os << p[ua] << ',' << p[va] << ',' << data[grid.linear(cell)] << '\n';
    }
  }
}

}  // namespace anisofdtd
