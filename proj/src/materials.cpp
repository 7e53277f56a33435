#include "anisofdtd/materials.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

Tensor3 Tensor3::from_symmetric(double xx, double xy, double xz, double yy, double yz,
                                double zz) {
  Eigen::Matrix3d m;
  m << xx, xy, xz, xy, yy, yz, xz, yz, zz;
  return Tensor3(m);
}

Tensor3 Tensor3::from_entries(const std::array<double, 9>& e) {
  Eigen::Matrix3d m;
  m << e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8];
  return from_matrix(m);
}

Tensor3 Tensor3::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw InvalidInput("tensor has non-finite entries");
  for (int p = 0; p < 3; ++p) {
    for (int q = p + 1; q < 3; ++q) {
      if (m(p, q) != m(q, p)) {
        std::ostringstream os;
        os << "tensor is not symmetric: a(" << p << "," << q << ")=" << m(p, q) << " vs a("
           << q << "," << p << ")=" << m(q, p);
        throw InvalidInput(os.str());
      }
    }
  }
  return Tensor3(m);
}

Tensor3 Tensor3::from_upper(const Eigen::Matrix3d& m) {
  return from_symmetric(m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2));
}

std::array<double, 9> Tensor3::entries() const {
  std::array<double, 9> e{};
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) e[3 * p + q] = m_(p, q);
  return e;
}

Tensor3 Tensor3::scaled(double s) const { return Tensor3(m_ * s); }

SpdReport check_spd(const Tensor3& t) {
  if (!t.matrix().allFinite()) return {false, std::numeric_limits<double>::quiet_NaN()};
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.matrix(), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return {lmin > 0.0, lmin};
}

Tensor3 invert_tensor(const Tensor3& t) {
  const SpdReport r = check_spd(t);
  if (!r.spd) {
    std::ostringstream os;
    os << "cannot invert non-SPD tensor (min eigenvalue " << r.min_eigenvalue << ")";
    throw InvalidInput(os.str());
  }
  const Eigen::Matrix3d& a = t.matrix();
  Eigen::Matrix3d x = a.inverse();
  // One Newton-Schulz sweep trims the cofactor rounding.
  x = x * (2.0 * Eigen::Matrix3d::Identity() - a * x);
  return Tensor3::from_upper(x);
}

Tensor3 preset_tensor(MaterialKind kind, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidInput("material contrast gamma must be positive");
  }
  const double s = std::sqrt(1.5);
  if (kind == MaterialKind::eps) {
    return Tensor3::from_symmetric(10.225 * gamma, -0.825 * gamma, -0.55 * s * gamma,
                                   10.225 * gamma, 0.55 * s * gamma, 9.95 * gamma);
  }
  return Tensor3::from_symmetric(3.75 * gamma, 0.75 * gamma, -0.5 * s * gamma, 3.75 * gamma,
                                 -0.5 * s * gamma, 3.5 * gamma);
}

MaterialGrid::MaterialGrid(std::array<int, 3> dims, std::vector<Tensor3> eps,
                           std::vector<Tensor3> mu)
    : dims_(dims), eps_(std::move(eps)), mu_(std::move(mu)) {
  const auto n = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  if (dims_[0] < 1 || dims_[1] < 1 || dims_[2] < 1 || eps_.size() != n || mu_.size() != n) {
    throw InvalidInput("material grid size does not match its dimensions");
  }
  xi_.resize(n);
  zeta_.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    try {
      xi_[c] = eps_[c].is_identity() ? Tensor3::identity() : invert_tensor(eps_[c]);
      zeta_[c] = mu_[c].is_identity() ? Tensor3::identity() : invert_tensor(mu_[c]);
    } catch (const InvalidInput& e) {
      throw InvalidInput("cell " + std::to_string(c) + ": " + e.what());
    }
  }
}

MaterialGrid MaterialGrid::vacuum(std::array<int, 3> dims) {
  const auto n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  return MaterialGrid(dims, std::vector<Tensor3>(n), std::vector<Tensor3>(n));
}

MaterialGrid MaterialGrid::scaled(double gamma) const {
  std::vector<Tensor3> e(eps_.size()), m(mu_.size());
  for (std::size_t c = 0; c < eps_.size(); ++c) {
    e[c] = eps_[c].scaled(gamma);
    m[c] = mu_[c].scaled(gamma);
  }
  return MaterialGrid(dims_, std::move(e), std::move(m));
}

std::uint64_t MaterialGrid::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t c = 0; c < eps_.size(); ++c) {
    for (double v : eps_[c].entries()) mix(v);
    for (double v : mu_[c].entries()) mix(v);
  }
  return h;
}

const std::array<double, 4>& gauss4_nodes() {
  static const std::array<double, 4> nodes = [] {
    const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    return std::array<double, 4>{0.5 * (1.0 - b), 0.5 * (1.0 - a), 0.5 * (1.0 + a),
                                 0.5 * (1.0 + b)};
  }();
  return nodes;
}

const std::array<double, 4>& gauss4_weights() {
  static const std::array<double, 4> weights = [] {
    const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
    const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
    return std::array<double, 4>{0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb};
  }();
  return weights;
}

Tensor3 average_analytic(const MaterialFunction& fn, const Index3& cell, const YeeGrid& grid) {
  if (!grid.contains(cell)) throw InvalidInput("cell outside grid");
  const auto& x = gauss4_nodes();
  const auto& w = gauss4_weights();
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (int c = 0; c < 4; ++c) {
    for (int b = 0; b < 4; ++b) {
      for (int a = 0; a < 4; ++a) {
        const Vec3 p{grid.coordinate(0, cell.i + x[a]), grid.coordinate(1, cell.j + x[b]),
                     grid.coordinate(2, cell.k + x[c])};
        const Tensor3 t = fn(p);
        const SpdReport r = check_spd(t);
        if (!r.spd) {
          std::ostringstream os;
          os << "non-SPD material sample at (" << p[0] << "," << p[1] << "," << p[2]
             << "), min eigenvalue " << r.min_eigenvalue;
          throw InvalidInput(os.str());
        }
        acc += (w[a] * w[b] * w[c]) * t.matrix();
      }
    }
  }
  return Tensor3::from_upper(acc);
}

MaterialGrid build_layout(const LayoutSpec& spec, const YeeGrid& grid, std::uint64_t seed) {
  const std::size_t n = grid.cell_count();
  std::vector<Tensor3> eps(n), mu(n);
  if (spec.kind == LayoutKind::vacuum) return MaterialGrid(grid.dims(), eps, mu);

  const Tensor3 e = preset_tensor(MaterialKind::eps, spec.gamma);
  const Tensor3 m = preset_tensor(MaterialKind::mu, spec.gamma);

  if (spec.kind == LayoutKind::sphere || spec.kind == LayoutKind::cube) {
    if (!(spec.size > 0.0)) throw InvalidInput("shape size must be positive");
    for (int a = 0; a < 3; ++a) {
      if (spec.center[a] - spec.size < 0.0 || spec.center[a] + spec.size > grid.n(a)) {
        throw InvalidInput("shape does not fit inside the grid");
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      const Index3 idx = grid.unlinear(c);
      const double dx = idx.i + 0.5 - spec.center[0];
      const double dy = idx.j + 0.5 - spec.center[1];
      const double dz = idx.k + 0.5 - spec.center[2];
      const bool inside =
          spec.kind == LayoutKind::sphere
              ? dx * dx + dy * dy + dz * dz <= spec.size * spec.size
              : std::abs(dx) <= spec.size && std::abs(dy) <= spec.size &&
                    std::abs(dz) <= spec.size;
      if (inside) {
        eps[c] = e;
        mu[c] = m;
      }
    }
    return MaterialGrid(grid.dims(), std::move(eps), std::move(mu));
  }

  // Random: each cell independently picks one of four categories.
  double total = 0.0;
  for (double wgt : spec.weights) {
    if (!(wgt >= 0.0)) throw InvalidInput("random layout weights must be non-negative");
    total += wgt;
  }
  if (!(total > 0.0)) throw InvalidInput("random layout weights sum to zero");
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < n; ++c) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    double acc = 0.0;
    int category = 3;
    for (int q = 0; q < 4; ++q) {
      acc += spec.weights[q];
      if (u < acc) {
        category = q;
        break;
      }
    }
    if (category == 0 || category == 2) eps[c] = e;
    if (category == 1 || category == 2) mu[c] = m;
  }
  return MaterialGrid(grid.dims(), std::move(eps), std::move(mu));
}

namespace {

constexpr char kMatMagic[8] = {'A', 'F', 'D', 'T', 'D', 'M', 'A', 'T'};
constexpr std::uint32_t kMatVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidInput("truncated material file");
  return v;
}

}  // namespace

void write_material_grid(const std::filesystem::path& path, const MaterialGrid& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open material file " + path.string());
  os.write(kMatMagic, sizeof(kMatMagic));
  put(os, kMatVersion);
  for (int a = 0; a < 3; ++a) put(os, static_cast<std::uint32_t>(m.dims()[a]));
  put(os, std::uint32_t{0});
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    for (double v : m.eps(c).entries()) put(os, v);
    for (double v : m.mu(c).entries()) put(os, v);
  }
  if (!os) throw NumericalError("failed writing material file " + path.string());
}

MaterialGrid read_material_grid(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open material file " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMatMagic, sizeof(magic)) != 0) {
    throw InvalidInput("not a material file: " + path.string());
  }
  if (take<std::uint32_t>(is) != kMatVersion) throw InvalidInput("unsupported material file version");
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(take<std::uint32_t>(is));
  if (take<std::uint32_t>(is) != 0) throw InvalidInput("unsupported material units flag");
  const auto n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<Tensor3> eps(n), mu(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::array<double, 9> e{}, u{};
    for (double& v : e) v = take<double>(is);
    for (double& v : u) v = take<double>(is);
    try {
      eps[c] = Tensor3::from_entries(e);
      mu[c] = Tensor3::from_entries(u);
    } catch (const InvalidInput& err) {
      throw InvalidInput("material file cell " + std::to_string(c) + ": " + err.what());
    }
  }
  return MaterialGrid(dims, std::move(eps), std::move(mu));
}

}  // namespace anisofdtd
