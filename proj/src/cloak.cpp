#include "anisofdtd/cloak.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

namespace {

double radius_of(const Vec3& p, const Vec3& c) {
  const double dx = p[0] - c[0], dy = p[1] - c[1], dz = p[2] - c[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Vec3 radial_scale(const Vec3& p, const Vec3& c, double factor) {
  return {c[0] + (p[0] - c[0]) * factor, c[1] + (p[1] - c[1]) * factor,
          c[2] + (p[2] - c[2]) * factor};
}

void require_kind(const CloakSpec& spec, CloakKind kind) {
  if (spec.kind != kind) throw InvalidInput("cloak map called with the wrong cloak kind");
}

}  // namespace

void CloakSpec::validate() const {
  if (kind == CloakKind::smooth) {
    if (!(depth >= 0.0 && depth < 1.0)) throw InvalidInput("smooth cloak depth must lie in [0,1)");
    if (!(sigma > 0.0)) throw InvalidInput("smooth cloak sigma must be positive");
    if (!(n >= 1.0)) throw InvalidInput("smooth cloak exponent n must be >= 1");
  } else {
    if (!(r1 > 0.0 && r1 < r1_prime && r1_prime < r2)) {
      throw InvalidInput("non-smooth cloak needs 0 < R1 < R1' < R2");
    }
  }
  if (!check_spd(background_eps).spd || !check_spd(background_mu).spd) {
    throw InvalidInput("cloak background tensors must be SPD");
  }
}

double smooth_map(double r, const CloakSpec& spec) {
  require_kind(spec, CloakKind::smooth);
  if (r < 0.0) throw InvalidInput("radius must be non-negative");
  return (1.0 - spec.depth * std::exp(-std::pow(r / spec.sigma, spec.n))) * r;
}

double smooth_map_derivative(double r, const CloakSpec& spec) {
  require_kind(spec, CloakKind::smooth);
  if (r < 0.0) throw InvalidInput("radius must be non-negative");
  const double u = std::pow(r / spec.sigma, spec.n);
  return 1.0 - spec.depth * std::exp(-u) * (1.0 - spec.n * u);
}

double smooth_map_inverse(double r_prime, const CloakSpec& spec) {
  require_kind(spec, CloakKind::smooth);
  if (r_prime < 0.0) throw InvalidInput("radius must be non-negative");
  if (r_prime == 0.0) return 0.0;
  // g(r) is increasing with (1 - depth) r <= g(r) <= r.
  double lo = r_prime;
  double hi = r_prime / (1.0 - spec.depth);
  double r = r_prime;
  for (int it = 0; it < 200; ++it) {
    const double f = smooth_map(r, spec) - r_prime;
    if (f == 0.0) return r;
    if (f > 0.0) hi = r; else lo = r;
    double next = r - f / smooth_map_derivative(r, spec);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-16 * std::max(1.0, r)) return next;
    r = next;
    if (hi - lo <= 4e-16 * hi) break;
  }
  return r;
}

double nonsmooth_map(double r_prime, const CloakSpec& spec) {
  require_kind(spec, CloakKind::nonsmooth);
  if (r_prime < 0.0) throw InvalidInput("radius must be non-negative");
  if (r_prime < spec.r1_prime) return spec.r1 * r_prime / spec.r1_prime;
  if (r_prime <= spec.r2) {
    return (spec.r1 - spec.r2) / (spec.r1_prime - spec.r2) * (r_prime - spec.r1_prime) + spec.r1;
  }
  return r_prime;
}

Eigen::Matrix3d numerical_jacobian(const SpatialMap& map, const Vec3& point, double step) {
  if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  Eigen::Matrix3d jac;
  for (int q = 0; q < 3; ++q) {
    Vec3 plus = point, minus = point;
    plus[q] += step;
    minus[q] -= step;
    const Vec3 fp = map(plus);
    const Vec3 fm = map(minus);
    const double h2 = plus[q] - minus[q];
    for (int p = 0; p < 3; ++p) jac(p, q) = (fp[p] - fm[p]) / h2;
  }
  return jac;
}

Tensor3 transform_material(const Eigen::Matrix3d& jacobian, const Tensor3& base) {
  const double det = jacobian.determinant();
  const double scale = std::pow(jacobian.cwiseAbs().maxCoeff(), 3);
  if (!std::isfinite(det) || std::abs(det) <= 1e-12 * scale || scale == 0.0) {
    throw InvalidInput("singular Jacobian in material transform");
  }
  const Eigen::Matrix3d inv = jacobian.inverse();
  const Eigen::Matrix3d t = std::abs(det) * (inv * base.matrix() * inv.transpose());
  return Tensor3::from_upper(t);
}

Eigen::Matrix3d cloak_jacobian(const CloakSpec& spec, const Vec3& physical_point, double step) {
  const Vec3& c = spec.center;
  if (spec.kind == CloakKind::smooth) {
    // Forward map virtual -> physical is explicit; invert its Jacobian at the
    // virtual preimage of the physical point.
    const double rp = radius_of(physical_point, c);
    const Vec3 virt =
        rp == 0.0 ? c : radial_scale(physical_point, c, smooth_map_inverse(rp, spec) / rp);
    const SpatialMap forward = [&spec, &c](const Vec3& x) {
      const double r = radius_of(x, c);
      if (r == 0.0) return c;
      return radial_scale(x, c, smooth_map(r, spec) / r);
    };
    return numerical_jacobian(forward, virt, step).inverse();
  }

  Vec3 p = physical_point;
  const double rp = radius_of(p, c);
  for (double branch : {spec.r1_prime, spec.r2}) {
    if (std::abs(rp - branch) < step && rp > 0.0) {
      p = radial_scale(p, c, (branch - step) / rp);
      break;
    }
  }
  const SpatialMap backward = [&spec, &c](const Vec3& x) {
    const double r = radius_of(x, c);
    if (r == 0.0) return c;
    return radial_scale(x, c, nonsmooth_map(r, spec) / r);
  };
  return numerical_jacobian(backward, p, step);
}

std::pair<Tensor3, Tensor3> cloak_material_at(const CloakSpec& spec, const Vec3& point,
                                              double step) {
  const Eigen::Matrix3d jac = cloak_jacobian(spec, point, step);
  return {transform_material(jac, spec.background_eps),
          transform_material(jac, spec.background_mu)};
}

double cloak_influence_radius(const CloakSpec& spec) {
  if (spec.kind == CloakKind::nonsmooth) return spec.r2;
  if (spec.depth == 0.0) return 0.0;
  // Smallest r where depth * exp(-u) * (1 + n u) drops below 1e-17, u = (r/sigma)^n.
  double u = 1.0;
  while (spec.depth * std::exp(-u) * (1.0 + spec.n * u) > 1e-17) u *= 1.05;
  return spec.sigma * std::pow(u, 1.0 / spec.n);
}

MaterialGrid build_cloak(const CloakSpec& spec, const YeeGrid& grid,
                         const std::function<bool(const Index3&)>& force_background) {
  spec.validate();
  const double step = 1e-3 * grid.min_spacing();
  const double reach = cloak_influence_radius(spec);
  const std::size_t n = grid.cell_count();
  std::vector<Tensor3> eps(n, spec.background_eps), mu(n, spec.background_mu);
  const auto& nodes = gauss4_nodes();
  const auto& weights = gauss4_weights();

  for (std::size_t cidx = 0; cidx < n; ++cidx) {
    const Index3 cell = grid.unlinear(cidx);
    if (force_background && force_background(cell)) continue;
    // Distance from the cloak centre to the nearest point of the cell.
    double d2 = 0.0;
    const int ijk[3] = {cell.i, cell.j, cell.k};
    for (int a = 0; a < 3; ++a) {
      const double lo = grid.coordinate(a, ijk[a]);
      const double hi = grid.coordinate(a, ijk[a] + 1);
      const double q = std::clamp(spec.center[a], lo, hi) - spec.center[a];
      d2 += q * q;
    }
    if (std::sqrt(d2) >= reach) continue;

    if (!spec.cell_average) {
      auto [e, m] = cloak_material_at(spec, grid.cell_center(cell), step);
      eps[cidx] = e;
      mu[cidx] = m;
      continue;
    }
    Eigen::Matrix3d acc_e = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d acc_m = Eigen::Matrix3d::Zero();
    for (int c = 0; c < 4; ++c) {
      for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
          const Vec3 p{grid.coordinate(0, cell.i + nodes[a]), grid.coordinate(1, cell.j + nodes[b]),
                       grid.coordinate(2, cell.k + nodes[c])};
          auto [e, m] = cloak_material_at(spec, p, step);
          if (!check_spd(e).spd || !check_spd(m).spd) {
            std::ostringstream os;
            os << "cloak produced a non-SPD tensor at (" << p[0] << "," << p[1] << "," << p[2] << ")";
            throw NumericalError(os.str());
          }
          const double w = weights[a] * weights[b] * weights[c];
          acc_e += w * e.matrix();
          acc_m += w * m.matrix();
        }
      }
    }
    eps[cidx] = Tensor3::from_upper(acc_e);
    mu[cidx] = Tensor3::from_upper(acc_m);
  }
  return MaterialGrid(grid.dims(), std::move(eps), std::move(mu));
}

}  // namespace anisofdtd
