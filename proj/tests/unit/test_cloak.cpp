#include <doctest.h>

#include <cmath>
#include <random>

#include "anisofdtd/cloak.hpp"
#include "anisofdtd/errors.hpp"
#include "oracles.hpp"

using namespace anisofdtd;

namespace {

CloakSpec smooth_spec() {
  CloakSpec s;
  s.kind = CloakKind::smooth;
  s.center = {0.2, 0.2, 0.4};
  return s;
}

CloakSpec nonsmooth_spec() {
  CloakSpec s = smooth_spec();
  s.kind = CloakKind::nonsmooth;
  return s;
}

// Richardson-extrapolated central difference.
double richardson_derivative(const std::function<double(double)>& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

}  // namespace

TEST_SUITE("cloak") {

TEST_CASE("smooth map has the published parameters and shape") {
  const CloakSpec s = smooth_spec();
  CHECK(s.n == 3.0);
  CHECK(s.depth == 0.8);
  CHECK(s.sigma == doctest::Approx(0.080));
  CHECK(smooth_map(0.0, s) == 0.0);
  // Near the centre space is compressed by 1 - depth.
  CHECK(smooth_map(1e-4, s) / 1e-4 == doctest::Approx(0.2).epsilon(1e-6));
  // Far away the map is the identity.
  CHECK(smooth_map(0.5, s) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("smooth map derivative matches Richardson differences") {
  const CloakSpec s = smooth_spec();
  const auto f = [&s](double r) { return smooth_map(r, s); };
  for (double r : {0.01, 0.05, 0.08, 0.11, 0.16, 0.25}) {
    CHECK(smooth_map_derivative(r, s) == doctest::Approx(richardson_derivative(f, r, 1e-4)).epsilon(1e-9));
    CHECK(smooth_map_derivative(r, s) > 0.0);
  }
}

TEST_CASE("smooth map inverse is a bijection") {
  const CloakSpec s = smooth_spec();
  for (int q = 0; q <= 400; ++q) {
    const double r = 0.3 * q / 400.0;
    CHECK(smooth_map_inverse(smooth_map(r, s), s) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("non-smooth map has the published breakpoints") {
  const CloakSpec s = nonsmooth_spec();
  CHECK(s.r1 == doctest::Approx(0.008));
  CHECK(s.r2 == doctest::Approx(0.130));
  CHECK(s.r1_prime == doctest::Approx(0.040));
  CHECK(nonsmooth_map(s.r1_prime, s) == doctest::Approx(s.r1));
  CHECK(nonsmooth_map(s.r2, s) == doctest::Approx(s.r2));
  CHECK(nonsmooth_map(0.02, s) == doctest::Approx(0.004));
  CHECK(nonsmooth_map(0.2, s) == 0.2);
  // Continuous but with slope jumps at both breakpoints.
  const double e = 1e-7;
  CHECK(std::abs(nonsmooth_map(s.r1_prime + e, s) - nonsmooth_map(s.r1_prime - e, s)) < 1e-6);
  const double inner = s.r1 / s.r1_prime;
  const double shell = (s.r2 - s.r1) / (s.r2 - s.r1_prime);
  CHECK(inner == doctest::Approx(0.2));
  CHECK(shell == doctest::Approx(122.0 / 90.0));
}

TEST_CASE("spec validation") {
  CloakSpec s = smooth_spec();
  s.depth = 1.0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = nonsmooth_spec();
  s.r1_prime = 0.2;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  CHECK_THROWS_AS(smooth_map(0.1, nonsmooth_spec()), InvalidInput);
}

TEST_CASE("numerical Jacobian of an affine map is exact") {
  Eigen::Matrix3d a;
  a << 1.2, 0.3, -0.1, 0.0, 0.9, 0.4, 0.2, -0.5, 1.1;
  const SpatialMap f = [&a](const Vec3& x) {
    const Eigen::Vector3d y = a * Eigen::Vector3d(x[0], x[1], x[2]) + Eigen::Vector3d(1, 2, 3);
    return Vec3{y[0], y[1], y[2]};
  };
  const Eigen::Matrix3d j = numerical_jacobian(f, {0.3, -0.2, 0.7}, 1e-3);
  CHECK((j - a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transform_material follows the pushforward formula") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3 base = oracle::random_spd(rng);
    Eigen::Matrix3d lambda = Eigen::Matrix3d::Random() + 2.0 * Eigen::Matrix3d::Identity();
    // jacobian argument is the inverse of Lambda
    const Tensor3 t = transform_material(lambda.inverse(), base);
    const Eigen::Matrix3d expect = lambda * base.matrix() * lambda.transpose() / std::abs(lambda.determinant());
    CHECK((t.matrix() - expect).cwiseAbs().maxCoeff() < 1e-11 * expect.cwiseAbs().maxCoeff());
  }
  // A rotation leaves the identity unchanged.
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  CHECK((transform_material(rot, Tensor3::identity()).matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK_THROWS_AS(transform_material(Eigen::Matrix3d::Zero(), Tensor3::identity()), InvalidInput);
}

TEST_CASE("transform_material preserves SPD on random cases") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int spd = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Matrix3d j;
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) j(p, q) = u(rng);
    }
    if (std::abs(j.determinant()) < 1e-3) j += Eigen::Matrix3d::Identity();
    const Tensor3 base = oracle::random_spd(rng);
    const Tensor3 t = transform_material(j, base);
    if (oracle::jacobi_eigenvalues(t.matrix())[0] > 0.0) ++spd;
  }
  CHECK(spd == 1000);
}

TEST_CASE("cloak Jacobian has the analytic radial and tangential stretches") {
  const CloakSpec s = smooth_spec();
  const double r_virtual = 0.07;
  const double r_phys = smooth_map(r_virtual, s);
  const Vec3 p{s.center[0] + r_phys, s.center[1], s.center[2]};
  const Eigen::Matrix3d j = cloak_jacobian(s, p, 1e-6);
  CHECK(j(0, 0) == doctest::Approx(1.0 / smooth_map_derivative(r_virtual, s)).epsilon(1e-7));
  CHECK(j(1, 1) == doctest::Approx(r_virtual / r_phys).epsilon(1e-7));
  CHECK(j(2, 2) == doctest::Approx(r_virtual / r_phys).epsilon(1e-7));
  CHECK(std::abs(j(0, 1)) < 1e-8);

  // Non-smooth core: uniform scaling by R1/R1', so eps = (R1/R1') I.
  const CloakSpec ns = nonsmooth_spec();
  const auto [e, m] = cloak_material_at(ns, {ns.center[0] + 0.01, ns.center[1] + 0.005, ns.center[2]}, 1e-6);
  CHECK(e(0, 0) == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(std::abs(e(0, 1)) < 1e-8);
  CHECK(m == e);
}

TEST_CASE("built cloak is background away from the centre") {
  const YeeGrid g({20, 20, 40}, {0.02, 0.02, 0.02}, {});
  for (const CloakSpec& s : {smooth_spec(), nonsmooth_spec()}) {
    const MaterialGrid m = build_cloak(s, g);
    int changed = 0;
    for (std::size_t c = 0; c < m.cell_count(); ++c) {
      const Vec3 p = g.cell_center(g.unlinear(c));
      const double r = std::hypot(p[0] - 0.2, p[1] - 0.2, p[2] - 0.4);
      if (r > cloak_influence_radius(s) + 0.04) CHECK(m.is_vacuum_cell(c));
      if (!m.is_vacuum_cell(c)) {
        ++changed;
        CHECK(check_spd(m.eps(c)).spd);
        CHECK(m.eps(c) == m.mu(c));
      }
    }
    CHECK(changed > 100);
  }
}

TEST_CASE("vanishing depth gives a vacuum grid") {
  CloakSpec s = smooth_spec();
  s.depth = 0.0;
  const YeeGrid g({10, 10, 20}, {0.04, 0.04, 0.04}, {});
  const MaterialGrid m = build_cloak(s, g);
  for (std::size_t c = 0; c < m.cell_count(); ++c) CHECK(m.is_vacuum_cell(c));
}

TEST_CASE("axis cut is continuous for the smooth cloak and jumps for the other") {
  // Largest difference between neighbouring samples along x through the
  // centre; it halves under refinement only when the profile is continuous.
  auto max_step = [](const CloakSpec& s, int n) {
    const double h = 0.4 / n;
    double m = 0.0, prev = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec3 p{(i + 0.5) * h, 0.2 + 1e-4, 0.4 + 2e-4};
      const double v = cloak_material_at(s, p, 1e-6).first(1, 1);
      if (i > 0) m = std::max(m, std::abs(v - prev));
      prev = v;
    }
    return m;
  };
  const double smooth_ratio = max_step(smooth_spec(), 1600) / max_step(smooth_spec(), 800);
  const double rough_ratio = max_step(nonsmooth_spec(), 1600) / max_step(nonsmooth_spec(), 800);
  CHECK(smooth_ratio < 0.6);
  CHECK(rough_ratio > 0.8);
}

}
