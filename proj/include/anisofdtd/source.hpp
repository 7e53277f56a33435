#pragma once

#include <array>

#include "anisofdtd/lattice.hpp"
#include "anisofdtd/materials.hpp"

namespace anisofdtd {

struct GaussianPulse {
  double amplitude = 1.0;
  double t0 = 0.0;
  double tau = 1.0;
};

/// amplitude * exp(-((t - t0)/tau)^2)
double gaussian_amplitude(double t, const GaussianPulse& pulse);

/// Soft source: the pulse is added to one E component of one cell after the
/// E update, leaving the rest of the update untouched.
struct PointSource {
  Component component = Component::Ex;
  Index3 cell;
  GaussianPulse pulse;

  void validate(const YeeGrid& grid) const;
};

/// Plane wave injected through a single TFSF plane normal to `axis`.
struct PlaneWaveSpec {
  double amplitude = 1.0;
  double wavelength = 0.2;
  int axis = 2;
  /// +1 or -1; the total-field region lies downstream of the plane.
  int direction = -1;
  /// Vertex index of the plane along `axis`.
  int plane_index = 0;
  /// Requested polarisation; projected onto the plane normal to k.
  Vec3 polarization{0.0, 1.0, 0.0};
  /// Transverse diffraction orders; k_t = 2 pi m / L keeps the wave periodic.
  std::array<int, 2> transverse_orders{0, 0};
  double phase = 0.0;
  /// Length of the smooth switch-on, in periods.
  double ramp_periods = 3.0;
};

/// Discrete plane wave of the leapfrog scheme in vacuum: the wavevector
/// component along the propagation axis solves the discrete dispersion
/// relation for the given dt, so the injected wave propagates without a
/// residual mismatch. Incident E is sampled at t = n dt and H at (n + 1/2) dt.
class PlaneWaveSource {
 public:
  /// Throws InvalidInput when the plane is not strictly inside the domain, the
  /// axis is periodic, the wave is evanescent, or the cells next to the plane
  /// are not vacuum.
  PlaneWaveSource(const PlaneWaveSpec& spec, const YeeGrid& grid, double dt,
                  const MaterialGrid& materials);

  const PlaneWaveSpec& spec() const { return spec_; }
  double omega() const { return omega_; }
  const Vec3& wavevector() const { return k_; }
  const Vec3& e_amplitude() const { return e0_; }
  const Vec3& h_amplitude() const { return h0_; }

  /// Smooth 0 -> 1 switch-on factor.
  double ramp(double t) const;
  /// Incident field component (E or H family) at a physical point and time.
  double incident(Component c, const Vec3& point, double t) const;

  /// TFSF corrections after the curl updates of step n (time level n).
  void correct_b(FieldSet& fields, std::int64_t n) const;
  void correct_d(FieldSet& fields, std::int64_t n) const;

 private:
  PlaneWaveSpec spec_;
  YeeGrid grid_;
  double dt_;
  double omega_;
  Vec3 k_{};
  Vec3 e0_{};
  Vec3 h0_{};
  double sign_;
};

}  // namespace anisofdtd
