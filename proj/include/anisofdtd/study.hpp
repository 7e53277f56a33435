#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "anisofdtd/analysis.hpp"
#include "anisofdtd/cloak.hpp"
#include "anisofdtd/solver.hpp"

namespace anisofdtd {

/// Axis-aligned box in physical coordinates.
struct SamplingBox {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{0.0, 0.0, 0.0};
  bool contains(const Vec3& p) const;
  std::string describe() const;
};

/// Plane-wave cloak experiment. Lengths in micrometres (the internal unit).
/// The domain is periodic in x and y and terminated along z by PML layers
/// placed outside the physical extent; the wave travels towards -z from a
/// TFSF plane near the top and is sampled in a box below the cloak.
struct CloakStudyConfig {
  double wavelength = 0.2;
  /// A transverse period that is a whole number of wavelengths makes a
  /// diffraction order graze the plane, and the steady state never settles.
  Vec3 domain{0.48, 0.48, 0.8};
  PmlParams pml{};
  /// Cloak shape parameters; the kind is set per case.
  CloakSpec cloak = [] {
    CloakSpec c;
    c.center = {0.24, 0.24, 0.4};
    return c;
  }();
  SamplingBox box{{0.14, 0.14, 0.05}, {0.34, 0.34, 0.15}};
  double cfl_factor = kDefaultCflFactor;
  double plane_height = 0.74;
  /// Periods simulated before the phasor accumulation starts.
  int settle_periods = 20;
  int dft_periods = 6;
  /// Switch-on length of the incident wave. Short ramps leave slowly decaying
  /// components near the cutoff of the first diffraction orders.
  double ramp_periods = 10.0;
};

/// Grid of the study at a resolution (points per vacuum wavelength).
YeeGrid study_grid(const CloakStudyConfig& cfg, double ppw);
/// z index of the TFSF plane on a study grid.
int study_plane_index(const CloakStudyConfig& cfg, const YeeGrid& grid);

/// Cells whose centre lies inside the box, in linear order.
std::vector<std::size_t> box_cells(const YeeGrid& grid, const SamplingBox& box);

/// Runs a plane-wave simulation and returns the complex amplitude (phasor at
/// the source frequency) of Ex, Ey, Ez for every sampled cell, interleaved.
/// dt must divide the period into a whole number of steps.
std::vector<std::complex<double>> plane_wave_phasors(const YeeGrid& grid,
                                                     const MaterialGrid& materials,
                                                     SchemeKind scheme, double dt,
                                                     const PlaneWaveSpec& wave,
                                                     const PmlParams& pml,
                                                     const std::vector<std::size_t>& cells,
                                                     int settle_periods, int dft_periods);

/// Largest dt <= target giving an integer number of steps per period.
double period_locked_dt(double period, double target);

struct StudyCase {
  CloakKind kind = CloakKind::smooth;
  SchemeKind scheme = SchemeKind::averaged;
  friend bool operator==(const StudyCase&, const StudyCase&) = default;
};

struct ErrorReport {
  StudyCase study;
  std::vector<ConvergencePoint> points;
  double order = 0.0;
  std::string box;
};

std::string case_label(const StudyCase& c);
/// Inverse of case_label ("smooth/averaged" etc.).
StudyCase parse_case_label(const std::string& label);

/// For each resolution: one vacuum reference run and one run per case, all
/// with the same grid and dt (the smallest stable dt over the cases, times
/// the CFL factor, locked to the period). Errors are the relative error of
/// the sampled phasors against the reference.
std::vector<ErrorReport> run_cloak_convergence(
    const CloakStudyConfig& cfg, const std::vector<double>& ppws,
    const std::vector<StudyCase>& cases,
    const std::function<void(const std::string&)>& log = {});

void write_convergence_csv(const std::filesystem::path& path, const ErrorReport& report);

/// eps/mu entries of the cells along the x axis through the cloak centre.
void write_cloak_cut_csv(const std::filesystem::path& path, const YeeGrid& grid,
                         const MaterialGrid& materials, const Vec3& center);

}  // namespace anisofdtd
