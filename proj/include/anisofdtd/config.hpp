#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anisofdtd/cloak.hpp"
#include "anisofdtd/errors.hpp"
#include "anisofdtd/lattice.hpp"
#include "anisofdtd/materials.hpp"
#include "anisofdtd/solver.hpp"
#include "anisofdtd/source.hpp"
#include "anisofdtd/study.hpp"

namespace anisofdtd {

/// Invalid configuration; the message carries "line L, column C" when known.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Internal units: lengths in micrometres, times in micrometres of light
/// travel (c = 1). Quantities written with "nm", "um" or "fs" are converted;
/// bare numbers are taken in internal units.
inline constexpr double kFemtosecond = 0.299792458;

struct GridConfig {
  std::array<int, 3> dims{8, 8, 8};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  std::array<AxisBoundary, 3> boundaries{};
  bool operator==(const GridConfig&) const = default;
};

struct LayoutConfig {
  LayoutKind kind = LayoutKind::vacuum;
  double gamma = 1.0;
  std::optional<Vec3> center;  // cell units; grid centre when absent
  double size = 0.0;
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
  bool operator==(const LayoutConfig&) const = default;
};

struct CloakConfig {
  CloakKind kind = CloakKind::smooth;
  std::optional<Vec3> center;  // physical; domain centre when absent
  double n = 3.0;
  double depth = 0.8;
  double sigma = 0.08;
  double r1 = 0.008;
  double r2 = 0.130;
  double r1_prime = 0.040;
  bool cell_average = true;
  bool operator==(const CloakConfig&) const = default;
};

/// Exactly one of the three is set.
struct MaterialConfig {
  std::optional<LayoutConfig> layout;
  std::optional<std::string> file;
  std::optional<CloakConfig> cloak;
  bool operator==(const MaterialConfig&) const = default;
};

struct PointSourceConfig {
  Component component = Component::Ex;
  Index3 cell{};
  double amplitude = 1.0;
  double t0 = 0.0;
  double tau = 1.0;
  bool operator==(const PointSourceConfig&) const = default;
};

struct PlaneWaveConfig {
  double amplitude = 1.0;
  double wavelength = 0.2;
  int axis = 2;
  int direction = -1;
  int plane_index = 0;
  Vec3 polarization{0.0, 1.0, 0.0};
  std::array<int, 2> transverse_orders{0, 0};
  double ramp_periods = 3.0;
  bool operator==(const PlaneWaveConfig&) const = default;
};

struct ProbeConfig {
  Component component = Component::Ex;
  Index3 cell{};
  bool operator==(const ProbeConfig&) const = default;
};

struct BoxConfig {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{0.0, 0.0, 0.0};
  bool operator==(const BoxConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  /// Energy trace row every N steps (0 disables the trace).
  int energy_every = 1;
  /// Binary snapshots every N steps (0 disables them).
  int snapshot_every = 0;
  std::vector<Component> snapshot_components{Component::Ez};
  std::vector<ProbeConfig> probes;
  /// Field dump of the cells in this box at the end of the run.
  std::optional<BoxConfig> sampling_box;
  bool operator==(const OutputConfig&) const = default;
};

struct PmlConfig {
  int m = 3;
  int cells = 10;
  std::optional<double> sigma_max;
  double kappa_max = 1.0;
  bool operator==(const PmlConfig&) const = default;
};

struct ConvergenceConfig {
  std::vector<double> ppw{10, 15, 20, 30};
  std::vector<StudyCase> cases;
  double wavelength = 0.2;
  Vec3 domain{0.48, 0.48, 0.8};
  Vec3 cloak_center{0.24, 0.24, 0.4};
  double plane_height = 0.74;
  BoxConfig box{{0.14, 0.14, 0.05}, {0.34, 0.34, 0.15}};
  int settle_periods = 20;
  int dft_periods = 6;
  double ramp_periods = 10.0;
  bool operator==(const ConvergenceConfig&) const = default;
};

struct RunConfig {
  GridConfig grid;
  MaterialConfig material;
  SchemeKind scheme = SchemeKind::averaged;
  std::optional<double> cfl_factor;  // default factor when neither is given
  std::optional<double> dt;
  std::int64_t steps = 0;
  std::uint64_t seed = 1;
  std::optional<PmlConfig> pml;
  std::vector<PointSourceConfig> point_sources;
  std::optional<PlaneWaveConfig> plane_wave;
  OutputConfig outputs;
  std::optional<ConvergenceConfig> convergence;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// YAML in internal units; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Physical quantity: number or "<number> <unit>" with unit nm, um or fs.
double parse_quantity(const std::string& text);

YeeGrid make_grid(const RunConfig& config);
MaterialGrid make_materials(const RunConfig& config, const YeeGrid& grid);
CloakSpec make_cloak_spec(const CloakConfig& c, const YeeGrid& grid);
PmlParams make_pml_params(const PmlConfig& c);
PlaneWaveSpec make_plane_wave(const PlaneWaveConfig& c);
PointSource make_point_source(const PointSourceConfig& c);
CloakStudyConfig make_study_config(const RunConfig& config);

}  // namespace anisofdtd
