#include "anisofdtd/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "anisofdtd/boundary.hpp"

namespace anisofdtd {
namespace {

enum class Dim { none, length, time };

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) throw ConfigError("config: " + msg);
  throw ConfigError("config line " + std::to_string(m.line + 1) + ", column " +
                    std::to_string(m.column + 1) + ": " + msg);
}

void check_keys(const YAML::Node& node, const std::string& block,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(node, "'" + block + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + block);
  }
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  return node.Scalar();
}

struct Quantity {
  double value = 0.0;
  std::string unit;
};

Quantity split_quantity(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) throw ConfigError("not a number: '" + text + "'");
  std::string unit(end);
  const auto first = unit.find_first_not_of(" \t");
  unit = first == std::string::npos ? "" : unit.substr(first, unit.find_last_not_of(" \t") - first + 1);
  if (!std::isfinite(v)) throw ConfigError("non-finite value: '" + text + "'");
  return {v, unit};
}

double convert(const Quantity& q, Dim dim) {
  if (q.unit.empty()) return q.value;
  if (dim == Dim::length) {
    if (q.unit == "nm") return q.value * 1e-3;
    if (q.unit == "um") return q.value;
  }
  if (dim == Dim::time && q.unit == "fs") return q.value * kFemtosecond;
  throw ConfigError("unit '" + q.unit + "' not allowed here");
}

double number(const YAML::Node& node, const std::string& what, Dim dim = Dim::none) {
  const std::string s = scalar(node, what);
  try {
    return convert(split_quantity(s), dim);
  } catch (const InvalidInput& e) {
    fail(node, what + ": " + e.what());
  }
}

std::int64_t integer(const YAML::Node& node, const std::string& what) {
  const std::string s = scalar(node, what);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') fail(node, what + " must be an integer, got '" + s + "'");
  return v;
}

bool boolean(const YAML::Node& node, const std::string& what) {
  bool b = false;
  if (!YAML::convert<bool>::decode(node, b)) fail(node, what + " must be true or false");
  return b;
}

Vec3 vec3(const YAML::Node& node, const std::string& what, Dim dim, bool broadcast = false) {
  if (broadcast && node.IsScalar()) {
    const double v = number(node, what, dim);
    return {v, v, v};
  }
  if (!node.IsSequence() || node.size() != 3) fail(node, what + " must be a list of 3 values");
  return {number(node[0], what, dim), number(node[1], what, dim), number(node[2], what, dim)};
}

Index3 index3(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() != 3) fail(node, what + " must be a list of 3 integers");
  return {static_cast<int>(integer(node[0], what)), static_cast<int>(integer(node[1], what)),
          static_cast<int>(integer(node[2], what))};
}

Component component(const YAML::Node& node) {
  try {
    return parse_component(scalar(node, "component"));
  } catch (const InvalidInput& e) {
    fail(node, e.what());
  }
}

BoundaryKind boundary_kind(const YAML::Node& node) {
  const std::string s = scalar(node, "boundary");
  if (s == "periodic") return BoundaryKind::periodic;
  if (s == "pec") return BoundaryKind::pec;
  if (s == "upml" || s == "pml") return BoundaryKind::upml;
  fail(node, "unknown boundary '" + s + "' (periodic, pec, upml)");
}

std::string_view boundary_name(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::periodic: return "periodic";
    case BoundaryKind::pec: return "pec";
    case BoundaryKind::upml: return "upml";
  }
  return "?";
}

GridConfig parse_grid(const YAML::Node& n) {
  check_keys(n, "grid", {"dims", "spacing", "origin", "boundaries"});
  GridConfig g;
  if (!n["dims"]) fail(n, "grid needs 'dims'");
  const Index3 d = index3(n["dims"], "grid.dims");
  g.dims = {d.i, d.j, d.k};
  for (int a = 0; a < 3; ++a) {
    if (g.dims[a] < 1) fail(n["dims"], "grid.dims must be positive");
  }
  if (n["spacing"]) {
    g.spacing = vec3(n["spacing"], "grid.spacing", Dim::length, true);
    for (double s : g.spacing) {
      if (!(s > 0.0)) fail(n["spacing"], "grid.spacing must be positive");
    }
  }
  if (n["origin"]) g.origin = vec3(n["origin"], "grid.origin", Dim::length);
  if (const auto b = n["boundaries"]) {
    check_keys(b, "grid.boundaries", {"x", "y", "z"});
    const char* names[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
      const auto v = b[names[a]];
      if (!v) continue;
      if (v.IsSequence()) {
        if (v.size() != 2) fail(v, "boundary list must be [low, high]");
        g.boundaries[a] = {boundary_kind(v[0]), boundary_kind(v[1])};
      } else {
        const BoundaryKind k = boundary_kind(v);
        g.boundaries[a] = {k, k};
      }
      if ((g.boundaries[a].low == BoundaryKind::periodic) !=
          (g.boundaries[a].high == BoundaryKind::periodic)) {
        fail(v, "periodic must apply to both sides of an axis");
      }
    }
  }
  return g;
}

LayoutConfig parse_layout(const YAML::Node& n) {
  check_keys(n, "material.layout", {"kind", "gamma", "center", "size", "weights"});
  LayoutConfig l;
  if (n["kind"]) {
    const std::string k = scalar(n["kind"], "layout kind");
    if (k == "vacuum") {
      l.kind = LayoutKind::vacuum;
    } else if (k == "sphere") {
      l.kind = LayoutKind::sphere;
    } else if (k == "cube") {
      l.kind = LayoutKind::cube;
    } else if (k == "random") {
      l.kind = LayoutKind::random;
    } else {
      fail(n["kind"], "unknown layout '" + k + "' (vacuum, sphere, cube, random)");
    }
  }
  if (n["gamma"]) {
    l.gamma = number(n["gamma"], "gamma");
    if (!(l.gamma > 0.0)) fail(n["gamma"], "gamma must be positive");
  }
  if (n["center"]) l.center = vec3(n["center"], "layout.center", Dim::none);
  if (n["size"]) l.size = number(n["size"], "layout.size");
  if (const auto w = n["weights"]) {
    if (!w.IsSequence() || w.size() != 4) fail(w, "layout.weights must be a list of 4 values");
    double total = 0.0;
    for (int q = 0; q < 4; ++q) {
      l.weights[q] = number(w[q], "layout.weights");
      if (l.weights[q] < 0.0) fail(w[q], "layout.weights must be non-negative");
      total += l.weights[q];
    }
    if (!(total > 0.0)) fail(w, "layout.weights must not all be zero");
  }
  return l;
}

CloakKind cloak_kind(const YAML::Node& node) {
  const std::string k = scalar(node, "cloak kind");
  if (k == "smooth") return CloakKind::smooth;
  if (k == "nonsmooth") return CloakKind::nonsmooth;
  fail(node, "unknown cloak kind '" + k + "' (smooth, nonsmooth)");
}

CloakConfig parse_cloak(const YAML::Node& n) {
  check_keys(n, "material.cloak",
             {"kind", "center", "n", "depth", "sigma", "r1", "r2", "r1_prime", "cell_average"});
  CloakConfig c;
  if (n["kind"]) c.kind = cloak_kind(n["kind"]);
  if (n["center"]) c.center = vec3(n["center"], "cloak.center", Dim::length);
  if (n["n"]) c.n = number(n["n"], "cloak.n");
  if (n["depth"]) c.depth = number(n["depth"], "cloak.depth");
  if (n["sigma"]) c.sigma = number(n["sigma"], "cloak.sigma", Dim::length);
  if (n["r1"]) c.r1 = number(n["r1"], "cloak.r1", Dim::length);
  if (n["r2"]) c.r2 = number(n["r2"], "cloak.r2", Dim::length);
  if (n["r1_prime"]) c.r1_prime = number(n["r1_prime"], "cloak.r1_prime", Dim::length);
  if (n["cell_average"]) c.cell_average = boolean(n["cell_average"], "cloak.cell_average");
  CloakSpec probe;
  probe.kind = c.kind;
  probe.n = c.n;
  probe.depth = c.depth;
  probe.sigma = c.sigma;
  probe.r1 = c.r1;
  probe.r2 = c.r2;
  probe.r1_prime = c.r1_prime;
  try {
    probe.validate();
  } catch (const InvalidInput& e) {
    fail(n, e.what());
  }
  return c;
}

MaterialConfig parse_material(const YAML::Node& n) {
  check_keys(n, "material", {"layout", "file", "cloak"});
  MaterialConfig m;
  int count = 0;
  if (n["layout"]) {
    m.layout = parse_layout(n["layout"]);
    ++count;
  }
  if (n["file"]) {
    m.file = scalar(n["file"], "material.file");
    ++count;
  }
  if (n["cloak"]) {
    m.cloak = parse_cloak(n["cloak"]);
    ++count;
  }
  if (count != 1) fail(n, "material needs exactly one of layout, file, cloak");
  return m;
}

PmlConfig parse_pml(const YAML::Node& n) {
  check_keys(n, "pml", {"m", "cells", "sigma_max", "kappa_max"});
  PmlConfig p;
  if (n["m"]) p.m = static_cast<int>(integer(n["m"], "pml.m"));
  if (n["cells"]) p.cells = static_cast<int>(integer(n["cells"], "pml.cells"));
  if (n["sigma_max"]) p.sigma_max = number(n["sigma_max"], "pml.sigma_max");
  if (n["kappa_max"]) p.kappa_max = number(n["kappa_max"], "pml.kappa_max");
  if (p.m < 0) fail(n["m"], "pml.m must be non-negative");
  if (p.cells < 1) fail(n["cells"] ? n["cells"] : n, "pml.cells must be at least 1");
  if (p.kappa_max < 1.0) fail(n["kappa_max"], "pml.kappa_max must be at least 1");
  if (p.sigma_max && *p.sigma_max < 0.0) fail(n["sigma_max"], "pml.sigma_max must be >= 0");
  return p;
}

PointSourceConfig parse_point(const YAML::Node& n) {
  check_keys(n, "point source", {"component", "cell", "amplitude", "t0", "tau"});
  PointSourceConfig p;
  if (!n["component"] || !n["cell"]) fail(n, "point source needs 'component' and 'cell'");
  p.component = component(n["component"]);
  if (!is_face_component(p.component) || family_of(p.component) != FieldFamily::E) {
    fail(n["component"], "point sources drive an E component (Ex, Ey, Ez)");
  }
  p.cell = index3(n["cell"], "point source cell");
  if (n["amplitude"]) p.amplitude = number(n["amplitude"], "amplitude");
  if (n["t0"]) p.t0 = number(n["t0"], "t0", Dim::time);
  if (n["tau"]) p.tau = number(n["tau"], "tau", Dim::time);
  if (!(p.tau > 0.0)) fail(n["tau"] ? n["tau"] : n, "tau must be positive");
  return p;
}

PlaneWaveConfig parse_plane(const YAML::Node& n) {
  check_keys(n, "plane wave",
             {"amplitude", "wavelength", "axis", "direction", "plane_index", "polarization",
              "transverse_orders", "ramp_periods"});
  PlaneWaveConfig p;
  if (n["amplitude"]) p.amplitude = number(n["amplitude"], "amplitude");
  if (n["wavelength"]) p.wavelength = number(n["wavelength"], "wavelength", Dim::length);
  if (!(p.wavelength > 0.0)) fail(n["wavelength"], "wavelength must be positive");
  if (n["axis"]) {
    const std::string a = scalar(n["axis"], "axis");
    if (a == "x" || a == "0") {
      p.axis = 0;
    } else if (a == "y" || a == "1") {
      p.axis = 1;
    } else if (a == "z" || a == "2") {
      p.axis = 2;
    } else {
      fail(n["axis"], "axis must be x, y or z");
    }
  }
  if (n["direction"]) {
    p.direction = static_cast<int>(integer(n["direction"], "direction"));
    if (p.direction != 1 && p.direction != -1) fail(n["direction"], "direction must be +1 or -1");
  }
  if (!n["plane_index"]) fail(n, "plane wave needs 'plane_index'");
  p.plane_index = static_cast<int>(integer(n["plane_index"], "plane_index"));
  if (n["polarization"]) p.polarization = vec3(n["polarization"], "polarization", Dim::none);
  if (const auto t = n["transverse_orders"]) {
    if (!t.IsSequence() || t.size() != 2) fail(t, "transverse_orders must be a list of 2 integers");
    p.transverse_orders = {static_cast<int>(integer(t[0], "transverse_orders")),
                           static_cast<int>(integer(t[1], "transverse_orders"))};
  }
  if (n["ramp_periods"]) p.ramp_periods = number(n["ramp_periods"], "ramp_periods");
  return p;
}

BoxConfig parse_box(const YAML::Node& n, const std::string& what) {
  check_keys(n, what, {"lo", "hi"});
  if (!n["lo"] || !n["hi"]) fail(n, what + " needs 'lo' and 'hi'");
  BoxConfig b{vec3(n["lo"], what + ".lo", Dim::length), vec3(n["hi"], what + ".hi", Dim::length)};
  for (int a = 0; a < 3; ++a) {
    if (b.hi[a] < b.lo[a]) fail(n, what + ": hi must not be below lo");
  }
  return b;
}

OutputConfig parse_outputs(const YAML::Node& n) {
  check_keys(n, "outputs",
             {"directory", "energy_every", "snapshot_every", "snapshot_components", "probes",
              "sampling_box"});
  OutputConfig o;
  if (n["directory"]) o.directory = scalar(n["directory"], "outputs.directory");
  if (n["energy_every"]) o.energy_every = static_cast<int>(integer(n["energy_every"], "energy_every"));
  if (n["snapshot_every"]) {
    o.snapshot_every = static_cast<int>(integer(n["snapshot_every"], "snapshot_every"));
  }
  if (o.energy_every < 0 || o.snapshot_every < 0) fail(n, "output cadences must be >= 0");
  if (const auto s = n["snapshot_components"]) {
    if (!s.IsSequence()) fail(s, "snapshot_components must be a list");
    o.snapshot_components.clear();
    for (const auto& c : s) o.snapshot_components.push_back(component(c));
  }
  if (const auto p = n["probes"]) {
    if (!p.IsSequence()) fail(p, "probes must be a list");
    for (const auto& q : p) {
      check_keys(q, "probe", {"component", "cell"});
      if (!q["component"] || !q["cell"]) fail(q, "probe needs 'component' and 'cell'");
      o.probes.push_back({component(q["component"]), index3(q["cell"], "probe cell")});
    }
  }
  if (n["sampling_box"]) o.sampling_box = parse_box(n["sampling_box"], "sampling_box");
  return o;
}

ConvergenceConfig parse_convergence(const YAML::Node& n) {
  check_keys(n, "convergence",
             {"ppw", "cases", "wavelength", "domain", "cloak_center", "plane_height", "box",
              "settle_periods", "dft_periods", "ramp_periods"});
  ConvergenceConfig c;
  if (const auto p = n["ppw"]) {
    if (!p.IsSequence()) fail(p, "convergence.ppw must be a list");
    c.ppw.clear();
    for (const auto& v : p) {
      c.ppw.push_back(number(v, "ppw"));
      if (!(c.ppw.back() > 0.0)) fail(v, "ppw must be positive");
    }
  }
  if (c.ppw.size() < 3) fail(n, "convergence needs at least 3 resolutions");
  if (const auto k = n["cases"]) {
    if (!k.IsSequence()) fail(k, "convergence.cases must be a list");
    for (const auto& v : k) {
      try {
        c.cases.push_back(parse_case_label(scalar(v, "case")));
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidInput& e) {
        fail(v, e.what());
      }
    }
  }
  if (n["wavelength"]) c.wavelength = number(n["wavelength"], "wavelength", Dim::length);
  if (n["domain"]) c.domain = vec3(n["domain"], "domain", Dim::length);
  if (n["cloak_center"]) c.cloak_center = vec3(n["cloak_center"], "cloak_center", Dim::length);
  if (n["plane_height"]) c.plane_height = number(n["plane_height"], "plane_height", Dim::length);
  if (n["box"]) c.box = parse_box(n["box"], "convergence.box");
  if (n["settle_periods"]) {
    c.settle_periods = static_cast<int>(integer(n["settle_periods"], "settle_periods"));
  }
  if (n["dft_periods"]) c.dft_periods = static_cast<int>(integer(n["dft_periods"], "dft_periods"));
  if (n["ramp_periods"]) c.ramp_periods = number(n["ramp_periods"], "ramp_periods");
  if (c.settle_periods < 0 || c.dft_periods < 1 || c.ramp_periods < 0.0) {
    fail(n, "invalid period counts");
  }
  return c;
}

RunConfig parse_root(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  check_keys(root, "config",
             {"grid", "material", "scheme", "cfl_factor", "dt", "steps", "seed", "pml", "sources",
              "outputs", "convergence"});
  RunConfig c;
  if (root["grid"]) c.grid = parse_grid(root["grid"]);
  if (root["material"]) c.material = parse_material(root["material"]);
  if (const auto s = root["scheme"]) {
    try {
      c.scheme = parse_scheme(scalar(s, "scheme"));
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidInput& e) {
      fail(s, e.what());
    }
  }
  if (root["cfl_factor"]) {
    c.cfl_factor = number(root["cfl_factor"], "cfl_factor");
    if (!(*c.cfl_factor > 0.0 && *c.cfl_factor <= 1.0)) {
      fail(root["cfl_factor"], "cfl_factor must lie in (0, 1]");
    }
  }
  if (root["dt"]) {
    c.dt = number(root["dt"], "dt", Dim::time);
    if (!(*c.dt > 0.0)) fail(root["dt"], "dt must be positive");
  }
  if (c.cfl_factor && c.dt) fail(root["dt"], "give either cfl_factor or dt, not both");
  if (root["steps"]) {
    c.steps = integer(root["steps"], "steps");
    if (c.steps < 0) fail(root["steps"], "steps must be >= 0");
  }
  if (root["seed"]) {
    const std::int64_t s = integer(root["seed"], "seed");
    if (s < 0) fail(root["seed"], "seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (root["pml"]) c.pml = parse_pml(root["pml"]);
  if (const auto src = root["sources"]) {
    check_keys(src, "sources", {"point", "plane_wave"});
    if (const auto p = src["point"]) {
      if (!p.IsSequence()) fail(p, "sources.point must be a list");
      for (const auto& q : p) c.point_sources.push_back(parse_point(q));
    }
    if (src["plane_wave"]) c.plane_wave = parse_plane(src["plane_wave"]);
  }
  if (root["outputs"]) c.outputs = parse_outputs(root["outputs"]);
  if (root["convergence"]) c.convergence = parse_convergence(root["convergence"]);
  if (!root["material"] && !c.convergence) fail(root, "config needs a 'material' block");
  if (!root["material"]) c.material.layout = LayoutConfig{};

  bool has_upml = false;
  for (const auto& b : c.grid.boundaries) {
    has_upml = has_upml || b.low == BoundaryKind::upml || b.high == BoundaryKind::upml;
  }
  if (has_upml && !c.pml) c.pml = PmlConfig{};
  if (!has_upml && c.pml && root["pml"]) fail(root["pml"], "pml block given but no upml boundary");
  return c;
}

void emit_vec(YAML::Emitter& out, const Vec3& v) {
  out << YAML::Flow << YAML::BeginSeq << v[0] << v[1] << v[2] << YAML::EndSeq;
}

void emit_index(YAML::Emitter& out, const Index3& v) {
  out << YAML::Flow << YAML::BeginSeq << v.i << v.j << v.k << YAML::EndSeq;
}

void emit_box(YAML::Emitter& out, const BoxConfig& b) {
  out << YAML::BeginMap << YAML::Key << "lo" << YAML::Value;
  emit_vec(out, b.lo);
  out << YAML::Key << "hi" << YAML::Value;
  emit_vec(out, b.hi);
  out << YAML::EndMap;
}

const char* layout_name(LayoutKind k) {
  switch (k) {
    case LayoutKind::vacuum: return "vacuum";
    case LayoutKind::sphere: return "sphere";
    case LayoutKind::cube: return "cube";
    case LayoutKind::random: return "random";
  }
  return "?";
}

}  // namespace

double parse_quantity(const std::string& text) {
  const Quantity q = split_quantity(text);
  if (q.unit.empty()) return q.value;
  if (q.unit == "fs") return convert(q, Dim::time);
  return convert(q, Dim::length);
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return parse_root(root);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dims" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.grid.dims[0]
      << c.grid.dims[1] << c.grid.dims[2] << YAML::EndSeq;
  out << YAML::Key << "spacing" << YAML::Value;
  emit_vec(out, c.grid.spacing);
  out << YAML::Key << "origin" << YAML::Value;
  emit_vec(out, c.grid.origin);
  out << YAML::Key << "boundaries" << YAML::Value << YAML::BeginMap;
  const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    out << YAML::Key << names[a] << YAML::Value << YAML::Flow << YAML::BeginSeq
        << std::string(boundary_name(c.grid.boundaries[a].low))
        << std::string(boundary_name(c.grid.boundaries[a].high)) << YAML::EndSeq;
  }
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "material" << YAML::Value << YAML::BeginMap;
  if (const auto& l = c.material.layout) {
    out << YAML::Key << "layout" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << layout_name(l->kind);
    out << YAML::Key << "gamma" << YAML::Value << l->gamma;
    if (l->center) {
      out << YAML::Key << "center" << YAML::Value;
      emit_vec(out, *l->center);
    }
    out << YAML::Key << "size" << YAML::Value << l->size;
    out << YAML::Key << "weights" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double w : l->weights) out << w;
    out << YAML::EndSeq << YAML::EndMap;
  }
  if (c.material.file) out << YAML::Key << "file" << YAML::Value << *c.material.file;
  if (const auto& k = c.material.cloak) {
    out << YAML::Key << "cloak" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value
        << (k->kind == CloakKind::smooth ? "smooth" : "nonsmooth");
    if (k->center) {
      out << YAML::Key << "center" << YAML::Value;
      emit_vec(out, *k->center);
    }
    out << YAML::Key << "n" << YAML::Value << k->n;
    out << YAML::Key << "depth" << YAML::Value << k->depth;
    out << YAML::Key << "sigma" << YAML::Value << k->sigma;
    out << YAML::Key << "r1" << YAML::Value << k->r1;
    out << YAML::Key << "r2" << YAML::Value << k->r2;
    out << YAML::Key << "r1_prime" << YAML::Value << k->r1_prime;
    out << YAML::Key << "cell_average" << YAML::Value << k->cell_average;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "scheme" << YAML::Value << std::string(scheme_name(c.scheme));
  if (c.cfl_factor) out << YAML::Key << "cfl_factor" << YAML::Value << *c.cfl_factor;
  if (c.dt) out << YAML::Key << "dt" << YAML::Value << *c.dt;
  out << YAML::Key << "steps" << YAML::Value << c.steps;
  out << YAML::Key << "seed" << YAML::Value << c.seed;

  if (const auto& p = c.pml) {
    out << YAML::Key << "pml" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "m" << YAML::Value << p->m;
    out << YAML::Key << "cells" << YAML::Value << p->cells;
    if (p->sigma_max) out << YAML::Key << "sigma_max" << YAML::Value << *p->sigma_max;
    out << YAML::Key << "kappa_max" << YAML::Value << p->kappa_max;
    out << YAML::EndMap;
  }

  if (!c.point_sources.empty() || c.plane_wave) {
    out << YAML::Key << "sources" << YAML::Value << YAML::BeginMap;
    if (!c.point_sources.empty()) {
      out << YAML::Key << "point" << YAML::Value << YAML::BeginSeq;
      for (const auto& s : c.point_sources) {
        out << YAML::BeginMap;
        out << YAML::Key << "component" << YAML::Value << std::string(component_name(s.component));
        out << YAML::Key << "cell" << YAML::Value;
        emit_index(out, s.cell);
        out << YAML::Key << "amplitude" << YAML::Value << s.amplitude;
        out << YAML::Key << "t0" << YAML::Value << s.t0;
        out << YAML::Key << "tau" << YAML::Value << s.tau;
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    if (const auto& w = c.plane_wave) {
      out << YAML::Key << "plane_wave" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "amplitude" << YAML::Value << w->amplitude;
      out << YAML::Key << "wavelength" << YAML::Value << w->wavelength;
      out << YAML::Key << "axis" << YAML::Value << names[w->axis];
      out << YAML::Key << "direction" << YAML::Value << w->direction;
      out << YAML::Key << "plane_index" << YAML::Value << w->plane_index;
      out << YAML::Key << "polarization" << YAML::Value;
      emit_vec(out, w->polarization);
      out << YAML::Key << "transverse_orders" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << w->transverse_orders[0] << w->transverse_orders[1] << YAML::EndSeq;
      out << YAML::Key << "ramp_periods" << YAML::Value << w->ramp_periods;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }

  const OutputConfig& o = c.outputs;
  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << o.directory;
  out << YAML::Key << "energy_every" << YAML::Value << o.energy_every;
  out << YAML::Key << "snapshot_every" << YAML::Value << o.snapshot_every;
  out << YAML::Key << "snapshot_components" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Component s : o.snapshot_components) out << std::string(component_name(s));
  out << YAML::EndSeq;
  if (!o.probes.empty()) {
    out << YAML::Key << "probes" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : o.probes) {
      out << YAML::BeginMap << YAML::Key << "component" << YAML::Value
          << std::string(component_name(p.component)) << YAML::Key << "cell" << YAML::Value;
      emit_index(out, p.cell);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  if (o.sampling_box) {
    out << YAML::Key << "sampling_box" << YAML::Value;
    emit_box(out, *o.sampling_box);
  }
  out << YAML::EndMap;

  if (const auto& v = c.convergence) {
    out << YAML::Key << "convergence" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "ppw" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double p : v->ppw) out << p;
    out << YAML::EndSeq;
    out << YAML::Key << "cases" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& k : v->cases) out << case_label(k);
    out << YAML::EndSeq;
    out << YAML::Key << "wavelength" << YAML::Value << v->wavelength;
    out << YAML::Key << "domain" << YAML::Value;
    emit_vec(out, v->domain);
    out << YAML::Key << "cloak_center" << YAML::Value;
    emit_vec(out, v->cloak_center);
    out << YAML::Key << "plane_height" << YAML::Value << v->plane_height;
    out << YAML::Key << "box" << YAML::Value;
    emit_box(out, v->box);
    out << YAML::Key << "settle_periods" << YAML::Value << v->settle_periods;
    out << YAML::Key << "dft_periods" << YAML::Value << v->dft_periods;
    out << YAML::Key << "ramp_periods" << YAML::Value << v->ramp_periods;
    out << YAML::EndMap;
  }

  out << YAML::EndMap;
  if (!out.good()) throw Error("config emitter: " + out.GetLastError());
  return std::string(out.c_str()) + "\n";
}

YeeGrid make_grid(const RunConfig& c) {
  return YeeGrid(c.grid.dims, c.grid.spacing, c.grid.boundaries, c.grid.origin);
}

CloakSpec make_cloak_spec(const CloakConfig& c, const YeeGrid& grid) {
  CloakSpec s;
  s.kind = c.kind;
  if (c.center) {
    s.center = *c.center;
  } else {
    for (int a = 0; a < 3; ++a) s.center[a] = grid.origin()[a] + 0.5 * grid.n(a) * grid.spacing(a);
  }
  s.n = c.n;
  s.depth = c.depth;
  s.sigma = c.sigma;
  s.r1 = c.r1;
  s.r2 = c.r2;
  s.r1_prime = c.r1_prime;
  s.cell_average = c.cell_average;
  s.validate();
  return s;
}

PmlParams make_pml_params(const PmlConfig& c) {
  PmlParams p;
  p.m = c.m;
  p.n_cells = c.cells;
  p.sigma_max = c.sigma_max.value_or(-1.0);
  p.kappa_max = c.kappa_max;
  return p;
}

MaterialGrid make_materials(const RunConfig& c, const YeeGrid& grid) {
  const MaterialConfig& m = c.material;
  if (m.layout) {
    LayoutSpec s;
    s.kind = m.layout->kind;
    s.gamma = m.layout->gamma;
    s.size = m.layout->size;
    s.weights = m.layout->weights;
    if (m.layout->center) {
      s.center = *m.layout->center;
    } else {
      for (int a = 0; a < 3; ++a) s.center[a] = 0.5 * grid.n(a);
    }
    return build_layout(s, grid, c.seed);
  }
  if (m.file) {
    MaterialGrid g = read_material_grid(*m.file);
    if (g.dims() != grid.dims()) throw InvalidInput("material file dimensions differ from the grid");
    return g;
  }
  if (m.cloak) {
    std::function<bool(const Index3&)> force;
    if (c.pml) {
      const PmlProfile profile = build_pml(make_pml_params(*c.pml), grid);
      const int axis = profile.axis;
      force = [profile, axis](const Index3& q) {
        const int idx[3] = {q.i, q.j, q.k};
        return profile.cell_in_layer(idx[axis], 1);
      };
    }
    return build_cloak(make_cloak_spec(*m.cloak, grid), grid, force);
  }
  throw InvalidInput("no material specification");
}

PlaneWaveSpec make_plane_wave(const PlaneWaveConfig& c) {
  PlaneWaveSpec s;
  s.amplitude = c.amplitude;
  s.wavelength = c.wavelength;
  s.axis = c.axis;
  s.direction = c.direction;
  s.plane_index = c.plane_index;
  s.polarization = c.polarization;
  s.transverse_orders = c.transverse_orders;
  s.ramp_periods = c.ramp_periods;
  return s;
}

PointSource make_point_source(const PointSourceConfig& c) {
  PointSource s;
  s.component = c.component;
  s.cell = c.cell;
  s.pulse = {c.amplitude, c.t0, c.tau};
  return s;
}

CloakStudyConfig make_study_config(const RunConfig& c) {
  CloakStudyConfig s;
  if (c.pml) s.pml = make_pml_params(*c.pml);
  if (c.cfl_factor) s.cfl_factor = *c.cfl_factor;
  if (c.material.cloak) {
    const CloakConfig& k = *c.material.cloak;
    s.cloak.n = k.n;
    s.cloak.depth = k.depth;
    s.cloak.sigma = k.sigma;
    s.cloak.r1 = k.r1;
    s.cloak.r2 = k.r2;
    s.cloak.r1_prime = k.r1_prime;
    s.cloak.cell_average = k.cell_average;
  }
  if (const auto& v = c.convergence) {
    s.wavelength = v->wavelength;
    s.domain = v->domain;
    s.cloak.center = v->cloak_center;
    s.plane_height = v->plane_height;
    s.box = {v->box.lo, v->box.hi};
    s.settle_periods = v->settle_periods;
    s.dft_periods = v->dft_periods;
    s.ramp_periods = v->ramp_periods;
  }
  return s;
}

}  // namespace anisofdtd
