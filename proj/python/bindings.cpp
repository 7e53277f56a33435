#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <cstring>

#include "anisofdtd/analysis.hpp"
#include "anisofdtd/cloak.hpp"
#include "anisofdtd/config.hpp"
#include "anisofdtd/errors.hpp"
#include "anisofdtd/solver.hpp"
#include "anisofdtd/study.hpp"

namespace py = pybind11;
using namespace anisofdtd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::array<AxisBoundary, 3> boundaries_of(const std::vector<std::string>& names) {
  if (names.size() != 3) throw InvalidInput("boundaries needs one kind per axis");
  std::array<AxisBoundary, 3> out{};
  for (int a = 0; a < 3; ++a) {
    BoundaryKind k;
    if (names[a] == "periodic") k = BoundaryKind::periodic;
    else if (names[a] == "pec") k = BoundaryKind::pec;
    else if (names[a] == "upml") k = BoundaryKind::upml;
    else throw InvalidInput("unknown boundary '" + names[a] + "'");
    out[a] = {k, k};
  }
  return out;
}

// Field arrays are exposed as (nz, ny, nx) to match the x-fastest layout.
Array field_array(const YeeGrid& g, const std::vector<double>& v) {
  Array out({g.nz(), g.ny(), g.nx()});
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

void set_field_array(const YeeGrid& g, std::vector<double>& v, const Array& a) {
  if (a.ndim() != 3 || a.shape(0) != g.nz() || a.shape(1) != g.ny() || a.shape(2) != g.nx()) {
    throw InvalidInput("field array must have shape (nz, ny, nx)");
  }
  std::memcpy(v.data(), a.data(), v.size() * sizeof(double));
}

Array tensors_array(const std::vector<Tensor3>& ts) {
  Array out({static_cast<py::ssize_t>(ts.size()), py::ssize_t{3}, py::ssize_t{3}});
  double* p = out.mutable_data();
  for (const Tensor3& t : ts) {
    const auto e = t.entries();
    std::copy(e.begin(), e.end(), p);
    p += 9;
  }
  return out;
}

std::vector<Tensor3> tensors_of(const Array& a, std::size_t n) {
  if (a.ndim() != 3 || static_cast<std::size_t>(a.shape(0)) != n || a.shape(1) != 3 || a.shape(2) != 3) {
    throw InvalidInput("tensor array must have shape (cells, 3, 3)");
  }
  std::vector<Tensor3> out(n);
  const double* p = a.data();
  for (std::size_t c = 0; c < n; ++c, p += 9) {
    std::array<double, 9> e;
    std::copy(p, p + 9, e.begin());
    out[c] = Tensor3::from_entries(e);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anisotropic FDTD solver core";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", numerical.ptr());
  py::register_exception<GuardViolation>(m, "GuardViolation", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.attr("FEMTOSECOND") = kFemtosecond;

  py::enum_<SchemeKind>(m, "Scheme")
      .value("averaged", SchemeKind::averaged)
      .value("non_averaged", SchemeKind::non_averaged);
  py::enum_<CloakKind>(m, "CloakKind")
      .value("smooth", CloakKind::smooth)
      .value("nonsmooth", CloakKind::nonsmooth);
  py::enum_<Component> comp(m, "Component");
  for (int c = 0; c < 12; ++c) {
    const auto k = static_cast<Component>(c);
    comp.value(std::string(component_name(k)).c_str(), k);
  }

  py::class_<YeeGrid>(m, "Grid")
      .def(py::init([](std::array<int, 3> dims, Vec3 spacing, std::vector<std::string> boundaries,
                       Vec3 origin) { return YeeGrid(dims, spacing, boundaries_of(boundaries), origin); }),
           py::arg("dims"), py::arg("spacing") = Vec3{1.0, 1.0, 1.0},
           py::arg("boundaries") = std::vector<std::string>{"periodic", "periodic", "periodic"},
           py::arg("origin") = Vec3{0.0, 0.0, 0.0})
      .def_property_readonly("dims", &YeeGrid::dims)
      .def_property_readonly("spacing", &YeeGrid::spacings)
      .def_property_readonly("origin", &YeeGrid::origin)
      .def_property_readonly("cell_count", &YeeGrid::cell_count)
      .def("linear", py::overload_cast<int, int, int>(&YeeGrid::linear, py::const_));

  py::class_<MaterialGrid>(m, "Materials")
      .def(py::init([](std::array<int, 3> dims, const Array& eps, const Array& mu) {
             const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
             return MaterialGrid(dims, tensors_of(eps, n), tensors_of(mu, n));
           }),
           py::arg("dims"), py::arg("eps"), py::arg("mu"))
      .def_static("vacuum", &MaterialGrid::vacuum)
      .def_static("layout",
                  [](const YeeGrid& g, const std::string& kind, double gamma, Vec3 center, double size,
                     std::uint64_t seed) {
                    LayoutSpec s;
                    if (kind == "vacuum") s.kind = LayoutKind::vacuum;
                    else if (kind == "sphere") s.kind = LayoutKind::sphere;
                    else if (kind == "cube") s.kind = LayoutKind::cube;
                    else if (kind == "random") s.kind = LayoutKind::random;
                    else throw InvalidInput("unknown layout '" + kind + "'");
                    s.gamma = gamma;
                    s.center = center;
                    s.size = size;
                    return build_layout(s, g, seed);
                  },
                  py::arg("grid"), py::arg("kind"), py::arg("gamma") = 1.0,
                  py::arg("center") = Vec3{0.0, 0.0, 0.0}, py::arg("size") = 0.0, py::arg("seed") = 1)
      .def_static("read", &read_material_grid)
      .def("write", [](const MaterialGrid& mg, const std::filesystem::path& p) { write_material_grid(p, mg); })
      .def_property_readonly("dims", &MaterialGrid::dims)
      .def_property_readonly("eps", [](const MaterialGrid& mg) { return tensors_array(mg.eps_all()); })
      .def_property_readonly("mu", [](const MaterialGrid& mg) { return tensors_array(mg.mu_all()); })
      .def("scaled", &MaterialGrid::scaled)
      .def_property_readonly("digest", &MaterialGrid::digest);

  py::class_<CloakSpec>(m, "CloakSpec")
      .def(py::init<>())
      .def_readwrite("kind", &CloakSpec::kind)
      .def_readwrite("center", &CloakSpec::center)
      .def_readwrite("n", &CloakSpec::n)
      .def_readwrite("depth", &CloakSpec::depth)
      .def_readwrite("sigma", &CloakSpec::sigma)
      .def_readwrite("r1", &CloakSpec::r1)
      .def_readwrite("r2", &CloakSpec::r2)
      .def_readwrite("r1_prime", &CloakSpec::r1_prime)
      .def_readwrite("cell_average", &CloakSpec::cell_average);
  m.def("build_cloak", [](const CloakSpec& s, const YeeGrid& g) { return build_cloak(s, g); });
  m.def("cloak_tensors", [](const CloakSpec& s, Vec3 p, double step) {
    const auto [eps, mu] = cloak_material_at(s, p, step);
    return py::make_tuple(tensors_array({eps}), tensors_array({mu}));
  }, py::arg("spec"), py::arg("point"), py::arg("step") = 1e-6);

  py::class_<PmlParams>(m, "PmlParams")
      .def(py::init<>())
      .def_readwrite("m", &PmlParams::m)
      .def_readwrite("cells", &PmlParams::n_cells)
      .def_readwrite("sigma_max", &PmlParams::sigma_max);

  py::class_<PlaneWaveSpec>(m, "PlaneWave")
      .def(py::init<>())
      .def_readwrite("amplitude", &PlaneWaveSpec::amplitude)
      .def_readwrite("wavelength", &PlaneWaveSpec::wavelength)
      .def_readwrite("axis", &PlaneWaveSpec::axis)
      .def_readwrite("direction", &PlaneWaveSpec::direction)
      .def_readwrite("plane_index", &PlaneWaveSpec::plane_index)
      .def_readwrite("polarization", &PlaneWaveSpec::polarization)
      .def_readwrite("transverse_orders", &PlaneWaveSpec::transverse_orders)
      .def_readwrite("ramp_periods", &PlaneWaveSpec::ramp_periods);

  py::class_<Simulation>(m, "Simulation")
      .def(py::init<YeeGrid, MaterialGrid, SchemeKind, double>(), py::arg("grid"), py::arg("materials"),
           py::arg("scheme") = SchemeKind::averaged, py::arg("dt"))
      .def_property_readonly("dt", &Simulation::dt)
      .def_property_readonly("time", &Simulation::time)
      .def_property_readonly("time_level", &Simulation::time_level)
      .def("step", &Simulation::step)
      .def("run", [](Simulation& s, std::int64_t n) {
             py::gil_scoped_release release;
             s.run(n);
           })
      .def("energy", &Simulation::energy)
      .def("energy_norm", [](const Simulation& s) { return energy_norm(s.fields(), s.materials()); })
      .def("field", [](const Simulation& s, Component c) { return field_array(s.grid(), s.fields()[c]); })
      .def("set_field",
           [](Simulation& s, Component c, const Array& a) { set_field_array(s.grid(), s.fields()[c], a); })
      .def("sync_fields", &Simulation::sync_fields)
      .def("enable_pml", &Simulation::enable_pml, py::arg("params") = PmlParams{})
      .def("set_plane_wave", &Simulation::set_plane_wave)
      .def("add_point_source",
           [](Simulation& s, Component c, std::array<int, 3> cell, double amplitude, double t0, double tau) {
             PointSource p;
             p.component = c;
             p.cell = {cell[0], cell[1], cell[2]};
             p.pulse = {amplitude, t0, tau};
             s.add_point_source(p);
           },
           py::arg("component"), py::arg("cell"), py::arg("amplitude") = 1.0, py::arg("t0"), py::arg("tau"))
      .def("clear_sources", &Simulation::clear_sources);

  m.def("compute_cfl", [](const YeeGrid& g, const MaterialGrid& mg, SchemeKind s) {
    const CflReport r = compute_cfl(g, mg, s);
    py::dict d;
    d["dt_max"] = r.dt_max;
    d["spectral_radius"] = r.spectral_radius;
    d["iterations"] = r.iterations;
    return d;
  });
  m.def("update_matrix",
        [](const YeeGrid& g, const MaterialGrid& mg, SchemeKind s, double dt, bool force) {
          const UpdateMatrix u = build_update_matrix(g, mg, s, dt, force);
          const Eigen::MatrixXd rm = u.a;  // column-major copy, transposed on return
          Array out({rm.rows(), rm.cols()});
          Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              out.mutable_data(), rm.rows(), rm.cols()) = rm;
          return out;
        },
        py::arg("grid"), py::arg("materials"), py::arg("scheme"), py::arg("dt"), py::arg("force") = false);
  m.def("eigenvalues", [](const Array& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw InvalidInput("matrix must be square");
    const Eigen::Index n = a.shape(0);
    const Eigen::MatrixXd mat =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a.data(), n, n);
    return eigen_spectrum(mat).eigenvalues;
  });
  m.def("relative_error",
        [](const std::vector<std::complex<double>>& test, const std::vector<std::complex<double>>& ref,
           std::size_t stride) { return relative_error(test, ref, stride).value; },
        py::arg("test"), py::arg("reference"), py::arg("stride") = 1);
  m.def("convergence_order", [](const std::vector<std::pair<double, double>>& pts) {
    std::vector<ConvergencePoint> p;
    for (const auto& [ppw, err] : pts) p.push_back({ppw, err});
    return convergence_order(p);
  });
  m.def("parse_quantity", &parse_quantity);
  m.def("normalize_config", [](const std::string& text) { return emit_config(parse_config(text)); });
}
