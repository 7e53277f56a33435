#include "anisofdtd/analysis.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "anisofdtd/errors.hpp"

namespace anisofdtd {

std::size_t state_size(const YeeGrid& grid) { return 6 * grid.cell_count(); }

Eigen::VectorXd pack_state(const FieldSet& fields) {
  const std::size_t n = fields.cell_count();
  Eigen::VectorXd s(6 * n);
  for (std::size_t c = 0; c < n; ++c) {
    for (int a = 0; a < 3; ++a) {
      s[3 * c + a] = fields.get(FieldFamily::D, a)[c];
      s[3 * n + 3 * c + a] = fields.get(FieldFamily::B, a)[c];
    }
  }
  return s;
}

void unpack_state(const Eigen::VectorXd& state, FieldSet& fields) {
  const std::size_t n = fields.cell_count();
  if (static_cast<std::size_t>(state.size()) != 6 * n) {
    throw InvalidInput("state vector size does not match the field set");
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (int a = 0; a < 3; ++a) {
      fields.get(FieldFamily::D, a)[c] = state[3 * c + a];
      fields.get(FieldFamily::B, a)[c] = state[3 * n + 3 * c + a];
    }
  }
}

UpdateMatrix build_update_matrix(const YeeGrid& grid, const MaterialGrid& materials,
                                 SchemeKind scheme, double dt, bool force, double cfl_factor) {
  const std::size_t dim = state_size(grid);
  if (dim > kUpdateMatrixGuard && !force) {
    std::ostringstream os;
    os << "update matrix dimension " << dim << " exceeds the guard " << kUpdateMatrixGuard
       << " (override with --force-size-guard)";
    throw GuardViolation(os.str());
  }
  for (int a = 0; a < 3; ++a) {
    const auto& b = grid.boundary(a);
    if (b.low == BoundaryKind::upml || b.high == BoundaryKind::upml) {
      throw InvalidInput("update matrix is defined for periodic and PEC boundaries only");
    }
  }
  Simulation sim(grid, materials, scheme, dt);
  UpdateMatrix out;
  out.a.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.scheme = scheme;
  out.dt = dt;
  out.cfl_factor = cfl_factor;
  out.boundaries = grid.boundaries();
  out.material_digest = materials.digest();
  const std::size_t n = grid.cell_count();
  for (std::size_t j = 0; j < dim; ++j) {
    FieldSet& f = sim.fields();
    f.zero();
    const FieldFamily fam = j < 3 * n ? FieldFamily::D : FieldFamily::B;
    const std::size_t local = j < 3 * n ? j : j - 3 * n;
    f.get(fam, static_cast<int>(local % 3))[local / 3] = 1.0;
    sim.sync_fields();
    sim.step();
    out.a.col(static_cast<Eigen::Index>(j)) = pack_state(f);
  }
  return out;
}

SpectrumReport eigen_spectrum(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidInput("eigen_spectrum needs a square matrix");
  if (!a.allFinite()) throw NumericalError("update matrix has non-finite entries");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SpectrumReport rep;
  rep.backend = "LAPACK dgeev (OpenBLAS)";
  if (n == 0) return rep;
  Eigen::MatrixXd work = a;  // column-major copy, overwritten by dgeev
  std::vector<double> wr(n), wi(n);
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(),
                                        wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw NumericalError("dgeev failed with info = " + std::to_string(info));
  }
  rep.eigenvalues.resize(n);
  for (lapack_int i = 0; i < n; ++i) {
    rep.eigenvalues[i] = {wr[i], wi[i]};
    rep.max_deviation = std::max(rep.max_deviation, std::abs(std::abs(rep.eigenvalues[i]) - 1.0));
  }
  return rep;
}

namespace {

void require_periodic(const YeeGrid& grid, const char* what) {
  if (!grid.all_periodic()) {
    throw InvalidInput(std::string(what) + " requires periodic boundaries on every axis");
  }
}

void require_flux_kind(FieldFamily kind) {
  if (kind != FieldFamily::E && kind != FieldFamily::H) {
    throw InvalidInput("material matrix kind must be E or H");
  }
}

}  // namespace

SparseMatrix probe_matrix(const YeeGrid& grid,
                          const std::function<void(ConstVec3, MutVec3)>& op) {
  const std::size_t n = grid.cell_count();
  std::array<std::vector<double>, 3> in, out;
  for (int a = 0; a < 3; ++a) {
    in[a].assign(n, 0.0);
    out[a].assign(n, 0.0);
  }
  const ConstVec3 vin{in[0].data(), in[1].data(), in[2].data()};
  const MutVec3 vout{out[0].data(), out[1].data(), out[2].data()};
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t col = 0; col < 3 * n; ++col) {
    in[col % 3][col / 3] = 1.0;
    for (auto& o : out) std::fill(o.begin(), o.end(), 0.0);
    op(vin, vout);
    for (std::size_t c = 0; c < n; ++c) {
      for (int a = 0; a < 3; ++a) {
        if (out[a][c] != 0.0) {
          trip.emplace_back(static_cast<int>(3 * c + a), static_cast<int>(col), out[a][c]);
        }
      }
    }
    in[col % 3][col / 3] = 0.0;
  }
  SparseMatrix m(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix assemble_global_material_matrix(SchemeKind scheme, FieldFamily kind,
                                             const YeeGrid& grid, const MaterialGrid& materials) {
  require_flux_kind(kind);
  require_periodic(grid, "global material matrix assembly");
  if (scheme == SchemeKind::non_averaged) return block_diagonal_matrix(kind, materials);
  const ConstitutiveOperator op(grid, materials, scheme);
  if (kind == FieldFamily::E) {
    return probe_matrix(grid, [&op](ConstVec3 d, MutVec3 e) { op.apply_e(d, e); });
  }
  return probe_matrix(grid, [&op](ConstVec3 b, MutVec3 h) { op.apply_h(b, h); });
}

SparseMatrix block_diagonal_matrix(FieldFamily kind, const MaterialGrid& materials) {
  require_flux_kind(kind);
  const std::size_t n = materials.cell_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * n);
  for (std::size_t c = 0; c < n; ++c) {
    const Tensor3& t = kind == FieldFamily::E ? materials.xi(c) : materials.zeta(c);
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        trip.emplace_back(static_cast<int>(3 * c + p), static_cast<int>(3 * c + q), t(p, q));
  }
  SparseMatrix m(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

std::vector<SparseMatrix> vertex_permutations(FieldFamily kind, const YeeGrid& grid) {
  require_flux_kind(kind);
  require_periodic(grid, "vertex permutations");
  const std::size_t n = grid.cell_count();
  const int nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  std::vector<SparseMatrix> perms;
  for (int m = 0; m < 8; ++m) {
    const int a = m & 1, b = (m >> 1) & 1, c = (m >> 2) & 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    for (std::size_t cell = 0; cell < n; ++cell) {
      const Index3 q = grid.unlinear(cell);
      const int ia = periodic_index(q.i + a, nx);
      const int jb = periodic_index(q.j + b, ny);
      const int kc = periodic_index(q.k + c, nz);
      std::array<std::size_t, 3> src{};
      if (kind == FieldFamily::E) {
        // faces through vertex (i+a, j+b, k+c) of the cell
        src = {grid.linear(ia, q.j, q.k), grid.linear(q.i, jb, q.k), grid.linear(q.i, q.j, kc)};
      } else {
        // edges through the same vertex
        src = {grid.linear(q.i, jb, kc), grid.linear(ia, q.j, kc), grid.linear(ia, jb, q.k)};
      }
      for (int p = 0; p < 3; ++p) {
        trip.emplace_back(static_cast<int>(3 * cell + p), static_cast<int>(3 * src[p] + p), 1.0);
      }
    }
    SparseMatrix pm(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
    pm.setFromTriplets(trip.begin(), trip.end());
    perms.push_back(std::move(pm));
  }
  return perms;
}

SparseMatrix permutation_sum_matrix(FieldFamily kind, const YeeGrid& grid,
                                    const MaterialGrid& materials) {
  const SparseMatrix blocks = block_diagonal_matrix(kind, materials);
  const auto perms = vertex_permutations(kind, grid);
  SparseMatrix sum(blocks.rows(), blocks.cols());
  for (const auto& p : perms) {
    SparseMatrix term = SparseMatrix(p.transpose()) * blocks * p;
    sum += term;
  }
  sum *= 0.125;
  return sum;
}

SparseMatrix assemble_curl_matrix(FieldFamily kind, const YeeGrid& grid) {
  const CurlOperator curl(grid);
  if (kind == FieldFamily::E) {
    return probe_matrix(grid, [&curl](ConstVec3 e, MutVec3 b) { curl.apply_ce(e, b, 1.0); });
  }
  if (kind == FieldFamily::H) {
    return probe_matrix(grid, [&curl](ConstVec3 h, MutVec3 d) { curl.apply_ch(h, d, 1.0); });
  }
  throw InvalidInput("curl matrix kind must be E (C_e) or H (C_h)");
}

GlobalSpdReport spd_check_global(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("spd_check_global needs a square matrix");
  const Eigen::MatrixXd dense(m);
  GlobalSpdReport rep;
  rep.symmetry_defect = (dense - dense.transpose()).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd sym = 0.5 * (dense + dense.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  return rep;
}

namespace {

template <class T>
RelativeErrorReport relative_error_impl(std::span<const T> test, std::span<const T> ref,
                                        std::size_t stride, double floor_fraction) {
  if (test.size() != ref.size()) throw InvalidInput("relative_error: size mismatch");
  if (stride == 0 || ref.size() % stride != 0) {
    throw InvalidInput("relative_error: sample count is not a multiple of the stride");
  }
  const std::size_t points = ref.size() / stride;
  if (points == 0) throw InvalidInput("relative_error: no samples");
  std::vector<double> mag(points), diff(points);
  double peak = 0.0;
  for (std::size_t p = 0; p < points; ++p) {
    double m2 = 0.0, d2 = 0.0;
    for (std::size_t s = 0; s < stride; ++s) {
      m2 += std::norm(ref[p * stride + s]);
      d2 += std::norm(test[p * stride + s] - ref[p * stride + s]);
    }
    mag[p] = std::sqrt(m2);
    diff[p] = std::sqrt(d2);
    peak = std::max(peak, mag[p]);
  }
  RelativeErrorReport rep;
  const double floor = floor_fraction * peak;
  double sum = 0.0;
  for (std::size_t p = 0; p < points; ++p) {
    if (!(mag[p] > floor) || mag[p] == 0.0) {
      ++rep.excluded;
      continue;
    }
    sum += diff[p] / mag[p];
    ++rep.used;
  }
  if (rep.excluded * 10 > points) {
    std::ostringstream os;
    os << "relative_error: " << rep.excluded << " of " << points
       << " reference points fall below the magnitude floor";
    throw InvalidInput(os.str());
  }
  rep.value = sum / static_cast<double>(rep.used);
  return rep;
}

}  // namespace

RelativeErrorReport relative_error(std::span<const std::complex<double>> test,
                                   std::span<const std::complex<double>> reference,
                                   std::size_t stride, double floor_fraction) {
  return relative_error_impl(test, reference, stride, floor_fraction);
}

RelativeErrorReport relative_error(std::span<const double> test, std::span<const double> reference,
                                   std::size_t stride, double floor_fraction) {
  return relative_error_impl(test, reference, stride, floor_fraction);
}

double convergence_order(std::vector<ConvergencePoint> points) {
  if (points.size() < 2) throw InvalidInput("convergence_order needs at least two points");
  for (const auto& p : points) {
    if (!(p.error > 0.0) || !(p.ppw > 0.0)) {
      throw InvalidInput("convergence_order needs positive errors and resolutions");
    }
  }
  std::sort(points.begin(), points.end(),
            [](const ConvergencePoint& a, const ConvergencePoint& b) { return a.ppw < b.ppw; });
  if (points.size() > 2 && points.front().error > 0.5) points.erase(points.begin());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(1.0 / p.ppw);
    my += std::log(p.error);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : points) {
    const double x = std::log(1.0 / p.ppw) - mx;
    sxy += x * (std::log(p.error) - my);
    sxx += x * x;
  }
  if (sxx == 0.0) throw InvalidInput("convergence_order needs distinct resolutions");
  return sxy / sxx;
}

double energy_norm(const FieldSet& fields, const MaterialGrid& materials) {
  if (fields.cell_count() != materials.cell_count()) {
    throw InvalidInput("energy_norm: field and material sizes differ");
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < fields.cell_count(); ++c) {
    const Eigen::Vector3d d(fields[Component::Dx][c], fields[Component::Dy][c],
                            fields[Component::Dz][c]);
    const Eigen::Vector3d b(fields[Component::Bx][c], fields[Component::By][c],
                            fields[Component::Bz][c]);
    sum += d.dot(materials.xi(c).matrix() * d) + b.dot(materials.zeta(c).matrix() * b);
  }
  return 0.5 * sum;
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << "re,im,abs\n" << std::setprecision(17);
  for (const auto& l : report.eigenvalues) {
    out << l.real() << ',' << l.imag() << ',' << std::abs(l) << '\n';
  }
}

void write_coo(const std::filesystem::path& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << "# " << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n' << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace anisofdtd
