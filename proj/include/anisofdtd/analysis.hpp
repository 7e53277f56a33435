#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "anisofdtd/lattice.hpp"
#include "anisofdtd/materials.hpp"
#include "anisofdtd/solver.hpp"

namespace anisofdtd {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Global vectors are cell-major with interleaved components: entry
/// 3*cell + axis. The one-step state is (D, B), 6 entries per cell.
std::size_t state_size(const YeeGrid& grid);
Eigen::VectorXd pack_state(const FieldSet& fields);
void unpack_state(const Eigen::VectorXd& state, FieldSet& fields);

/// Largest dimension accepted without an explicit override (6 * 16^3).
inline constexpr std::size_t kUpdateMatrixGuard = 6 * 16 * 16 * 16;

struct UpdateMatrix {
  Eigen::MatrixXd a;
  SchemeKind scheme = SchemeKind::non_averaged;
  double dt = 0.0;
  double cfl_factor = 0.0;
  std::array<AxisBoundary, 3> boundaries{};
  std::uint64_t material_digest = 0;
};

/// Dense one-step operator: column j is step(e_j) of a source-free
/// simulation. Throws GuardViolation above kUpdateMatrixGuard unless `force`,
/// and InvalidInput for UPML boundaries (the layers carry extra state).
UpdateMatrix build_update_matrix(const YeeGrid& grid, const MaterialGrid& materials,
                                 SchemeKind scheme, double dt, bool force = false,
                                 double cfl_factor = 0.0);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  /// max | |lambda| - 1 |
  double max_deviation = 0.0;
  std::string backend;
};

/// All eigenvalues of a dense nonsymmetric matrix (LAPACK dgeev). Throws
/// NumericalError on non-finite input or solver failure.
SpectrumReport eigen_spectrum(const Eigen::MatrixXd& a);

/// Sparse matrix of a linear map on global 3-component vectors, obtained by
/// applying it to every unit vector.
SparseMatrix probe_matrix(const YeeGrid& grid,
                          const std::function<void(ConstVec3, MutVec3)>& op);

/// M_xi (kind E) or M_zeta (kind H) of a scheme, assembled by probing the
/// production constitutive operator. Periodic grids only.
SparseMatrix assemble_global_material_matrix(SchemeKind scheme, FieldFamily kind,
                                             const YeeGrid& grid, const MaterialGrid& materials);

/// Block diagonal of the per-cell xi (or zeta) tensors; 9 stored entries per
/// 3-row block.
SparseMatrix block_diagonal_matrix(FieldFamily kind, const MaterialGrid& materials);

/// The eight vertex permutations P_m: (P_m v) for a cell gathers the three
/// flux components that meet at vertex m of that cell. Periodic grids only.
std::vector<SparseMatrix> vertex_permutations(FieldFamily kind, const YeeGrid& grid);

/// (1/8) sum_m P_m^T M~ P_m
SparseMatrix permutation_sum_matrix(FieldFamily kind, const YeeGrid& grid,
                                    const MaterialGrid& materials);

/// C_e (kind E: faces -> edges) or C_h (kind H: edges -> faces).
SparseMatrix assemble_curl_matrix(FieldFamily kind, const YeeGrid& grid);

struct GlobalSpdReport {
  double symmetry_defect = 0.0;  // max |M - M^T|
  double min_eigenvalue = 0.0;   // of the symmetric part
};

/// Dense symmetric eigensolve of (M + M^T)/2; desk-scale sizes only.
GlobalSpdReport spd_check_global(const SparseMatrix& m);

struct RelativeErrorReport {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// (1/N) sum_j |E_j - E^_j| / |E_j| with E the reference. Consecutive groups
/// of `stride` entries form one sample point whose magnitude is the vector
/// norm. Points with |E_j| below floor_fraction * max_j |E_j| are skipped;
/// more than 10% skipped is an InvalidInput error.
RelativeErrorReport relative_error(std::span<const std::complex<double>> test,
                                   std::span<const std::complex<double>> reference,
                                   std::size_t stride = 1, double floor_fraction = 1e-6);
RelativeErrorReport relative_error(std::span<const double> test, std::span<const double> reference,
                                   std::size_t stride = 1, double floor_fraction = 1e-6);

struct ConvergencePoint {
  double ppw = 0.0;
  double error = 0.0;
};

/// Least-squares slope of log(error) against log(1/ppw). The coarsest point
/// is dropped when its error exceeds 0.5 and at least two points remain.
double convergence_order(std::vector<ConvergencePoint> points);

/// 1/2 sum over cells of (D.xi D + B.zeta B) with the per-cell tensors.
double energy_norm(const FieldSet& fields, const MaterialGrid& materials);

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report);
/// "row col value" lines, zero-based, after a "# rows cols nnz" header.
void write_coo(const std::filesystem::path& path, const SparseMatrix& m);

}  // namespace anisofdtd
