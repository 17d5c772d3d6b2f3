#ifndef WSSEG_RANDOM_WALKER_HPP
#define WSSEG_RANDOM_WALKER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsseg/volume.hpp"

namespace wsseg {

/// Tuning knobs of the seeded random walker. Connectivity is fixed to the
/// in-plane 4-neighbourhood.
struct RandomWalkerConfig {
  /// Contrast of the edge weights exp(-beta * (g_i - g_j)^2) + weight_floor,
  /// on [0,1]-normalized intensities.
  double beta = 130.0;
  /// Added to every weight so the graph stays connected.
  double weight_floor = 1e-6;
  /// Relative residual tolerance of the conjugate gradient solves.
  double solver_tol = 1e-6;
  /// Iteration cap per solve; 0 means 10 * pixel count.
  std::size_t max_iters = 0;

  void validate() const;
  std::size_t iteration_limit(std::size_t n_pixels) const { return max_iters ? max_iters : 10 * n_pixels; }
};

/// Undirected edge between pixel indices a < b.
struct Edge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 0.0;
};

/// One weight per 4-neighbour pair. Throws RangeError if the slice is not
/// normalized to [0,1].
std::vector<Edge> edge_weights(const GraySlice& slice, const RandomWalkerConfig& cfg);

/// Compressed sparse row matrix. Column indices are sorted within each row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  double at(std::size_t row, std::size_t column) const;
  std::vector<double> diagonal() const;
};

/// Combinatorial Laplacian: L_ii = sum_j w_ij, L_ij = -w_ij. Rejects duplicate
/// pixel pairs, self loops and out-of-range indices.
CsrMatrix assemble_laplacian(std::span<const Edge> edges, std::size_t n_pixels);

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for symmetric positive definite A,
/// starting from the contents of x. Stops once ||b - Ax|| <= tol * ||b|| and
/// every row residual divided by its diagonal entry is <= scaled_tol, both
/// checked on the recomputed (not recursively updated) residual.
CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x, double tol,
                            double scaled_tol, std::size_t max_iters);

/// Per-pixel potentials for the four classes, stored pixel-major.
struct ProbabilityMap {
  std::size_t n_pixels = 0;
  std::vector<double> values;

  ProbabilityMap() = default;
  explicit ProbabilityMap(std::size_t n) : n_pixels(n), values(n * kNumClasses, 0.0) {}

  double& operator()(std::size_t pixel, int label) { return values[pixel * kNumClasses + label]; }
  double operator()(std::size_t pixel, int label) const { return values[pixel * kNumClasses + label]; }
};

struct DirichletSolution {
  ProbabilityMap potentials;
  /// CG iterations per class channel; zero for channels not solved.
  std::array<std::size_t, kNumClasses> iterations{};

  std::size_t total_iterations() const;
};

/// Solves L_U x_s = -B m_s for every seeded class but one, which is recovered
/// as the complement so the channels sum to one. Besides the relative
/// residual, each solve drives the per-pixel harmonic defect below
/// solver_tol * weight_floor: regions joined to the rest only through
/// floor-weight edges have eigenvalues of order weight_floor, and a looser
/// stop leaves their potentials visibly wrong. `seeds` holds one entry per
/// pixel, kUnlabeled where unseeded. With a single distinct seed label the
/// whole map is that label.
DirichletSolution solve_dirichlet(const CsrMatrix& laplacian, std::span<const std::uint8_t> seeds,
                                  const RandomWalkerConfig& cfg);

/// Arg-max class per pixel. Potentials within `tie_tol` of the maximum count
/// as ties and resolve to the lowest label.
LabelSlice argmax_labels(const ProbabilityMap& potentials, std::size_t ny, std::size_t nx, double tie_tol);

struct SliceSeed {
  std::size_t y = 0;
  std::size_t x = 0;
  std::uint8_t label = kBackground;
};

struct SlicePropagation {
  LabelSlice labels;
  ProbabilityMap potentials;
  std::size_t iterations = 0;
};

/// Dense labels for one plane from its scribbles.
SlicePropagation propagate_slice(const GraySlice& slice, std::span<const SliceSeed> seeds, const RandomWalkerConfig& cfg);

struct PlaneReport {
  std::size_t z = 0;
  std::size_t scribbles = 0;
  std::size_t iterations = 0;
};

struct VolumePropagation {
  LabelVolume labels;
  std::vector<PlaneReport> planes;
  std::vector<std::string> warnings;
};

/// Runs propagate_slice on every annotated plane, `threads` planes at a time
/// (0 = hardware concurrency). Planes without scribbles stay kUnlabeled.
VolumePropagation propagate_annotated_slices(const GrayVolume& vol, const ScribbleSet& scribbles,
                                             const RandomWalkerConfig& cfg, unsigned threads = 0);

std::vector<SliceSeed> seeds_on_plane(const ScribbleSet& scribbles, std::size_t z);

}  // namespace wsseg

#endif  // WSSEG_RANDOM_WALKER_HPP
