#include "wsseg/random_walker.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace wsseg {

void RandomWalkerConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a finite value >= 0");
  if (!(weight_floor > 0.0 && weight_floor <= 1.0)) throw ConfigError("weight floor must lie in (0, 1]");
  if (!(solver_tol > 0.0 && solver_tol < 1.0)) throw ConfigError("solver tolerance must lie in (0, 1)");
}

std::vector<Edge> edge_weights(const GraySlice& slice, const RandomWalkerConfig& cfg) {
  cfg.validate();
  if (!is_normalized(slice.data)) throw RangeError("edge weights need intensities normalized to [0,1]");
  if (slice.size() > std::numeric_limits<std::uint32_t>::max()) throw ShapeError("slice too large");

  auto weight = [&](float gi, float gj) {
    const double d = static_cast<double>(gi) - static_cast<double>(gj);
    return std::exp(-cfg.beta * d * d) + cfg.weight_floor;
  };

  std::vector<Edge> edges;
  edges.reserve(2 * slice.size());
  for (std::size_t y = 0; y < slice.ny; ++y) {
    for (std::size_t x = 0; x < slice.nx; ++x) {
      const auto i = static_cast<std::uint32_t>(y * slice.nx + x);
      if (x + 1 < slice.nx) edges.push_back({i, i + 1, weight(slice(y, x), slice(y, x + 1))});
      if (y + 1 < slice.ny) edges.push_back({i, static_cast<std::uint32_t>(i + slice.nx), weight(slice(y, x), slice(y + 1, x))});
    }
  }
  return edges;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
    y[r] = acc;
  }
}

double CsrMatrix::at(std::size_t row, std::size_t column) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[row]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[row + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(column));
  return (it != last && *it == column) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n);
  for (std::size_t r = 0; r < n; ++r) d[r] = at(r, r);
  return d;
}

CsrMatrix assemble_laplacian(std::span<const Edge> edges, std::size_t n_pixels) {
  struct Entry {
    std::uint32_t row, col;
    double w;
  };
  std::vector<Entry> entries;
  entries.reserve(2 * edges.size());
  for (const auto& e : edges) {
    if (e.a >= n_pixels || e.b >= n_pixels) throw RangeError("edge references a pixel outside the slice");
    if (e.a == e.b) throw ConfigError("self loop at pixel " + std::to_string(e.a));
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) throw RangeError("edge weights must be finite and >= 0");
    entries.push_back({e.a, e.b, e.weight});
    entries.push_back({e.b, e.a, e.weight});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& l, const Entry& r) { return l.row != r.row ? l.row < r.row : l.col < r.col; });
  for (std::size_t k = 1; k < entries.size(); ++k)
    if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col)
      throw ConfigError("duplicate edge between pixels " + std::to_string(entries[k].row) + " and " +
                        std::to_string(entries[k].col));

  CsrMatrix m;
  m.n = n_pixels;
  m.row_ptr.assign(n_pixels + 1, 0);
  m.col.reserve(entries.size() + n_pixels);
  m.val.reserve(entries.size() + n_pixels);

  std::size_t k = 0;
  for (std::size_t r = 0; r < n_pixels; ++r) {
    const std::size_t begin = k;
    while (k < entries.size() && entries[k].row == r) ++k;
    double degree = 0.0;
    for (std::size_t j = begin; j < k; ++j) degree += entries[j].w;

    bool diag_done = false;
    for (std::size_t j = begin; j <= k; ++j) {
      if (!diag_done && (j == k || entries[j].col > r)) {
        m.col.push_back(static_cast<std::uint32_t>(r));
        m.val.push_back(degree);
        diag_done = true;
      }
      if (j < k) {
        m.col.push_back(entries[j].col);
        m.val.push_back(-entries[j].w);
      }
    }
    m.row_ptr[r + 1] = m.col.size();
  }
  return m;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x, double tol,
                            double scaled_tol, std::size_t max_iters) {
  const std::size_t n = a.n;
  if (b.size() != n || x.size() != n) throw ShapeError("conjugate gradient operand size mismatch");

  std::vector<double> inv_diag = a.diagonal();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("matrix has a non-positive diagonal entry");
    d = 1.0 / d;
  }

  CgResult result;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  auto true_residual = [&] {
    a.multiply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  };
  auto small_enough = [&] {
    result.relative_residual = std::sqrt(dot(r, r)) / b_norm;
    if (result.relative_residual > tol) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(r[i]) * inv_diag[i] > scaled_tol) return false;
    return true;
  };

  true_residual();
  // Each pass restarts from the true residual; the recursive residual drifts
  // on ill-conditioned systems, so it is never trusted for the final answer.
  while (true) {
    if (small_enough()) {
      result.converged = true;
      return result;
    }
    if (result.iterations >= max_iters) return result;

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (result.iterations < max_iters) {
      a.multiply(p, ap);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) {
        true_residual();
        result.converged = small_enough();
        return result;
      }
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      ++result.iterations;
      if (small_enough()) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    true_residual();
    if (result.iterations >= max_iters) {
      result.converged = small_enough();
      return result;
    }
  }
}

std::size_t DirichletSolution::total_iterations() const {
  return std::accumulate(iterations.begin(), iterations.end(), std::size_t{0});
}

DirichletSolution solve_dirichlet(const CsrMatrix& laplacian, std::span<const std::uint8_t> seeds,
                                  const RandomWalkerConfig& cfg) {
  cfg.validate();
  const std::size_t n = laplacian.n;
  if (seeds.size() != n) throw ShapeError("seed map size does not match the Laplacian");

  std::array<bool, kNumClasses> present{};
  std::vector<std::uint32_t> reduced(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::size_t> unseeded;
  for (std::size_t i = 0; i < n; ++i) {
    if (seeds[i] == kUnlabeled) {
      reduced[i] = static_cast<std::uint32_t>(unseeded.size());
      unseeded.push_back(i);
    } else if (is_class_label(seeds[i])) {
      present[seeds[i]] = true;
    } else {
      throw RangeError("seed label " + std::to_string(seeds[i]) + " is not a class label");
    }
  }
  const auto n_present = std::count(present.begin(), present.end(), true);
  if (n_present == 0) throw ConfigError("random walker needs at least one seed");

  DirichletSolution sol;
  sol.potentials = ProbabilityMap(n);
  auto& pot = sol.potentials;
  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] != kUnlabeled) pot(i, seeds[i]) = 1.0;

  if (n_present == 1) {
    const int only = static_cast<int>(std::find(present.begin(), present.end(), true) - present.begin());
    for (std::size_t i : unseeded) pot(i, only) = 1.0;
    return sol;
  }
  if (unseeded.empty()) return sol;

  // Reduced system over unseeded pixels, plus the seeded couplings per label.
  CsrMatrix lu;
  lu.n = unseeded.size();
  lu.row_ptr.assign(lu.n + 1, 0);
  std::array<std::vector<double>, kNumClasses> rhs;
  for (int s = 0; s < kNumClasses; ++s)
    if (present[s]) rhs[s].assign(lu.n, 0.0);
  for (std::size_t u = 0; u < lu.n; ++u) {
    const std::size_t row = unseeded[u];
    for (std::size_t k = laplacian.row_ptr[row]; k < laplacian.row_ptr[row + 1]; ++k) {
      const std::uint32_t c = laplacian.col[k];
      if (seeds[c] == kUnlabeled) {
        lu.col.push_back(reduced[c]);
        lu.val.push_back(laplacian.val[k]);
      } else {
        rhs[seeds[c]][u] -= laplacian.val[k];
      }
    }
    lu.row_ptr[u + 1] = lu.col.size();
  }

  const int implicit = present[kBackground] ? int{kBackground}
                                            : static_cast<int>(std::find(present.begin(), present.end(), true) - present.begin());
  const std::size_t limit = cfg.iteration_limit(n);
  std::vector<double> x(lu.n);
  for (int s = 0; s < kNumClasses; ++s) {
    if (!present[s] || s == implicit) continue;
    std::fill(x.begin(), x.end(), 0.0);
    const auto res = conjugate_gradient(lu, rhs[s], x, cfg.solver_tol, cfg.solver_tol * cfg.weight_floor, limit);
    sol.iterations[s] = res.iterations;
    if (!res.converged)
      throw SolverError("conjugate gradient did not converge for label " + std::to_string(s) + " within " +
                        std::to_string(limit) + " iterations (relative residual " +
                        std::to_string(res.relative_residual) + ")");
    for (std::size_t u = 0; u < lu.n; ++u) pot(unseeded[u], s) = std::clamp(x[u], 0.0, 1.0);
  }

  for (std::size_t i : unseeded) {
    double sum = 0.0;
    for (int s = 0; s < kNumClasses; ++s)
      if (s != implicit) sum += pot(i, s);
    if (sum > 1.0) {
      for (int s = 0; s < kNumClasses; ++s)
        if (s != implicit) pot(i, s) /= sum;
      pot(i, implicit) = 0.0;
    } else {
      pot(i, implicit) = 1.0 - sum;
    }
  }
  return sol;
}

LabelSlice argmax_labels(const ProbabilityMap& potentials, std::size_t ny, std::size_t nx, double tie_tol) {
  if (potentials.n_pixels != ny * nx) throw ShapeError("probability map does not match slice shape");
  LabelSlice out(ny, nx, kUnlabeled);
  for (std::size_t i = 0; i < potentials.n_pixels; ++i) {
    double best = potentials(i, 0);
    for (int s = 1; s < kNumClasses; ++s) best = std::max(best, potentials(i, s));
    for (int s = 0; s < kNumClasses; ++s) {
      if (potentials(i, s) >= best - tie_tol) {
        out.data[i] = static_cast<std::uint8_t>(s);
        break;
      }
    }
  }
  return out;
}

SlicePropagation propagate_slice(const GraySlice& slice, std::span<const SliceSeed> seeds, const RandomWalkerConfig& cfg) {
  if (seeds.empty()) throw ConfigError("propagate_slice called without scribbles");
  std::vector<std::uint8_t> seed_map(slice.size(), kUnlabeled);
  for (const auto& s : seeds) {
    if (s.y >= slice.ny || s.x >= slice.nx) throw RangeError("scribble outside the slice");
    if (!is_class_label(s.label)) throw RangeError("scribble label must be 0..3");
    auto& cell = seed_map[s.y * slice.nx + s.x];
    if (cell != kUnlabeled && cell != s.label)
      throw ConfigError("conflicting scribbles at (" + std::to_string(s.y) + "," + std::to_string(s.x) + ")");
    cell = s.label;
  }

  const auto edges = edge_weights(slice, cfg);
  const auto lap = assemble_laplacian(edges, slice.size());
  auto sol = solve_dirichlet(lap, seed_map, cfg);

  SlicePropagation out;
  out.labels = argmax_labels(sol.potentials, slice.ny, slice.nx, cfg.solver_tol);
  for (std::size_t i = 0; i < seed_map.size(); ++i)
    if (seed_map[i] != kUnlabeled) out.labels.data[i] = seed_map[i];
  out.iterations = sol.total_iterations();
  out.potentials = std::move(sol.potentials);
  return out;
}

std::vector<SliceSeed> seeds_on_plane(const ScribbleSet& scribbles, std::size_t z) {
  std::vector<SliceSeed> seeds;
  for (const auto& r : scribbles.on_plane(z)) seeds.push_back({r.y, r.x, r.label});
  return seeds;
}

VolumePropagation propagate_annotated_slices(const GrayVolume& vol, const ScribbleSet& scribbles,
                                             const RandomWalkerConfig& cfg, unsigned threads) {
  cfg.validate();
  scribbles.check_bounds(vol.dims());

  VolumePropagation out;
  out.labels = LabelVolume(vol.dims(), ValueKind::Label, kUnlabeled);
  out.labels.set_spacing(vol.meta().spacing);
  if (scribbles.empty()) {
    out.warnings.push_back("scribble set is empty; no plane was propagated");
    return out;
  }

  const auto planes = scribbles.annotated_planes();
  out.planes.resize(planes.size());
  std::vector<std::exception_ptr> errors(planes.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < planes.size(); k = next++) {
      try {
        const std::size_t z = planes[k];
        const auto seeds = seeds_on_plane(scribbles, z);
        auto result = propagate_slice(extract_slice(vol, z), seeds, cfg);
        std::copy(result.labels.data.begin(), result.labels.data.end(), out.labels.plane(z).begin());
        out.planes[k] = {z, seeds.size(), result.iterations};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, planes.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace wsseg
