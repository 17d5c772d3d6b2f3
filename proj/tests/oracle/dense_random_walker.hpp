// Test-only reference for the random walker: builds the dense combinatorial
// Laplacian straight from pixel intensities and solves every seeded label's
// Dirichlet system by Gaussian elimination with partial pivoting in long
// double. Shares no code with the library's sparse path.
#ifndef WSSEG_TESTS_DENSE_RANDOM_WALKER_HPP
#define WSSEG_TESTS_DENSE_RANDOM_WALKER_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

inline std::vector<long double> gauss_solve(Matrix a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0L) throw std::runtime_error("singular system");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      if (f == 0.0L) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Dense Laplacian of the 4-neighbour grid with w = exp(-beta d^2) + floor.
inline Matrix dense_laplacian(const std::vector<float>& gray, std::size_t ny, std::size_t nx, double beta,
                              double floor) {
  const std::size_t n = ny * nx;
  Matrix l(n, std::vector<long double>(n, 0.0L));
  auto link = [&](std::size_t i, std::size_t j) {
    const long double d = static_cast<long double>(gray[i]) - static_cast<long double>(gray[j]);
    const long double w = std::exp(-static_cast<long double>(beta) * d * d) + floor;
    l[i][j] -= w;
    l[j][i] -= w;
    l[i][i] += w;
    l[j][j] += w;
  };
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      if (x + 1 < nx) link(y * nx + x, y * nx + x + 1);
      if (y + 1 < ny) link(y * nx + x, (y + 1) * nx + x);
    }
  return l;
}

/// potentials[pixel][label], 4 labels; seeds use 255 for "unseeded".
inline std::vector<std::vector<double>> random_walker(const std::vector<float>& gray, std::size_t ny, std::size_t nx,
                                                      const std::vector<std::uint8_t>& seeds, double beta,
                                                      double floor) {
  const std::size_t n = ny * nx;
  const auto l = dense_laplacian(gray, ny, nx, beta, floor);
  std::vector<std::size_t> free_px;
  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] == 255) free_px.push_back(i);

  std::vector<std::vector<double>> pot(n, std::vector<double>(4, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] != 255) pot[i][seeds[i]] = 1.0;
  if (free_px.empty()) return pot;

  Matrix lu(free_px.size(), std::vector<long double>(free_px.size()));
  for (std::size_t r = 0; r < free_px.size(); ++r)
    for (std::size_t c = 0; c < free_px.size(); ++c) lu[r][c] = l[free_px[r]][free_px[c]];

  for (int s = 0; s < 4; ++s) {
    std::vector<long double> rhs(free_px.size(), 0.0L);
    for (std::size_t r = 0; r < free_px.size(); ++r)
      for (std::size_t j = 0; j < n; ++j)
        if (seeds[j] == s) rhs[r] -= l[free_px[r]][j];
    const auto x = gauss_solve(lu, rhs);
    for (std::size_t r = 0; r < free_px.size(); ++r) pot[free_px[r]][s] = static_cast<double>(x[r]);
  }
  return pot;
}

}  // namespace oracle

#endif
