#include "dsf/fast_poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "dsf/errors.hpp"
#include "dsf/parallel.hpp"

namespace dsf {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralPreconditioner::SpectralPreconditioner(const Grid& grid, std::vector<double> layer_shift)
    : grid_(grid) {
  const int m = grid.cells();
  const auto lat = static_cast<std::size_t>(m - 1);
  const std::size_t modes = lat * lat;
  if (layer_shift.size() != static_cast<std::size_t>(m))
    throw AssemblyError("spectral preconditioner: one shift per layer expected");
  const double h = grid.spacing();

  std::vector<double> lambda(lat);
  for (std::size_t p = 0; p < lat; ++p)
    lambda[p] = 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(p + 1) / m);

  // Thomas factorization per mode; sub- and super-diagonals are -h.
  inv_pivot_.resize(static_cast<std::size_t>(m) * modes);
  std::vector<double> prev(modes, 0.0);
  for (int k = 0; k < m; ++k) {
    double* inv = inv_pivot_.data() + static_cast<std::size_t>(k) * modes;
    for (std::size_t q = 0; q < lat; ++q)
      for (std::size_t p = 0; p < lat; ++p) {
        const std::size_t mode = q * lat + p;
        const double lat_eig = lambda[p] + lambda[q];
        double diag = (k == 0) ? h * (0.5 * lat_eig + 1.0) : h * (lat_eig + 2.0);
        diag += layer_shift[static_cast<std::size_t>(k)];
        // pivot_k = b_k - a c'_{k-1}, c'_{k-1} = -h inv_{k-1}
        const double pivot = (k == 0) ? diag : diag - h * h * prev[mode];
        inv[mode] = 1.0 / pivot;
        prev[mode] = inv[mode];
      }
  }

  std::vector<double> scratch(modes);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_ = fftw_plan_r2r_2d(m - 1, m - 1, scratch.data(), scratch.data(), FFTW_RODFT00, FFTW_RODFT00,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_) throw AssemblyError("FFTW could not create a sine-transform plan");
}

SpectralPreconditioner::~SpectralPreconditioner() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void SpectralPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const int m = grid_.cells();
  const auto lat = static_cast<std::size_t>(m - 1);
  const std::size_t modes = lat * lat;
  const double h = grid_.spacing();
  auto plan = static_cast<fftw_plan>(plan_);
  std::copy(r.begin(), r.end(), z.begin());

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int k = 0; k < m; ++k) {
    double* layer = z.data() + static_cast<std::size_t>(k) * modes;
    fftw_execute_r2r(plan, layer, layer);
  }

  // Forward elimination, then back substitution along x3.
  for (int k = 0; k < m; ++k) {
    double* d = z.data() + static_cast<std::size_t>(k) * modes;
    const double* inv = inv_pivot_.data() + static_cast<std::size_t>(k) * modes;
    if (k == 0) {
      for (std::size_t q = 0; q < modes; ++q) d[q] *= inv[q];
    } else {
      const double* dp = d - modes;
      for (std::size_t q = 0; q < modes; ++q) d[q] = (d[q] + h * dp[q]) * inv[q];
    }
  }
  for (int k = m - 2; k >= 0; --k) {
    double* x = z.data() + static_cast<std::size_t>(k) * modes;
    const double* xn = x + modes;
    const double* inv = inv_pivot_.data() + static_cast<std::size_t>(k) * modes;
    for (std::size_t q = 0; q < modes; ++q) x[q] += h * inv[q] * xn[q];
  }

  const double scale = 1.0 / (4.0 * m * m);
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int k = 0; k < m; ++k) {
    double* layer = z.data() + static_cast<std::size_t>(k) * modes;
    fftw_execute_r2r(plan, layer, layer);
    for (std::size_t q = 0; q < modes; ++q) layer[q] *= scale;
  }
}

}  // namespace dsf
