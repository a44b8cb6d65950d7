#pragma once

// Data-parallel search kernels. Each OpenMP kernel has a serial twin with the
// same contract; tests compare the two and the benchmark times them.
//
// Ties are broken toward the smallest linear index in both versions, so the
// parallel result is identical to the serial one whatever the thread count.

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <stdexcept>
#include <vector>

#include <omp.h>

namespace eml {

/// Evenly spaced points lo, lo + step, ..., up to hi (inclusive within 1e-9 steps).
struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  double step = 1e-3;

  std::size_t size() const {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("GridAxis: need step > 0 and hi >= lo");
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  }
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct GridArgmax {
  bool found = false;
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;  // linear index x_i * ny + y_j
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

inline bool better(double v, std::size_t idx, double best_v, std::size_t best_idx, bool have) {
  if (!have) return true;
  if (v > best_v) return true;
  return v == best_v && idx < best_idx;
}

}  // namespace detail

/// Maximizes f(x, y) over the product grid. f returns NaN for points that are
/// outside the feasible set; those are skipped.
template <class F>
GridArgmax grid_argmax_serial(const GridAxis& xs, const GridAxis& ys, F&& f) {
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  GridArgmax best;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = xs.at(i);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = ys.at(j);
      const double v = f(x, y);
      if (std::isnan(v)) continue;
      const std::size_t idx = i * ny + j;
      if (detail::better(v, idx, best.value, best.index, best.found)) best = {true, v, idx, x, y};
    }
  }
  return best;
}

template <class F>
GridArgmax grid_argmax(const GridAxis& xs, const GridAxis& ys, F&& f) {
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  GridArgmax best;
#pragma omp parallel
  {
    GridArgmax local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(nx); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const double x = xs.at(i);
      for (std::size_t j = 0; j < ny; ++j) {
        const double y = ys.at(j);
        const double v = f(x, y);
        if (std::isnan(v)) continue;
        const std::size_t idx = i * ny + j;
        if (detail::better(v, idx, local.value, local.index, local.found)) local = {true, v, idx, x, y};
      }
    }
#pragma omp critical(eml_grid_argmax)
    {
      if (local.found && detail::better(local.value, local.index, best.value, best.index, best.found)) best = local;
    }
  }
  return best;
}

/// out[i] = f(i) for i in [0, n), evaluated serially.
template <class T, class F>
std::vector<T> map_index_serial(std::size_t n, F&& f) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
  return out;
}

/// out[i] = f(i), evaluated in parallel; order is preserved and the first
/// exception (by index) is rethrown after the loop.
template <class T, class F>
std::vector<T> map_index(std::size_t n, F&& f) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      out[i] = f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Number of fixed reduction chunks. Partial sums are combined in chunk order,
/// so parallel reductions are bit-identical across thread counts.
inline constexpr std::size_t kReductionChunks = 64;

}  // namespace eml
