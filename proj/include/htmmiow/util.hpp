#pragma once

// Small shared helpers: round-trip-safe number formatting, a bounded
// worker pool for independent tasks, and quantiles.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "htmmiow/errors.hpp"

namespace htmmiow {

// Shortest %g representation that parses back to the same double.
std::string format_real(double x);

// Runs fn(0) ... fn(n_tasks-1) on up to n_workers threads. Tasks must be
// independent; any exception is rethrown on the calling thread after join.
void parallel_for(std::size_t n_tasks, int n_workers, const std::function<void(std::size_t)>& fn);

// Linear-interpolation quantile of a sorted vector (R type 7). q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace htmmiow
