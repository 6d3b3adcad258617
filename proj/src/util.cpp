#include "htmmiow/util.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>

namespace htmmiow {

std::string format_real(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    int len = std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    double back = 0;
    auto res = std::from_chars(buf, buf + len, back);
    if (res.ec == std::errc() && (back == x || (std::isnan(back) && std::isnan(x)))) {
      return std::string(buf, static_cast<std::size_t>(len));
    }
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void parallel_for(std::size_t n_tasks, int n_workers, const std::function<void(std::size_t)>& fn) {
  if (n_workers < 1) throw InvalidArgument("parallel_for: worker count must be >= 1");
  if (n_workers == 1 || n_tasks <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n_workers), n_tasks));
  pool.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile_sorted: empty sample");
  if (q < 0 || q > 1) throw InvalidArgument("quantile_sorted: q outside [0, 1]");
  double h = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = static_cast<std::size_t>(std::ceil(h));
  double frac = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace htmmiow
