#ifndef PERMUTA_PARALLEL_HPP
#define PERMUTA_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace permuta {

/// Evaluate f(0..n-1) on up to `threads` workers; results come back in index
/// order. The first exception thrown by any replica is rethrown.
namespace detail {
template <class R>
std::vector<R> unwrap(std::vector<std::optional<R>> slots) {
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}
}  // namespace detail

template <class F>
auto parallel_map(std::size_t n, unsigned threads, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::optional<R>> slots(n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(f(i));
    return detail::unwrap(std::move(slots));
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return detail::unwrap(std::move(slots));
}

}  // namespace permuta

#endif  // PERMUTA_PARALLEL_HPP
