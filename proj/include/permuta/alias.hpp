#ifndef PERMUTA_ALIAS_HPP
#define PERMUTA_ALIAS_HPP

#include <cstddef>
#include <vector>

#include "permuta/errors.hpp"
#include "permuta/rng.hpp"

namespace permuta {

/// Walker/Vose alias table for O(1) sampling from fixed weights.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t n = weights.size();
    if (n == 0) return;
    for (double w : weights) {
      if (!(w >= 0.0)) throw Error(ErrorKind::Precondition, "alias weights must be non-negative");
      total_ += w;
    }
    if (!(total_ > 0.0)) throw Error(ErrorKind::Precondition, "alias weights must not all vanish");
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total_;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
    for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t size() const { return prob_.size(); }
  double total() const { return total_; }

  std::size_t sample(CounterRng& rng) const {
    const auto i = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
  double total_ = 0.0;
};

}  // namespace permuta

#endif  // PERMUTA_ALIAS_HPP
