#include "permuta/permutation.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "permuta/errors.hpp"

namespace permuta {

namespace {

std::vector<std::vector<Site>> canonical_cycles(std::vector<std::vector<Site>> cycles) {
  std::set<Site> seen;
  std::vector<std::vector<Site>> out;
  for (auto& cyc : cycles) {
    if (cyc.size() < 2) throw Error(ErrorKind::Precondition, "cycles must have length >= 2");
    for (const auto& s : cyc)
      if (!seen.insert(s).second) throw Error(ErrorKind::Precondition, "cycles must be disjoint");
    auto it = std::min_element(cyc.begin(), cyc.end());
    std::rotate(cyc.begin(), it, cyc.end());
    out.push_back(std::move(cyc));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace

FinitePermutation::FinitePermutation(std::vector<std::vector<Site>> cycles)
    : cycles_(canonical_cycles(std::move(cycles))) {}

FinitePermutation FinitePermutation::from_map(const std::map<Site, Site>& images) {
  std::set<Site> targets;
  for (const auto& [x, y] : images) targets.insert(y);
  for (const auto& [x, y] : images)
    if (!images.count(y)) throw Error(ErrorKind::Precondition, "map is not a bijection of its domain");
  if (targets.size() != images.size()) throw Error(ErrorKind::Precondition, "map is not injective");

  std::set<Site> done;
  std::vector<std::vector<Site>> cycles;
  for (const auto& [x, y] : images) {
    if (done.count(x) || x == y) continue;
    std::vector<Site> cyc{x};
    done.insert(x);
    for (Site z = y; z != x; z = images.at(z)) {
      cyc.push_back(z);
      done.insert(z);
    }
    cycles.push_back(std::move(cyc));
  }
  return FinitePermutation(std::move(cycles));
}

FinitePermutation FinitePermutation::transposition(const Site& a, const Site& b) {
  return FinitePermutation({{a, b}});
}

Site FinitePermutation::operator()(const Site& x) const {
  for (const auto& cyc : cycles_)
    for (std::size_t i = 0; i < cyc.size(); ++i)
      if (cyc[i] == x) return cyc[(i + 1) % cyc.size()];
  return x;
}

Site FinitePermutation::preimage(const Site& x) const {
  for (const auto& cyc : cycles_)
    for (std::size_t i = 0; i < cyc.size(); ++i)
      if (cyc[i] == x) return cyc[(i + cyc.size() - 1) % cyc.size()];
  return x;
}

bool FinitePermutation::moves(const Site& x) const {
  for (const auto& cyc : cycles_)
    if (std::find(cyc.begin(), cyc.end(), x) != cyc.end()) return true;
  return false;
}

std::vector<Site> FinitePermutation::range() const {
  std::vector<Site> r;
  for (const auto& cyc : cycles_) r.insert(r.end(), cyc.begin(), cyc.end());
  std::sort(r.begin(), r.end());
  return r;
}

std::size_t FinitePermutation::range_size() const {
  std::size_t n = 0;
  for (const auto& cyc : cycles_) n += cyc.size();
  return n;
}

FinitePermutation FinitePermutation::shifted(const Site& v, const Lattice& lat) const {
  auto cycles = cycles_;
  for (auto& cyc : cycles)
    for (auto& s : cyc) s = lat.shift(s, v);
  return FinitePermutation(std::move(cycles));
}

std::map<Site, Site> FinitePermutation::to_map() const {
  std::map<Site, Site> m;
  for (const auto& cyc : cycles_)
    for (std::size_t i = 0; i < cyc.size(); ++i) m[cyc[i]] = cyc[(i + 1) % cyc.size()];
  return m;
}

std::string FinitePermutation::to_string(int dim) const {
  if (cycles_.empty()) return "()";
  std::ostringstream os;
  for (const auto& cyc : cycles_) {
    os << '(';
    for (std::size_t i = 0; i < cyc.size(); ++i) os << (i ? " " : "") << cyc[i].to_string(dim);
    os << ')';
  }
  return os.str();
}

FinitePermutation FinitePermutation::parse(const std::string& text, int dim) {
  std::vector<std::vector<Site>> cycles;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (text.substr(i) == "()") return {};
  while (i < text.size()) {
    skip_ws();
    if (i >= text.size()) break;
    if (text[i] != '(') throw Error(ErrorKind::Parse, "expected '(' in cycle notation: " + text);
    ++i;
    std::vector<Site> cyc;
    while (true) {
      skip_ws();
      if (i >= text.size()) throw Error(ErrorKind::Parse, "unterminated cycle: " + text);
      if (text[i] == ')') {
        ++i;
        break;
      }
      std::size_t end = text.find_first_of(" \t)", i);
      if (end == std::string::npos) throw Error(ErrorKind::Parse, "unterminated cycle: " + text);
      std::string tok = text.substr(i, end - i);
      i = end;
      Site s;
      std::istringstream ts(tok);
      std::string part;
      int k = 0;
      while (std::getline(ts, part, ',')) {
        if (k >= dim) throw Error(ErrorKind::Parse, "too many coordinates in site " + tok);
        try {
          std::size_t used = 0;
          s.c[static_cast<std::size_t>(k)] = std::stoll(part, &used);
          if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
          throw Error(ErrorKind::Parse, "bad coordinate '" + part + "'");
        }
        ++k;
      }
      if (k != dim) throw Error(ErrorKind::Parse, "site " + tok + " needs " + std::to_string(dim) + " coordinates");
      cyc.push_back(s);
    }
    cycles.push_back(std::move(cyc));
  }
  return FinitePermutation(std::move(cycles));
}

RangeSet::RangeSet(std::vector<Site> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
    throw Error(ErrorKind::Precondition, "range set sites must be distinct");
  if (sites_.size() < 2) throw Error(ErrorKind::Precondition, "range sets have at least two sites");
  if (sites_.size() > 16) throw Error(ErrorKind::Precondition, "range sets larger than 16 sites are not supported");
}

std::optional<std::size_t> RangeSet::position(const Site& x) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), x);
  if (it == sites_.end() || *it != x) return std::nullopt;
  return static_cast<std::size_t>(it - sites_.begin());
}

// --- group operations -------------------------------------------------------

Configuration apply(const FinitePermutation& sigma, const Configuration& eta) {
  Configuration out = eta;
  const auto& lat = eta.lattice();
  for (const auto& cyc : sigma.cycles())
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const auto& from = cyc[i];
      const auto& to = cyc[(i + 1) % cyc.size()];
      if (!lat.contains(from)) throw Error(ErrorKind::Precondition, "permutation range leaves the torus");
      out.set(to, eta.get(from));
    }
  return out;
}

std::vector<Site> apply(const FinitePermutation& sigma, const std::vector<Site>& set) {
  std::vector<Site> out;
  out.reserve(set.size());
  for (const auto& x : set) out.push_back(sigma(x));
  std::sort(out.begin(), out.end());
  return out;
}

FinitePermutation inverse(const FinitePermutation& sigma) {
  auto cycles = sigma.cycles();
  for (auto& cyc : cycles) std::reverse(cyc.begin(), cyc.end());
  return FinitePermutation(std::move(cycles));
}

FinitePermutation compose(const FinitePermutation& outer, const FinitePermutation& inner) {
  std::set<Site> domain;
  for (const auto& s : outer.range()) domain.insert(s);
  for (const auto& s : inner.range()) domain.insert(s);
  std::map<Site, Site> m;
  for (const auto& x : domain) m[x] = outer(inner(x));
  return FinitePermutation::from_map(m);
}

FinitePermutation power(const FinitePermutation& sigma, long exponent) {
  std::vector<std::vector<Site>> cycles;
  std::map<Site, Site> m;
  for (const auto& cyc : sigma.cycles()) {
    const long k = static_cast<long>(cyc.size());
    const long e = ((exponent % k) + k) % k;
    for (long i = 0; i < k; ++i) m[cyc[static_cast<std::size_t>(i)]] = cyc[static_cast<std::size_t>((i + e) % k)];
  }
  return FinitePermutation::from_map(m);
}

std::vector<Site> orbit(const FinitePermutation& sigma, const Site& x) {
  std::vector<Site> out{x};
  for (Site y = sigma(x); y != x; y = sigma(y)) out.push_back(y);
  return out;
}

// --- derangements -----------------------------------------------------------

std::uint64_t derangement_count_inclusion_exclusion(int n) {
  if (n < 2) throw Error(ErrorKind::Precondition, "derangement counts are defined here for n >= 2");
  if (n > 20) throw Error(ErrorKind::Precondition, "n > 20 overflows 64 bits");
  // Σ_k C(n,k)(-1)^k (n-k)! = Σ_k (-1)^k n!/k!
  __int128 total = 0;
  __int128 n_fact_over_k_fact = 1;
  for (int j = 1; j <= n; ++j) n_fact_over_k_fact *= j;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) n_fact_over_k_fact /= k;
    total += (k % 2 == 0 ? 1 : -1) * n_fact_over_k_fact;
  }
  return static_cast<std::uint64_t>(total);
}

std::uint64_t derangement_count_recurrence(int n) {
  if (n < 2) throw Error(ErrorKind::Precondition, "derangement counts are defined here for n >= 2");
  if (n > 20) throw Error(ErrorKind::Precondition, "n > 20 overflows 64 bits");
  std::uint64_t prev2 = 1, prev1 = 0;  // P(0), P(1)
  for (int k = 2; k <= n; ++k) {
    const std::uint64_t cur = static_cast<std::uint64_t>(k - 1) * (prev1 + prev2);
    prev2 = prev1;
    prev1 = cur;
  }
  return prev1;
}

std::uint64_t derangement_count(int n) { return derangement_count_recurrence(n); }

// --- permutations with a given range ---------------------------------------

const std::vector<PositionPerm>& cyclic_position_perms(std::size_t k) {
  static std::mutex mu;
  static std::map<std::size_t, std::vector<PositionPerm>> cache;
  if (k < 2 || k > 10) throw Error(ErrorKind::Precondition, "cyclic enumeration supports 2 <= |R| <= 10");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  std::vector<PositionPerm> out;
  std::vector<std::uint8_t> rest(k - 1);
  std::iota(rest.begin(), rest.end(), std::uint8_t{1});
  do {
    PositionPerm p(k);
    std::uint8_t cur = 0;
    for (auto next : rest) {
      p[cur] = next;
      cur = next;
    }
    p[cur] = 0;
    out.push_back(std::move(p));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return cache.emplace(k, std::move(out)).first->second;
}

std::vector<PositionPerm> derangement_position_perms(std::size_t k) {
  if (k < 2 || k > 10) throw Error(ErrorKind::Precondition, "derangement enumeration supports 2 <= |R| <= 10");
  std::vector<PositionPerm> out;
  PositionPerm p(k);
  std::iota(p.begin(), p.end(), std::uint8_t{0});
  do {
    bool fixed = false;
    for (std::size_t j = 0; j < k && !fixed; ++j) fixed = p[j] == j;
    if (!fixed) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

Word apply_word(const PositionPerm& p, Word a) {
  Word out = 0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if ((a >> j) & 1u) out |= Word{1} << p[j];
  return out;
}

PositionPerm compose_positions(const PositionPerm& outer, const PositionPerm& inner) {
  PositionPerm out(inner.size());
  for (std::size_t j = 0; j < inner.size(); ++j) out[j] = outer[inner[j]];
  return out;
}

PositionPerm identity_positions(std::size_t k) {
  PositionPerm p(k);
  std::iota(p.begin(), p.end(), std::uint8_t{0});
  return p;
}

PositionPerm power_positions(const PositionPerm& p, long exponent) {
  const long k = static_cast<long>(p.size());
  PositionPerm inv(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) inv[p[j]] = static_cast<std::uint8_t>(j);
  const PositionPerm& step = exponent >= 0 ? p : inv;
  long e = exponent >= 0 ? exponent : -exponent;
  // the order of any permutation of k points divides k!, but e is tiny in practice
  PositionPerm out = identity_positions(static_cast<std::size_t>(k));
  for (long i = 0; i < e; ++i) out = compose_positions(step, out);
  return out;
}

bool is_identity(const PositionPerm& p) {
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] != j) return false;
  return true;
}

FinitePermutation to_permutation(const PositionPerm& p, const std::vector<Site>& sites_by_position) {
  std::map<Site, Site> m;
  for (std::size_t j = 0; j < p.size(); ++j) m[sites_by_position[j]] = sites_by_position[p[j]];
  return FinitePermutation::from_map(m);
}

PositionPerm to_positions(const FinitePermutation& sigma, const RangeSet& r) {
  PositionPerm p(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    auto pos = r.position(sigma(r[j]));
    if (!pos) throw Error(ErrorKind::Precondition, "permutation leaves the range set");
    p[j] = static_cast<std::uint8_t>(*pos);
  }
  for (const auto& s : sigma.range())
    if (!r.contains(s)) throw Error(ErrorKind::Precondition, "permutation moves a site outside the range set");
  return p;
}

std::vector<FinitePermutation> enumerate_cyclic(const RangeSet& r) {
  std::vector<FinitePermutation> out;
  for (const auto& p : cyclic_position_perms(r.size())) out.push_back(to_permutation(p, r.sites()));
  return out;
}

std::vector<FinitePermutation> enumerate_derangements(const RangeSet& r) {
  std::vector<FinitePermutation> out;
  for (const auto& p : derangement_position_perms(r.size())) out.push_back(to_permutation(p, r.sites()));
  return out;
}

// --- σ_R selection ----------------------------------------------------------

std::optional<std::size_t> select_cover_index(std::size_t k, Word a, Word b, SelectionPolicy policy,
                                              const std::function<bool(std::size_t)>& allowed) {
  const auto& cands = cyclic_position_perms(k);
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (allowed && !allowed(i)) continue;
    const Word image = apply_word(cands[i], a);
    if ((image & b) != b) continue;
    found = i;
    if (policy == SelectionPolicy::CanonicalFirst) break;
  }
  return found;
}

namespace {

void check_word(const RangeSet& r, Word w) {
  if (r.size() < 32 && (w >> r.size()) != 0) throw Error(ErrorKind::Precondition, "word has bits beyond the range set");
}

}  // namespace

FinitePermutation select_sigma_two_discrepancy(const RangeSet& r, Word a, Word b, SelectionPolicy policy) {
  check_word(r, a);
  check_word(r, b);
  if (popcount(a) != popcount(b) || popcount(a ^ b) != 2)
    throw Error(ErrorKind::Precondition, "words must have equal popcount and exactly two discrepancies");
  // with equal popcounts, σ(a) ≥ b means σ(a) = b
  auto idx = select_cover_index(r.size(), a, b, policy);
  if (!idx) throw Error(ErrorKind::NoCover, "no cyclic permutation maps a onto b");
  return to_permutation(cyclic_position_perms(r.size())[*idx], r.sites());
}

FinitePermutation select_sigma_general(const RangeSet& r, Word a, Word b, SelectionPolicy policy) {
  check_word(r, a);
  check_word(r, b);
  if (popcount(a) < popcount(b)) throw Error(ErrorKind::Precondition, "popcount(a) must be >= popcount(b)");
  auto idx = select_cover_index(r.size(), a, b, policy);
  if (!idx) throw Error(ErrorKind::NoCover, "no cyclic permutation covers b from a");
  return to_permutation(cyclic_position_perms(r.size())[*idx], r.sites());
}

}  // namespace permuta
