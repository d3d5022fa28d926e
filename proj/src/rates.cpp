#include "permuta/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <set>
#include <sstream>

#include "permuta/errors.hpp"

namespace permuta {

namespace {

bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::string word_string(Word w, std::size_t k) {
  std::string s(k, '0');
  for (std::size_t j = 0; j < k; ++j)
    if ((w >> j) & 1u) s[j] = '1';
  return s;
}

/// Base permutations grouped by their anchored range.
std::map<RangeSet, std::vector<std::size_t>> base_by_range(const RateFamily& fam) {
  std::map<RangeSet, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < fam.base().size(); ++i) out[RangeSet(fam.base()[i].perm.range())].push_back(i);
  return out;
}

}  // namespace

FinitePermutation anchor(const FinitePermutation& sigma) {
  if (sigma.is_identity()) return sigma;
  const Site lo = sigma.range().front();
  auto cycles = sigma.cycles();
  for (auto& cyc : cycles)
    for (auto& s : cyc) s = s - lo;
  return FinitePermutation(std::move(cycles));
}

RateFamily::RateFamily(Lattice lattice, std::vector<BasePermutation> base) : lattice_(lattice) {
  std::set<FinitePermutation> seen;
  for (auto& b : base) {
    if (b.perm.is_identity()) throw Error(ErrorKind::InvalidFamily, "the identity cannot carry a rate");
    if (!(b.rate > 0.0) || !std::isfinite(b.rate)) throw Error(ErrorKind::InvalidFamily, "rates must be positive and finite");
    for (const auto& s : b.perm.range())
      for (int i = lattice_.dim(); i < 3; ++i)
        if (s[static_cast<std::size_t>(i)] != 0)
          throw Error(ErrorKind::InvalidFamily, "permutation uses more coordinates than the lattice dimension");
    auto anchored = anchor(b.perm);
    if (!seen.insert(anchored).second)
      throw Error(ErrorKind::InvalidFamily, "duplicate base permutation " + anchored.to_string(lattice_.dim()));
    base_.push_back({std::move(anchored), b.rate});
  }
  if (lattice_.is_torus()) {
    const Site ext = max_extent();
    for (int i = 0; i < lattice_.dim(); ++i)
      if (lattice_.side(i) <= 2 * ext[static_cast<std::size_t>(i)])
        throw Error(ErrorKind::TorusTooSmall, "torus side " + std::to_string(lattice_.side(i)) +
                                                  " must exceed twice the range extent " +
                                                  std::to_string(ext[static_cast<std::size_t>(i)]));
  }
}

std::optional<std::size_t> RateFamily::find(const FinitePermutation& sigma) const {
  const auto a = anchor(sigma);
  for (std::size_t i = 0; i < base_.size(); ++i)
    if (base_[i].perm == a) return i;
  return std::nullopt;
}

Site RateFamily::max_extent() const {
  Site ext;
  for (const auto& b : base_) {
    const auto r = b.perm.range();
    for (std::size_t i = 0; i < 3; ++i) {
      std::int64_t lo = r.front()[i], hi = r.front()[i];
      for (const auto& s : r) {
        lo = std::min(lo, s[i]);
        hi = std::max(hi, s[i]);
      }
      ext[i] = std::max(ext[i], hi - lo);
    }
  }
  return ext;
}

std::vector<ExpandedPermutation> expand(const RateFamily& fam) {
  const auto& lat = fam.lattice();
  if (!lat.is_torus()) throw Error(ErrorKind::Precondition, "only torus families can be fully expanded");
  const auto shifts = lat.sites();
  std::vector<ExpandedPermutation> out;
  out.reserve(fam.base().size() * shifts.size());
  for (std::size_t b = 0; b < fam.base().size(); ++b) {
    const auto& base = fam.base()[b];
    for (const auto& y : shifts) {
      ExpandedPermutation e;
      e.perm = base.perm.shifted(y, lat);
      e.rate = base.rate;
      e.base = b;
      e.shift = y;
      for (const auto& cyc : e.perm.cycles())
        for (std::size_t i = 0; i < cyc.size(); ++i) {
          e.from.push_back(static_cast<std::uint32_t>(lat.index(cyc[i])));
          e.to.push_back(static_cast<std::uint32_t>(lat.index(cyc[(i + 1) % cyc.size()])));
        }
      if (e.perm.range_size() != base.perm.range_size())
        throw Error(ErrorKind::TorusTooSmall, "a shifted permutation overlaps itself after wrapping");
      out.push_back(std::move(e));
    }
  }
  return out;
}

double compute_M_PL(const RateFamily& fam) {
  double total = 0.0;
  for (const auto& b : fam.base()) total += b.rate * static_cast<double>(b.perm.range_size());
  return total;
}

int compute_M_I(const RateFamily& fam) {
  std::size_t best = 0;
  for (const auto& b : fam.base()) best = std::max(best, b.perm.range_size());
  return static_cast<int>(best);
}

double compute_M_II(const RateFamily& fam) {
  if (!check_range_closure(fam, ClosureMode::Strict).pass)
    throw Error(ErrorKind::NotRangeClosed, "M_II is defined for range-closed families only");
  double best = 1.0;
  for (const auto& [r, idx] : base_by_range(fam)) {
    double lo = fam.base()[idx.front()].rate, hi = lo;
    for (auto i : idx) {
      lo = std::min(lo, fam.base()[i].rate);
      hi = std::max(hi, fam.base()[i].rate);
    }
    best = std::max(best, hi / lo);
  }
  return best;
}

bool check_symmetry(const RateFamily& fam) {
  for (const auto& b : fam.base()) {
    auto j = fam.find(inverse(b.perm));
    if (!j || !same_rate(fam.base()[*j].rate, b.rate)) return false;
  }
  return true;
}

ClosureReport check_range_closure(const RateFamily& fam, ClosureMode mode) {
  ClosureReport rep;
  rep.mode = mode;
  const int dim = fam.lattice().dim();
  for (const auto& [r, idx] : base_by_range(fam)) {
    std::vector<PositionPerm> members;
    for (auto i : idx) members.push_back(to_positions(fam.base()[i].perm, r));
    if (mode == ClosureMode::Strict) {
      for (const auto& d : derangement_position_perms(r.size())) {
        if (std::find(members.begin(), members.end(), d) == members.end()) {
          rep.detail = "missing " + to_permutation(d, r.sites()).to_string(dim);
          return rep;
        }
      }
      continue;
    }
    const Word full = (Word{1} << r.size()) - 1;
    for (Word a = 0; a <= full; ++a)
      for (Word b = 0; b <= full; ++b) {
        if (a == b || popcount(a) != popcount(b)) continue;
        bool ok = false;
        for (const auto& p : members) ok = ok || apply_word(p, a) == b;
        if (!ok) {
          std::ostringstream os;
          os << "no permutation of range " << FinitePermutation({r.sites()}).to_string(dim) << " maps "
             << word_string(a, r.size()) << " to " << word_string(b, r.size());
          rep.detail = os.str();
          return rep;
        }
      }
  }
  rep.pass = true;
  return rep;
}

namespace {

bool torus_strongly_connected(const RateFamily& fam) {
  const auto& lat = fam.lattice();
  const std::size_t n = lat.size();
  std::vector<std::vector<std::uint32_t>> fwd(n), bwd(n);
  for (const auto& e : expand(fam))
    for (std::size_t j = 0; j < e.from.size(); ++j) {
      fwd[e.from[j]].push_back(e.to[j]);
      bwd[e.to[j]].push_back(e.from[j]);
    }
  auto reaches_all = [n](const std::vector<std::vector<std::uint32_t>>& adj) {
    std::vector<char> seen(n, 0);
    std::deque<std::uint32_t> q{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      auto x = q.front();
      q.pop_front();
      for (auto y : adj[x])
        if (!seen[y]) {
          seen[y] = 1;
          ++count;
          q.push_back(y);
        }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(bwd);
}

/// Whether integer vectors generate the full group Z^d. Every cycle's
/// displacements sum to zero, so the reachable semigroup is that group.
bool generates_full_lattice(std::vector<std::array<std::int64_t, 3>> rows, int dim) {
  std::int64_t index = 1;
  std::size_t top = 0;
  for (int col = 0; col < dim; ++col) {
    const auto c = static_cast<std::size_t>(col);
    while (true) {
      // Euclid among rows[top..] on this column
      std::size_t piv = rows.size();
      for (std::size_t i = top; i < rows.size(); ++i)
        if (rows[i][c] != 0 && (piv == rows.size() || std::llabs(rows[i][c]) < std::llabs(rows[piv][c]))) piv = i;
      if (piv == rows.size()) return false;  // rank deficient
      std::swap(rows[top], rows[piv]);
      bool reduced = true;
      for (std::size_t i = top + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        const auto f = rows[i][c] / rows[top][c];
        for (std::size_t k = 0; k < 3; ++k) rows[i][k] -= f * rows[top][k];
        if (rows[i][c] != 0) reduced = false;
      }
      if (reduced) break;
    }
    index *= std::llabs(rows[top][c]);
    ++top;
  }
  return index == 1;
}

}  // namespace

bool check_irreducibility(const RateFamily& fam) {
  if (fam.empty()) return false;
  if (fam.lattice().is_torus()) return torus_strongly_connected(fam);
  std::vector<std::array<std::int64_t, 3>> rows;
  for (const auto& b : fam.base())
    for (const auto& x : b.perm.range()) rows.push_back((b.perm(x) - x).c);
  return generates_full_lattice(std::move(rows), fam.lattice().dim());
}

std::map<RangeSet, RangeStat> range_stats(const RateFamily& fam) {
  std::map<RangeSet, RangeStat> out;
  auto add = [&out](const RangeSet& r, double q) {
    auto [it, fresh] = out.try_emplace(r);
    auto& st = it->second;
    st.m = fresh ? q : std::min(st.m, q);
    st.Z += q;
    ++st.count;
  };
  if (fam.lattice().is_torus()) {
    for (const auto& e : expand(fam)) add(RangeSet(e.perm.range()), e.rate);
  } else {
    for (const auto& b : fam.base()) add(RangeSet(b.perm.range()), b.rate);
  }
  return out;
}

double z_d(const RateFamily& fam, const Site& u, const Site& v) {
  const auto& lat = fam.lattice();
  std::map<RangeSet, double> z;
  for (const auto& b : fam.base()) z[RangeSet(b.perm.range())] += b.rate;
  const Site uu = lat.wrap(u), vv = lat.wrap(v);
  double total = 0.0;
  for (const auto& [r, Z] : z) {
    for (const auto& anchor_site : r.sites()) {
      const Site y = uu - anchor_site;
      bool has_v = false;
      for (const auto& s : r.sites()) has_v = has_v || lat.wrap(s + y) == vv;
      if (has_v && uu != vv) total += Z;
    }
  }
  if (total > compute_M_PL(fam) * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidFamily, "z_d exceeds M_PL; the family is inconsistent");
  return total;
}

FamilyReport report(const RateFamily& fam) {
  FamilyReport rep;
  rep.M_PL = compute_M_PL(fam);
  rep.M_I = compute_M_I(fam);
  rep.symmetric = check_symmetry(fam);
  rep.range_closed = check_range_closure(fam, ClosureMode::Strict).pass;
  rep.range_closed_relaxed = check_range_closure(fam, ClosureMode::Relaxed).pass;
  rep.irreducible = check_irreducibility(fam);
  if (rep.range_closed && !fam.empty()) {
    rep.M_II = compute_M_II(fam);
    const double factor = *rep.M_II * static_cast<double>(derangement_count(rep.M_I));
    rep.success_bound_consistent = true;
    for (const auto& [r, st] : range_stats(fam.on(Lattice::unbounded(fam.lattice().dim()))))
      rep.success_bound_consistent = rep.success_bound_consistent && st.m * factor >= st.Z * (1.0 - 1e-12);
  }
  return rep;
}

void require_simulatable(const RateFamily& fam) {
  if (fam.empty()) throw Error(ErrorKind::InvalidFamily, "the family has no permutations");
  if (!check_irreducibility(fam)) throw Error(ErrorKind::InvalidFamily, "the family is not irreducible");
}

std::optional<std::size_t> RangeGroup::member_with(const PositionPerm& p) const {
  for (std::size_t i = 0; i < members.size(); ++i)
    if (members[i].local == p) return i;
  return std::nullopt;
}

std::vector<RangeGroup> range_groups(const RateFamily& fam, const std::vector<ExpandedPermutation>& expanded) {
  const auto& lat = fam.lattice();
  std::map<std::pair<std::vector<Site>, Site>, std::size_t> key_to_group;
  std::vector<RangeGroup> groups;
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    const auto& e = expanded[i];
    const auto& bp = fam.base()[e.base].perm;
    auto base_range = bp.range();
    auto key = std::make_pair(base_range, e.shift);
    auto it = key_to_group.find(key);
    if (it == key_to_group.end()) {
      RangeGroup g;
      g.base_range = base_range;
      g.shift = e.shift;
      for (const auto& s : base_range) g.site_index.push_back(static_cast<std::uint32_t>(lat.index(lat.shift(s, e.shift))));
      groups.push_back(std::move(g));
      it = key_to_group.emplace(std::move(key), groups.size() - 1).first;
    }
    auto& g = groups[it->second];
    GroupMember mem;
    mem.expanded = i;
    mem.rate = e.rate;
    mem.local = to_positions(bp, RangeSet(base_range));
    g.members.push_back(std::move(mem));
  }
  for (auto& g : groups) {
    g.m = g.members.front().rate;
    g.Z = 0.0;
    for (const auto& mem : g.members) {
      g.m = std::min(g.m, mem.rate);
      g.Z += mem.rate;
    }
  }
  return groups;
}

}  // namespace permuta
