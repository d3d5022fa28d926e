#include "doctest.h"

#include <map>
#include <set>

#include "permuta/errors.hpp"
#include "permuta/permutation.hpp"
#include "permuta/rng.hpp"
#include "support.hpp"

using namespace permuta;
using testsupport::cycle1;

namespace {

RangeSet range1(std::initializer_list<std::int64_t> xs) {
  std::vector<Site> s;
  for (auto x : xs) s.push_back(Site{x});
  return RangeSet(s);
}

FinitePermutation random_permutation(CounterRng& rng, std::int64_t n) {
  std::vector<std::int64_t> img(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) img[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = img.size(); i > 1; --i) std::swap(img[i - 1], img[rng.below(i)]);
  std::map<Site, Site> m;
  for (std::int64_t i = 0; i < n; ++i)
    if (img[static_cast<std::size_t>(i)] != i) m[Site{i}] = Site{img[static_cast<std::size_t>(i)]};
  return FinitePermutation::from_map(m);
}

Configuration random_config(CounterRng& rng, const Lattice& lat) {
  Configuration eta(lat);
  for (std::size_t i = 0; i < lat.size(); ++i) eta.set(i, rng.coin());
  return eta;
}

}  // namespace

TEST_CASE("apply moves occupancy along the cycle") {
  const auto lat = Lattice::torus({6});
  const auto eta = Configuration::from_bits(lat, "100000");
  CHECK(permuta::apply(cycle1({0, 1, 2}), eta).to_bits() == "010000");
  const Configuration empty(lat);
  CHECK(permuta::apply(cycle1({0, 1, 2}), empty) == empty);
  CHECK(permuta::apply(cycle1({0, 1, 2}), std::vector<Site>{Site{0}, Site{5}}) == std::vector<Site>{Site{1}, Site{5}});
}

TEST_CASE("apply agrees with the pointwise definition (property)") {
  const auto lat = Lattice::torus({8});
  CounterRng rng(3, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s1 = random_permutation(rng, 8), s2 = random_permutation(rng, 8);
    const auto eta = random_config(rng, lat);
    // σ(η)(x) = η(σ⁻¹x), checked site by site
    const auto out = permuta::apply(s1, eta);
    for (std::int64_t x = 0; x < 8; ++x) CHECK(out.get(Site{x}) == eta.get(s1.preimage(Site{x})));
    CHECK(permuta::apply(inverse(s1), out) == eta);
    CHECK(permuta::apply(compose(s1, s2), eta) == permuta::apply(s1, permuta::apply(s2, eta)));
    CHECK(out.popcount() == eta.popcount());
    CHECK(inverse(s1).range() == s1.range());
    for (long i = -3; i <= 4; ++i) {
      const auto r = power(s1, i).range();
      CHECK(std::includes(s1.range().begin(), s1.range().end(), r.begin(), r.end()));
    }
  }
}

TEST_CASE("group operations") {
  CHECK(inverse(cycle1({0, 1, 2})) == cycle1({0, 2, 1}));
  CHECK(power(cycle1({0, 1, 2}), 3).is_identity());
  CHECK(power(cycle1({0, 1, 2}), -1) == cycle1({0, 2, 1}));
  const auto t = FinitePermutation::transposition(Site{0}, Site{1});
  CHECK(compose(t, t).is_identity());
  CHECK(orbit(cycle1({0, 1, 2}), Site{0}) == std::vector<Site>{Site{0}, Site{1}, Site{2}});
  CHECK(orbit(cycle1({0, 1, 2}), Site{5}) == std::vector<Site>{Site{5}});
  const FinitePermutation two({{Site{0}, Site{1}}, {Site{2}, Site{3}}});
  CHECK(orbit(two, Site{2}) == std::vector<Site>{Site{2}, Site{3}});
}

TEST_CASE("canonical form and cycle notation") {
  const FinitePermutation p({{Site{2}, Site{0}, Site{1}}});
  CHECK(p.to_string(1) == "(0 1 2)");
  CHECK(FinitePermutation::parse("(0 2 1)", 1) == cycle1({0, 2, 1}));
  const auto q = FinitePermutation::parse("(0,0 1,0)(0,1 1,1 2,1)", 2);
  CHECK(q.to_string(2) == "(0,0 1,0)(0,1 1,1 2,1)");
  CHECK(FinitePermutation::parse("()", 1).is_identity());
  CHECK_THROWS_AS(FinitePermutation::parse("(0 1", 1), Error);
  CHECK_THROWS_AS(FinitePermutation({{Site{0}}}), Error);
  CHECK_THROWS_AS(FinitePermutation({{Site{0}, Site{1}}, {Site{1}, Site{2}}}), Error);
}

TEST_CASE("derangement counts") {
  CHECK(derangement_count(2) == 1);
  CHECK(derangement_count(3) == 2);
  CHECK(derangement_count(4) == 9);
  CHECK(derangement_count(5) == 44);
  CHECK_THROWS_AS(derangement_count(1), Error);
  for (int n = 2; n <= 8; ++n) CHECK(derangement_count(n) == testsupport::brute_derangements(n));
  for (int n = 2; n <= 12; ++n)
    CHECK(derangement_count_inclusion_exclusion(n) == derangement_count_recurrence(n));
  for (int n = 3; n <= 20; ++n) CHECK(derangement_count(n) > derangement_count(n - 1));
}

TEST_CASE("enumeration of cyclic permutations and derangements") {
  const auto c2 = enumerate_cyclic(range1({0, 1}));
  REQUIRE(c2.size() == 1);
  CHECK(c2[0] == FinitePermutation::transposition(Site{0}, Site{1}));

  const auto c3 = enumerate_cyclic(range1({0, 1, 2}));
  REQUIRE(c3.size() == 2);
  CHECK(c3[0] == cycle1({0, 1, 2}));
  CHECK(c3[1] == cycle1({0, 2, 1}));

  // oracle: all 4! maps of a 4-set, keep the single 4-cycles and the derangements
  const auto r4 = range1({0, 1, 3, 4});
  std::vector<std::int64_t> pts{0, 1, 3, 4}, img = pts;
  std::set<FinitePermutation> cyc_oracle, der_oracle;
  do {
    std::map<Site, Site> m;
    bool fixed = false;
    for (std::size_t i = 0; i < 4; ++i) {
      fixed = fixed || img[i] == pts[i];
      if (img[i] != pts[i]) m[Site{pts[i]}] = Site{img[i]};
    }
    if (fixed) continue;
    const auto p = FinitePermutation::from_map(m);
    der_oracle.insert(p);
    if (p.is_cyclic()) cyc_oracle.insert(p);
  } while (std::next_permutation(img.begin(), img.end()));
  const auto c4 = enumerate_cyclic(r4);
  const auto d4 = enumerate_derangements(r4);
  CHECK(c4.size() == 6);
  CHECK(d4.size() == 9);
  CHECK(std::set<FinitePermutation>(c4.begin(), c4.end()) == cyc_oracle);
  CHECK(std::set<FinitePermutation>(d4.begin(), d4.end()) == der_oracle);
  for (std::size_t i = 1; i < c4.size(); ++i) CHECK(c4[i - 1].cycles()[0] < c4[i].cycles()[0]);

  for (std::size_t k = 2; k <= 6; ++k) {
    std::uint64_t fact = 1;
    for (std::size_t i = 2; i < k; ++i) fact *= i;
    CHECK(cyclic_position_perms(k).size() == fact);
    CHECK(derangement_position_perms(k).size() == derangement_count(static_cast<int>(k)));
  }
}

TEST_CASE("enumeration is shift covariant") {
  const auto base = enumerate_cyclic(range1({0, 2, 3, 5}));
  const auto lat = Lattice::unbounded(1);
  for (std::int64_t y : {-7, 1, 13}) {
    const auto moved = enumerate_cyclic(range1({0 + y, 2 + y, 3 + y, 5 + y}));
    REQUIRE(moved.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(moved[i] == base[i].shifted(Site{y}, lat));
  }
}

TEST_CASE("two-discrepancy selection") {
  // positions y-1, y, y+1 with a = 1,1,0 and b = 1,0,1
  const auto r = range1({4, 5, 6});
  const Word a = 0b011, b = 0b101;
  const auto s = select_sigma_two_discrepancy(r, a, b);
  CHECK(apply_word(to_positions(s, r), a) == b);
  // unique among the two 3-cycles
  int hits = 0;
  for (const auto& c : enumerate_cyclic(r)) hits += apply_word(to_positions(c, r), a) == b;
  CHECK(hits == 1);
  CHECK_THROWS_AS(select_sigma_two_discrepancy(r, a, a), Error);

  // exhaustive oracle on |R| <= 4
  for (std::size_t k = 2; k <= 4; ++k) {
    std::vector<Site> sites;
    for (std::size_t i = 0; i < k; ++i) sites.push_back(Site{static_cast<std::int64_t>(i)});
    const RangeSet rk(sites);
    const Word full = (Word{1} << k) - 1;
    for (Word x = 0; x <= full; ++x)
      for (Word z = 0; z <= full; ++z) {
        if (popcount(x) != popcount(z) || popcount(x ^ z) != 2) continue;
        bool exists = false;
        for (const auto& p : cyclic_position_perms(k)) exists = exists || apply_word(p, x) == z;
        CHECK(exists);
        const auto sel = select_sigma_two_discrepancy(rk, x, z);
        CHECK(apply_word(to_positions(sel, rk), x) == z);
      }
  }
}

TEST_CASE("general cover selection") {
  const auto r3 = range1({0, 1, 2});
  CHECK(select_sigma_general(r3, 0b111, 0b111) == cycle1({0, 1, 2}));
  const auto s = select_sigma_general(r3, 0b011, 0b010);
  CHECK((apply_word(to_positions(s, r3), 0b011) & 0b010) == 0b010);
  CHECK_THROWS_AS(select_sigma_general(r3, 0b001, 0b011), Error);

  SUBCASE("exhaustive existence with the constant-free exception") {
    for (std::size_t k = 2; k <= 4; ++k) {
      const Word full = (Word{1} << k) - 1;
      for (Word a = 0; a <= full; ++a)
        for (Word b = 0; b <= full; ++b) {
          if (popcount(a) < popcount(b)) continue;
          bool exists = false;
          for (const auto& p : cyclic_position_perms(k)) exists = exists || (apply_word(p, a) & b) == b;
          const bool equal_nonconstant = a == b && a != 0 && a != full;
          CHECK(exists == !equal_nonconstant);
          CHECK(select_cover_index(k, a, b, SelectionPolicy::CanonicalFirst).has_value() == exists);
        }
    }
  }

  SUBCASE("policies pick the first and the last admissible cycle") {
    const std::size_t k = 4;
    const Word a = 0b0111, b = 0b0001;
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < cyclic_position_perms(k).size(); ++i)
      if ((apply_word(cyclic_position_perms(k)[i], a) & b) == b) ok.push_back(i);
    REQUIRE(ok.size() > 1);
    CHECK(*select_cover_index(k, a, b, SelectionPolicy::CanonicalFirst) == ok.front());
    CHECK(*select_cover_index(k, a, b, SelectionPolicy::CanonicalLast) == ok.back());
  }

  SUBCASE("shift covariance") {
    const auto lat = Lattice::unbounded(1);
    const std::vector<std::int64_t> offs{0, 1, 3, 4};
    for (std::size_t k = 2; k <= 4; ++k) {
      std::vector<Site> base_sites;
      for (std::size_t i = 0; i < k; ++i) base_sites.push_back(Site{offs[i]});
      const RangeSet r(base_sites);
      const Word full = (Word{1} << k) - 1;
      for (std::int64_t y : {-5, 2, 17}) {
        std::vector<Site> moved;
        for (const auto& s : base_sites) moved.push_back(s + Site{y});
        const RangeSet ry(moved);
        for (Word a = 0; a <= full; ++a)
          for (Word b = 0; b <= full; ++b) {
            if (popcount(a) < popcount(b) || (a == b && a != 0 && a != full)) continue;
            CHECK(select_sigma_general(ry, a, b) == select_sigma_general(r, a, b).shifted(Site{y}, lat));
          }
      }
    }
  }
}
