#include "doctest.h"

#include "permuta/errors.hpp"
#include "permuta/exact.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace permuta;
using namespace testsupport;

namespace {

ExpandedPermutation index_transposition(std::uint32_t x, std::uint32_t y, double rate) {
  ExpandedPermutation e;
  e.rate = rate;
  e.from = {x, y};
  e.to = {y, x};
  return e;
}

}  // namespace

TEST_CASE("generator structure") {
  SUBCASE("empty family gives the zero matrix") {
    const auto Q = build_generator(RateFamily(Lattice::torus({4}), {}));
    CHECK(Q.states() == 16);
    CHECK(Q.col.empty());
    for (double d : Q.diag) CHECK(d == 0.0);
  }
  SUBCASE("single transposition on two sites") {
    const auto Q = build_generator(2, {index_transposition(0, 1, 1.0)});
    CHECK(Q.states() == 4);
    CHECK(Q.entry(0b01, 0b10) == 1.0);
    CHECK(Q.entry(0b10, 0b01) == 1.0);
    CHECK(Q.entry(0b01, 0b01) == -1.0);
    CHECK(Q.entry(0b00, 0b00) == 0.0);
    CHECK(Q.entry(0b11, 0b11) == 0.0);
    CHECK(Q.row_ptr[1] == 0);  // state 00 has no moves
  }
  SUBCASE("3-cycle family on six sites") {
    const auto Q = build_generator(three_cycle(6));
    CHECK(Q.states() == 64);
    CHECK(Q.max_row_sum() <= 1e-12);
    CHECK(Q.sector_block_diagonal());
    for (double v : Q.val) CHECK(v > 0.0);
    // oracle: entries by direct permutation of configurations
    const auto lat = three_cycle(6).lattice();
    for (std::uint32_t c = 0; c < 64; ++c) {
      double out = 0.0;
      const auto eta = Configuration::from_code(lat, c);
      for (const auto& e : expand(three_cycle(6))) {
        const auto to = permuta::apply(e.perm, eta).code();
        if (to != c) out += e.rate;
      }
      CHECK(-Q.diag[c] == doctest::Approx(out));
    }
  }
  SUBCASE("size limits") {
    CHECK_THROWS_AS(build_generator(three_cycle(17)), Error);
    try {
      build_generator(three_cycle(17));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::TooLarge);
    }
    GeneratorOptions big;
    big.large = true;
    CHECK(build_generator(three_cycle(17), big).states() == (std::size_t{1} << 17));
  }
}

TEST_CASE("stationarity residuals") {
  for (const auto& fam : {three_cycle(8), three_cycle(8, 1.0, 3.0), single_three_cycle(7), transposition(6, 2.0, 2)}) {
    const auto Q = build_generator(fam);
    for (double rho : {0.0, 0.3, 0.5, 1.0}) CHECK(stationarity_residual(product_measure(rho, Q.sites), Q) <= 1e-12);
    for (std::size_t n = 0; n <= Q.sites; ++n) CHECK(stationarity_residual(uniform_on_sector(n, Q.sites), Q) <= 1e-12);
    std::vector<double> point(Q.states(), 0.0);
    point[0b101] = 1.0;
    CHECK(stationarity_residual(point, Q) > 0.0);
  }
  CHECK_THROWS_AS(stationarity_residual({1.0}, build_generator(three_cycle(6))), Error);
}

TEST_CASE("sector stationary laws") {
  const auto Q = build_generator(three_cycle(6));
  for (std::size_t n : {std::size_t{0}, std::size_t{6}}) {
    const auto s = sector_stationary(Q, n);
    CHECK(s.probabilities == std::vector<double>{1.0});
  }
  const auto s2 = sector_stationary(Q, 2);
  CHECK(s2.codes.size() == 15);
  for (double p : s2.probabilities) CHECK(std::abs(p - 1.0 / 15.0) <= 1e-10);

  const auto asym = sector_stationary(build_generator(three_cycle(6, 1.0, 3.0)), 2);
  for (double p : asym.probabilities) CHECK(std::abs(p - 1.0 / 15.0) <= 1e-10);

  // one particle: uniform law of the single-particle chain
  const auto s1 = sector_stationary(build_generator(three_cycle(6)), 1);
  for (double p : s1.probabilities) CHECK(std::abs(p - 1.0 / 6.0) <= 1e-10);

  const auto split = build_generator(transposition(6, 1.0, 2));
  CHECK_FALSE(sector_irreducible(split, 1));
  try {
    sector_stationary(split, 1);
    FAIL("expected SectorReducible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SectorReducible);
  }
}

TEST_CASE("Poisson weights") {
  const auto w = poisson_weights(30.0, 1e-12);
  double sum = 0.0;
  for (double x : w) sum += x;
  CHECK(sum >= 1.0 - 1e-11);
  CHECK(poisson_weights(0.0, 1e-12) == std::vector<double>{1.0});
  CHECK(poisson_weights(30.0, 1e-12, 5).size() == w.size() + 5);
  const auto big = poisson_weights(2000.0, 1e-12);
  double bsum = 0.0;
  for (double x : big) bsum += x;
  CHECK(bsum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exact duality") {
  const auto fam = three_cycle(6);
  const auto lat = fam.lattice();
  const auto eta0 = Configuration::from_bits(lat, "110100");

  const auto t0 = duality_exact(fam, eta0, {Site{0}, Site{1}}, 0.0);
  CHECK(t0.lhs == 1.0);
  CHECK(t0.rhs == 1.0);
  const auto t0b = duality_exact(fam, eta0, {Site{0}, Site{2}}, 0.0);
  CHECK(t0b.lhs == 0.0);
  CHECK(t0b.rhs == 0.0);
  const auto empty = duality_exact(fam, eta0, {}, 2.0);
  CHECK(empty.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(empty.rhs == doctest::Approx(1.0).epsilon(1e-12));

  // both sides against a dense matrix exponential
  const auto Q = build_generator(fam);
  for (double t : {0.1, 1.0, 3.0}) {
    const auto E = dense_expm(Q, t);
    for (const DualState& a : {DualState{Site{0}}, DualState{Site{0}, Site{1}}, DualState{Site{1}, Site{3}, Site{4}}}) {
      std::uint32_t mask = 0;
      for (const auto& x : a) mask |= 1u << lat.index(x);
      double oracle = 0.0;
      for (std::uint32_t c = 0; c < Q.states(); ++c)
        if ((c & mask) == mask) oracle += E[eta0.code()][c];
      const auto d = duality_exact(fam, eta0, a, t);
      CHECK(std::abs(d.lhs - oracle) <= 1e-10);
      CHECK(std::abs(d.rhs - d.lhs) <= 1e-9);
    }
  }

  CHECK_THROWS_AS(duality_exact(single_three_cycle(6), eta0, {Site{0}}, 1.0), Error);
  CHECK_THROWS_AS(duality_exact(three_cycle(17), Configuration(three_cycle(17).lattice()), {Site{0}}, 1.0), Error);
}

TEST_CASE("uniformization truncation is stable") {
  const auto fam = three_cycle(8);
  const auto eta0 = Configuration::from_bits(fam.lattice(), "11010000");
  for (double t : {0.1, 1.0, 10.0}) {
    UniformizationOptions more;
    more.extra_terms = 5;
    const auto base = duality_exact(fam, eta0, {Site{0}, Site{4}}, t);
    const auto ext = duality_exact(fam, eta0, {Site{0}, Site{4}}, t, more);
    CHECK(ext.terms_lhs == base.terms_lhs + 5);
    CHECK(std::abs(base.lhs - ext.lhs) < 1e-10);
    CHECK(std::abs(base.rhs - ext.rhs) < 1e-10);
  }
}

TEST_CASE("asymmetric duality falsifier") {
  const auto sym = asymmetric_duality_falsifier(three_cycle(6), 1.0);
  CHECK_FALSE(sym.witness_found);
  CHECK(sym.instances_checked == 15 * 64);
  CHECK(sym.max_gap <= 1e-9);

  const auto at0 = asymmetric_duality_falsifier(single_three_cycle(6), 0.0);
  CHECK_FALSE(at0.witness_found);

  const auto lone = asymmetric_duality_falsifier(single_three_cycle(6), 1.0);
  INFO(lone.summary);
  CHECK(lone.instances_checked == 15 * 64);
  CHECK_FALSE(lone.summary.empty());
  if (lone.witness_found) CHECK(std::abs(lone.lhs - lone.rhs) == doctest::Approx(lone.max_gap));
}
