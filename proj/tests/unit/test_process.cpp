#include "doctest.h"

#include <map>

#include "permuta/errors.hpp"
#include "permuta/parallel.hpp"
#include "permuta/process.hpp"
#include "support.hpp"

using namespace permuta;
using namespace testsupport;

TEST_CASE("counter RNG streams are reproducible and distinct") {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  CounterRng u(7, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += u.uniform();
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  double esum = 0.0;
  for (int i = 0; i < n; ++i) esum += u.exponential(4.0);
  CHECK(std::abs(esum / n - 0.25) < 5.0 * 0.25 / std::sqrt(n));
}

TEST_CASE("alias table reproduces the weights") {
  const std::vector<double> w{1.0, 0.0, 3.0, 6.0};
  AliasTable t(w);
  CHECK(t.total() == 10.0);
  CounterRng rng(5, 0);
  std::vector<double> counts(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[t.sample(rng)] += 1.0;
  CHECK(counts[1] == 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    const double p = w[i] / 10.0;
    CHECK(std::abs(counts[i] - n * p) <= 4.0 * std::sqrt(n * p * (1 - p)) + 1e-9);
  }
}

TEST_CASE("parallel map keeps replica order") {
  for (unsigned threads : {1u, 2u, 4u}) {
    const auto out = parallel_map(50, threads, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < 50; ++i) CHECK(out[i] == i * i);
  }
}

TEST_CASE("product sampling") {
  const auto lat = Lattice::torus({1000});
  CHECK(sample_product(0.0, lat, 1).popcount() == 0);
  CHECK(sample_product(1.0, lat, 1).popcount() == 1000);
  const auto half = sample_product(0.5, lat, 9).popcount();
  CHECK(std::abs(static_cast<double>(half) - 500.0) <= 5.0 * std::sqrt(250.0));
}

TEST_CASE("configuration runs") {
  const auto fam = three_cycle(6);
  const auto lat = fam.lattice();
  const auto eta0 = Configuration::from_bits(lat, "110100");

  const auto zero = run_config(eta0, fam, 0.0, 1);
  CHECK(zero.event_count == 0);
  CHECK(zero.terminal == eta0);

  const Configuration empty(lat);
  const auto full = Configuration::from_bits(lat, "111111");
  CHECK(run_config(empty, fam, 5.0, 2).terminal == empty);
  CHECK(run_config(full, fam, 5.0, 2).terminal == full);

  const auto t1 = run_config(eta0, fam, 10.0, 77);
  const auto t2 = run_config(eta0, fam, 10.0, 77);
  REQUIRE(t1.events.size() == t2.events.size());
  CHECK(t1.terminal == t2.terminal);
  for (std::size_t i = 0; i < t1.events.size(); ++i) {
    CHECK(t1.events[i].time == t2.events[i].time);
    CHECK(t1.events[i].perm_id == t2.events[i].perm_id);
    CHECK(t1.events[i].shift == t2.events[i].shift);
    CHECK(t1.events[i].popcount == 3);
    if (i) CHECK(t1.events[i - 1].time < t1.events[i].time);
  }
  CHECK_THROWS_AS(run_config(eta0, transposition(6, 1.0, 2), 1.0, 1), Error);
}

TEST_CASE("single particle equilibrates to the uniform law") {
  const auto fam = three_cycle(6);
  const ConfigSimulator sim(fam);
  const auto eta0 = Configuration::from_bits(fam.lattice(), "100000");
  const std::size_t n = 10000;
  auto where = parallel_map(n, 1, [&](std::size_t i) {
    CounterRng rng(2024, i);
    const auto out = sim.run(eta0, 20.0, rng, false).terminal;
    REQUIRE(out.popcount() == 1);
    return out.occupied()[0][0];
  });
  std::vector<double> counts(6, 0.0);
  for (auto x : where) counts[static_cast<std::size_t>(x)] += 1.0;
  const double p = 1.0 / 6.0, sd = std::sqrt(n * p * (1 - p));
  for (double c : counts) CHECK(std::abs(c - n * p) <= 4.0 * sd);
}

TEST_CASE("event count follows the total rate") {
  const auto fam = three_cycle(8, 0.5);
  const ConfigSimulator sim(fam);
  CHECK(sim.total_rate() == doctest::Approx(8.0));
  const auto eta0 = Configuration::from_bits(fam.lattice(), "10110010");
  const std::size_t n = 2000;
  const double T = 3.0;
  std::vector<double> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(31, i);
    counts[i] = static_cast<double>(sim.run(eta0, T, rng, false).event_count);
  }
  const auto est = Estimate::from_samples(counts);
  CHECK(std::abs(est.mean - 8.0 * T) <= 4.0 * est.std_error);
}

TEST_CASE("finite-support runs") {
  const auto inf = three_cycle(0);
  const FiniteSimulator sim(inf);
  CHECK(sim.effective_rate({Site{0}}) == 6.0);
  CHECK(sim.effective_rate({Site{100}}) == 6.0);
  CHECK(sim.effective_rate({Site{0}, Site{1}}) <= 2 * 6.0);
  CHECK(run_finite({}, inf, 10.0, 1).event_count == 0);

  SUBCASE("effective rate stays 6q for a single point") {
    const auto traj = run_finite({Site{0}}, inf, 5.0, 3);
    CHECK(traj.terminal.size() == 1);
    // every recorded step lands within 2 of the previous position
    DualState cur{Site{0}};
    for (const auto& e : traj.events) {
      const FiniteSimulator::Candidate c{e.perm_id, e.shift, 1.0};
      const auto next = sim.apply(c, cur);
      CHECK(std::abs(next[0][0] - cur[0][0]) <= 2);
      CHECK(sim.effective_rate(next) == 6.0);
      cur = next;
    }
    CHECK(cur == traj.terminal);
  }

  SUBCASE("jump weights from the origin match the covering permutations") {
    // oracle: enumerate shifts of both 3-cycles whose range holds 0
    std::map<std::int64_t, double> oracle;
    for (const auto& b : inf.base())
      for (std::int64_t y = -2; y <= 0; ++y) {
        const auto s = b.perm.shifted(Site{y}, inf.lattice());
        if (s.moves(Site{0})) oracle[s(Site{0})[0]] += b.rate;
      }
    CHECK(oracle == std::map<std::int64_t, double>{{-2, 1.0}, {-1, 2.0}, {1, 2.0}, {2, 1.0}});
    std::map<std::int64_t, double> from_sim;
    for (const auto& c : sim.candidates({Site{0}})) from_sim[sim.image(c, Site{0})[0]] += c.rate;
    CHECK(from_sim == oracle);

    const std::size_t n = 30000;
    std::map<std::int64_t, double> hits;
    for (std::size_t i = 0; i < n; ++i) {
      CounterRng rng(8, i);
      const auto tr = sim.run({Site{0}}, 0.05, rng, true);
      if (tr.events.empty()) continue;
      const FiniteSimulator::Candidate c{tr.events[0].perm_id, tr.events[0].shift, 1.0};
      hits[sim.image(c, Site{0})[0]] += 1.0;
    }
    double total = 0.0;
    for (auto& [k, v] : hits) total += v;
    for (const auto& [k, w] : oracle) {
      const double p = w / 6.0;
      CHECK(std::abs(hits[k] - total * p) <= 4.0 * std::sqrt(total * p * (1 - p)));
    }
  }

  SUBCASE("torus and unbounded samplers agree while nothing wraps") {
    const auto torus = three_cycle(1000);
    const FiniteSimulator tsim(torus);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CounterRng r1(seed, 0), r2(seed, 0);
      const auto a = sim.run({Site{500}, Site{503}}, 3.0, r1);
      const auto b = tsim.run({Site{500}, Site{503}}, 3.0, r2);
      REQUIRE(a.events.size() == b.events.size());
      for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].perm_id == b.events[i].perm_id);
        CHECK(torus.lattice().wrap(a.events[i].shift) == b.events[i].shift);
      }
      CHECK(a.terminal == b.terminal);
    }
  }
}

TEST_CASE("Monte Carlo duality") {
  const auto fam = three_cycle(8);
  const auto empty = duality_mc(ProductLaw{0.5}, {}, fam, 1.0, 200, 1);
  CHECK(empty.lhs.mean == 1.0);
  CHECK(empty.rhs.mean == 1.0);

  const auto prod = duality_mc(ProductLaw{0.5}, {Site{0}, Site{3}}, fam, 1.0, 20000, 2);
  CHECK(std::abs(prod.lhs.mean - 0.25) <= 4.0 * prod.lhs.std_error);
  CHECK(std::abs(prod.rhs.mean - 0.25) <= 4.0 * prod.rhs.std_error);

  CHECK_THROWS_AS(duality_mc(ProductLaw{0.5}, {Site{0}}, single_three_cycle(8), 1.0, 10, 1), Error);

  // identical across thread counts
  const auto eta0 = Configuration::from_bits(fam.lattice(), "11010000");
  const auto one = duality_mc(eta0, {Site{0}, Site{1}}, fam, 1.0, 500, 9, 1);
  const auto three = duality_mc(eta0, {Site{0}, Site{1}}, fam, 1.0, 500, 9, 3);
  CHECK(one.lhs.mean == three.lhs.mean);
  CHECK(one.rhs.mean == three.rhs.mean);
}
