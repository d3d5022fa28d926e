#include "permuta/process.hpp"

#include <algorithm>
#include <cmath>

#include "permuta/errors.hpp"
#include "permuta/parallel.hpp"

namespace permuta {

DualState make_dual_state(std::vector<Site> sites, const Lattice& lat) {
  for (auto& s : sites) {
    if (lat.is_torus() && !lat.contains(s)) throw Error(ErrorKind::Precondition, "site outside the torus");
    s = lat.wrap(s);
  }
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
    throw Error(ErrorKind::Precondition, "dual state sites must be distinct");
  return sites;
}

Estimate Estimate::from_samples(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(ErrorKind::Precondition, "an estimate needs at least one sample");
  Estimate e;
  e.n = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(e.n - 1)) / std::sqrt(static_cast<double>(e.n));
  }
  return e;
}

Configuration sample_product(double rho, const Lattice& lat, CounterRng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorKind::Precondition, "rho must lie in [0, 1]");
  Configuration eta(lat);
  for (std::size_t i = 0; i < eta.site_count(); ++i) eta.set(i, rng.uniform() < rho);
  return eta;
}

Configuration sample_product(double rho, const Lattice& lat, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  return sample_product(rho, lat, rng);
}

void apply_in_place(const ExpandedPermutation& e, Configuration& eta) {
  bool bits[64];
  const std::size_t k = e.from.size();
  if (k > 64) throw Error(ErrorKind::Precondition, "ranges above 64 sites are not supported");
  for (std::size_t j = 0; j < k; ++j) bits[j] = eta.get(e.from[j]);
  for (std::size_t j = 0; j < k; ++j) eta.set(e.to[j], bits[j]);
}

namespace {

std::vector<double> rates_of(const std::vector<ExpandedPermutation>& ex) {
  std::vector<double> w;
  w.reserve(ex.size());
  for (const auto& e : ex) w.push_back(e.rate);
  return w;
}

}  // namespace

ConfigSimulator::ConfigSimulator(const RateFamily& fam) {
  require_simulatable(fam);
  if (!fam.lattice().is_torus()) throw Error(ErrorKind::Precondition, "configuration runs need a torus");
  expanded_ = expand(fam);
  alias_ = AliasTable(rates_of(expanded_));
}

Trajectory<Configuration> ConfigSimulator::run(const Configuration& eta0, double horizon, CounterRng& rng,
                                               bool record_events) const {
  if (!(horizon >= 0.0)) throw Error(ErrorKind::Precondition, "horizon must be non-negative");
  Trajectory<Configuration> traj{0, {}, 0, eta0};
  auto& eta = traj.terminal;
  const std::size_t particles = eta.popcount();
  const double total = alias_.total();
  double t = 0.0;
  while (true) {
    t += rng.exponential(total);
    if (t > horizon) break;
    const auto& e = expanded_[alias_.sample(rng)];
    apply_in_place(e, eta);
    ++traj.event_count;
    if (record_events) traj.events.push_back({t, e.base, e.shift, particles});
  }
  if (eta.popcount() != particles) throw Error(ErrorKind::InvariantViolation, "particle number changed during a run");
  return traj;
}

FiniteSimulator::FiniteSimulator(const RateFamily& fam) : fam_(fam) {
  require_simulatable(fam);
  for (const auto& b : fam_.base()) ranges_.push_back(b.perm.range());
}

std::vector<FiniteSimulator::Candidate> FiniteSimulator::candidates(const DualState& a) const {
  const auto& lat = fam_.lattice();
  std::vector<Candidate> out;
  for (const auto& x : a)
    for (std::size_t b = 0; b < ranges_.size(); ++b)
      for (const auto& r : ranges_[b]) {
        const Site y = lat.wrap(x - r);
        bool dup = false;
        for (const auto& c : out) dup = dup || (c.base == b && c.shift == y);
        if (!dup) out.push_back({b, y, fam_.base()[b].rate});
      }
  return out;
}

double FiniteSimulator::effective_rate(const DualState& a) const {
  double total = 0.0;
  for (const auto& c : candidates(a)) total += c.rate;
  return total;
}

Site FiniteSimulator::image(const Candidate& c, const Site& x) const {
  const auto& lat = fam_.lattice();
  const auto& perm = fam_.base()[c.base].perm;
  for (const auto& r : ranges_[c.base])
    if (lat.wrap(r + c.shift) == x) return lat.wrap(perm(r) + c.shift);
  return x;
}

bool FiniteSimulator::covers(const Candidate& c, const Site& x) const {
  const auto& lat = fam_.lattice();
  for (const auto& r : ranges_[c.base])
    if (lat.wrap(r + c.shift) == x) return true;
  return false;
}

DualState FiniteSimulator::apply(const Candidate& c, const DualState& a) const {
  DualState out;
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(image(c, x));
  std::sort(out.begin(), out.end());
  return out;
}

Trajectory<DualState> FiniteSimulator::run(const DualState& a0, double horizon, CounterRng& rng,
                                           bool record_events) const {
  if (!(horizon >= 0.0)) throw Error(ErrorKind::Precondition, "horizon must be non-negative");
  Trajectory<DualState> traj{0, {}, 0, a0};
  auto& a = traj.terminal;
  if (a.empty()) return traj;
  const std::size_t size = a.size();
  double t = 0.0;
  auto cands = candidates(a);
  double total = 0.0;
  for (const auto& c : cands) total += c.rate;
  while (true) {
    t += rng.exponential(total);
    if (t > horizon) break;
    double u = rng.uniform() * total;
    std::size_t pick = cands.size() - 1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (u < cands[i].rate) {
        pick = i;
        break;
      }
      u -= cands[i].rate;
    }
    const auto& c = cands[pick];
    a = apply(c, a);
    ++traj.event_count;
    if (record_events) traj.events.push_back({t, c.base, c.shift, a.size()});
    if (a.size() != size || std::adjacent_find(a.begin(), a.end()) != a.end())
      throw Error(ErrorKind::InvariantViolation, "set size changed during a run");
    cands = candidates(a);
    total = 0.0;
    for (const auto& cc : cands) total += cc.rate;
  }
  return traj;
}

Trajectory<Configuration> run_config(const Configuration& eta0, const RateFamily& fam, double horizon,
                                     std::uint64_t seed) {
  ConfigSimulator sim(fam);
  CounterRng rng(seed, 0);
  auto traj = sim.run(eta0, horizon, rng);
  traj.seed = seed;
  return traj;
}

Trajectory<DualState> run_finite(const DualState& a0, const RateFamily& fam, double horizon, std::uint64_t seed) {
  FiniteSimulator sim(fam);
  CounterRng rng(seed, 0);
  auto traj = sim.run(make_dual_state(a0, fam.lattice()), horizon, rng);
  traj.seed = seed;
  return traj;
}

bool all_occupied(const Configuration& eta, const DualState& a) {
  for (const auto& x : a)
    if (!eta.get(x)) return false;
  return true;
}

DualityEstimate duality_mc(const InitialLaw& mu0, const DualState& a_in, const RateFamily& fam, double t,
                           std::size_t n, std::uint64_t seed, unsigned threads) {
  if (!check_symmetry(fam)) throw Error(ErrorKind::NotSymmetric, "duality requires q(σ) = q(σ⁻¹)");
  if (n == 0) throw Error(ErrorKind::Precondition, "need at least one replica");
  const auto& lat = fam.lattice();
  if (!lat.is_torus()) throw Error(ErrorKind::Precondition, "duality checks run on a torus");
  if (auto* eta = std::get_if<Configuration>(&mu0); eta && !(eta->lattice() == lat))
    throw Error(ErrorKind::Precondition, "initial configuration lives on another lattice");
  const DualState a = make_dual_state(a_in, lat);
  const ConfigSimulator csim(fam);
  const FiniteSimulator fsim(fam);

  auto draw_initial = [&](CounterRng& rng) {
    if (auto* law = std::get_if<ProductLaw>(&mu0)) return sample_product(law->rho, lat, rng);
    return std::get<Configuration>(mu0);
  };

  struct Pair {
    double lhs = 0.0, rhs = 0.0;
  };
  auto results = parallel_map(n, threads, [&](std::size_t i) {
    Pair p;
    CounterRng lrng(seed, 2 * i);
    const auto eta0 = draw_initial(lrng);
    p.lhs = all_occupied(csim.run(eta0, t, lrng, false).terminal, a) ? 1.0 : 0.0;
    CounterRng rrng(seed, 2 * i + 1);
    const auto eta0r = draw_initial(rrng);
    p.rhs = all_occupied(eta0r, fsim.run(a, t, rrng, false).terminal) ? 1.0 : 0.0;
    return p;
  });
  std::vector<double> l, r;
  l.reserve(n);
  r.reserve(n);
  for (const auto& p : results) {
    l.push_back(p.lhs);
    r.push_back(p.rhs);
  }
  return {Estimate::from_samples(l), Estimate::from_samples(r)};
}

}  // namespace permuta
