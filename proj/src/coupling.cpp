#include "permuta/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "permuta/errors.hpp"
#include "permuta/parallel.hpp"

namespace permuta {

// ============================================================================
// Triple coupling
// ============================================================================

TripleSimulator::TripleSimulator(const RateFamily& fam) : fam_(fam) {
  require_simulatable(fam_);
  std::vector<double> w;
  for (std::size_t b = 0; b < fam_.base().size(); ++b) {
    ranges_.push_back(fam_.base()[b].perm.range());
    for (const auto& r : ranges_.back()) {
      cover_.push_back({b, r, fam_.base()[b].rate});
      w.push_back(fam_.base()[b].rate);
    }
  }
  alias_ = AliasTable(w);
}

TripleSimulator::Placed TripleSimulator::sample_cover(const Site& x, CounterRng& rng) const {
  const auto& e = cover_[alias_.sample(rng)];
  return {e.base, fam_.lattice().wrap(x - e.offset)};
}

bool TripleSimulator::covers(const Placed& p, const Site& x) const {
  const auto& lat = fam_.lattice();
  for (const auto& r : ranges_[p.base])
    if (lat.wrap(r + p.shift) == x) return true;
  return false;
}

Site TripleSimulator::image(const Placed& p, const Site& x) const {
  const auto& lat = fam_.lattice();
  const auto& perm = fam_.base()[p.base].perm;
  for (const auto& r : ranges_[p.base])
    if (lat.wrap(r + p.shift) == x) return lat.wrap(perm(r) + p.shift);
  return x;
}

TripleRun TripleSimulator::run(const PointPair& x_in, double horizon, CounterRng& rng, const TripleOptions& opt) const {
  const auto& lat = fam_.lattice();
  const PointPair x{lat.wrap(x_in.first), lat.wrap(x_in.second)};
  if (x.first == x.second) throw Error(ErrorKind::Precondition, "the two starting points must differ");
  if (!(horizon >= 0.0)) throw Error(ErrorKind::Precondition, "horizon must be non-negative");

  TripleRun out;
  TripleState st{x, x, x, false, std::nullopt};
  const double joint_rate = 2.0 * point_rate();
  double t = 0.0;

  // Joint phase: one arrival stream drives all three processes.
  while (true) {
    t += rng.exponential(joint_rate);
    if (t > horizon) break;
    const ClockCopy copy = rng.coin() ? ClockCopy::Second : ClockCopy::First;
    const Site& mover = copy == ClockCopy::First ? st.I.first : st.I.second;
    const Placed p = sample_cover(mover, rng);
    const bool both = covers(p, st.I.first) && covers(p, st.I.second);
    const bool acts_on_E = copy == ClockCopy::First || !covers(p, st.E.first);

    if (copy == ClockCopy::First)
      st.I.first = image(p, st.I.first);
    else
      st.I.second = image(p, st.I.second);
    st.J = {image(p, st.J.first), image(p, st.J.second)};
    if (acts_on_E) st.E = {image(p, st.E.first), image(p, st.E.second)};
    ++out.joint_arrivals;

    if (both) {
      ++out.both_point_arrivals;
      st.decoupled = true;
      st.T_dec = t;
      out.J_both = t;
      if (acts_on_E) {
        ++out.both_point_acted_on_E;
        out.E_both = t;
      }
      if (st.I.first == st.I.second) out.I_meet = t;
    } else if (!(st.I == st.J && st.J == st.E) || st.I.first == st.I.second) {
      throw Error(ErrorKind::InvariantViolation, "I, J and E separated before a both-point arrival");
    }
    if (opt.record) out.joint_events.push_back({t, copy, p.base, p.shift, both, acts_on_E, st});
    if (both) break;
  }

  if (st.decoupled) {
    const double t0 = *st.T_dec;
    // I: two independent one-point processes.
    for (double tau = t0;;) {
      if (opt.stop_when_resolved && out.I_meet) break;
      tau += rng.exponential(joint_rate);
      if (tau > horizon) break;
      const bool second = rng.coin();
      Site& pt = second ? st.I.second : st.I.first;
      pt = image(sample_cover(pt, rng), pt);
      if (!out.I_meet && st.I.first == st.I.second) out.I_meet = tau;
    }
    // J: two-point process with doubled rates on permutations covering both.
    if (!opt.stop_when_resolved) {
      for (double tau = t0;;) {
        tau += rng.exponential(joint_rate);
        if (tau > horizon) break;
        const bool second = rng.coin();
        const Placed p = sample_cover(second ? st.J.second : st.J.first, rng);
        st.J = {image(p, st.J.first), image(p, st.J.second)};
      }
    }
    // E: two-point permutation process, the second clock copy thinned on Σ₁.
    for (double tau = t0;;) {
      if (opt.stop_when_resolved && out.E_both) break;
      tau += rng.exponential(joint_rate);
      if (tau > horizon) break;
      const bool second = rng.coin();
      const Placed p = sample_cover(second ? st.E.second : st.E.first, rng);
      if (second && covers(p, st.E.first)) continue;
      const bool both = covers(p, st.E.first) && covers(p, st.E.second);
      st.E = {image(p, st.E.first), image(p, st.E.second)};
      if (both && !out.E_both) out.E_both = tau;
    }
  }
  out.final_state = st;
  return out;
}

TripleRun run_triple(const PointPair& x, const RateFamily& fam, double horizon, std::uint64_t seed,
                     const TripleOptions& opt) {
  TripleSimulator sim(fam);
  CounterRng rng(seed, 0);
  return sim.run(x, horizon, rng, opt);
}

GEstimates estimate_g(const PointPair& x, const RateFamily& fam, double horizon, std::size_t n, std::uint64_t seed,
                      unsigned threads) {
  if (n == 0) throw Error(ErrorKind::Precondition, "need at least one replica");
  const TripleSimulator sim(fam);
  TripleOptions opt;
  opt.record = false;
  opt.stop_when_resolved = true;
  auto runs = parallel_map(n, threads, [&](std::size_t i) {
    CounterRng rng(seed, i);
    return sim.run(x, horizon, rng, opt);
  });
  GEstimates g;
  g.horizon = horizon;
  std::vector<double> i_hit, e_hit, j_hit, acted;
  for (const auto& r : runs) {
    i_hit.push_back(r.I_meet ? 1.0 : 0.0);
    e_hit.push_back(r.E_both ? 1.0 : 0.0);
    j_hit.push_back(r.J_both ? 1.0 : 0.0);
    if (r.both_point_arrivals) acted.push_back(r.both_point_acted_on_E ? 1.0 : 0.0);
    if (r.E_both && (!r.J_both || *r.E_both < *r.J_both)) ++g.e_before_j;
    if (r.I_meet && (!r.J_both || *r.I_meet < *r.J_both)) ++g.i_before_j;
    if (r.I_meet && !r.E_both) ++g.i_without_e;
  }
  g.g2 = Estimate::from_samples(i_hit);
  g.gbar2 = Estimate::from_samples(e_hit);
  g.gbarbar2 = Estimate::from_samples(j_hit);
  if (!acted.empty()) g.e_acts_at_decoupling = Estimate::from_samples(acted);
  return g;
}

std::vector<InequalityCheck> check_g_inequalities(const GEstimates& g, const FamilyReport& rep) {
  auto make = [](std::string name, const Estimate& l, const Estimate& r, double coef) {
    InequalityCheck c;
    c.name = std::move(name);
    c.lhs = l.mean;
    c.rhs = coef * r.mean;
    c.allowance = 3.0 * std::sqrt(l.std_error * l.std_error + coef * coef * r.std_error * r.std_error);
    c.pass = c.lhs >= c.rhs - c.allowance;
    return c;
  };
  std::vector<InequalityCheck> out;
  out.push_back(make("gbarbar2 >= gbar2", g.gbarbar2, g.gbar2, 1.0));
  out.push_back(make("gbar2 >= g2", g.gbar2, g.g2, 1.0));
  out.push_back(make("gbar2 >= gbarbar2/2", g.gbar2, g.gbarbar2, 0.5));
  if (rep.M_II) {
    const double coef = 1.0 / (*rep.M_II * static_cast<double>(derangement_count(rep.M_I)));
    out.push_back(make("g2 >= gbarbar2/(M_II*P(M_I))", g.g2, g.gbarbar2, coef));
  } else {
    out.push_back({"g2 >= gbarbar2/(M_II*P(M_I))", g.g2.mean, 0.0, 0.0, false});
  }
  return out;
}

// ============================================================================
// Coupled configurations
// ============================================================================

CoupledState make_coupled_state(const Configuration& a, const Configuration& b) {
  if (!(a.lattice() == b.lattice())) throw Error(ErrorKind::Precondition, "coupled copies must share a lattice");
  CoupledState st{a, b, {}, {}};
  for (std::size_t i = 0; i < a.site_count(); ++i) {
    if (a.get(i) && !b.get(i)) st.d_plus.push_back(a.lattice().site_at(i));
    if (!a.get(i) && b.get(i)) st.d_minus.push_back(a.lattice().site_at(i));
  }
  return st;
}

std::string to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::Staircase: return "staircase";
    case TransitionKind::Diagonal: return "diagonal";
    case TransitionKind::OffRange: return "off-range";
  }
  return "?";
}

Word word_on(const RangeGroup& g, const Configuration& eta) {
  Word w = 0;
  for (std::size_t j = 0; j < g.site_index.size(); ++j)
    if (eta.get(g.site_index[j])) w |= Word{1} << j;
  return w;
}

int discrepancies(Word a, Word b) { return popcount(a ^ b); }

namespace {

constexpr double kTiny = 1e-300;

/// Member index of σ^i for i = 0..k-1 (index 0 unused), or nullopt if some
/// power is missing from the family.
std::optional<std::vector<std::size_t>> power_members(const RangeGroup& g, const PositionPerm& sigma) {
  const std::size_t k = sigma.size();
  std::vector<std::size_t> out(k, 0);
  PositionPerm p = sigma;
  for (std::size_t i = 1; i < k; ++i) {
    auto m = g.member_with(p);
    if (!m) return std::nullopt;
    out[i] = *m;
    p = compose_positions(sigma, p);
  }
  return out;
}

std::optional<std::size_t> select_for_group(const RangeGroup& g, Word a, Word b, SelectionPolicy policy) {
  const std::size_t k = g.base_range.size();
  const auto& cands = cyclic_position_perms(k);
  return select_cover_index(k, a, b, policy,
                            [&](std::size_t i) { return power_members(g, cands[i]).has_value(); });
}

void add_diagonals(const RangeGroup& g, const std::vector<std::size_t>& powers, std::vector<TableEntry>& out) {
  for (std::size_t j = 0; j < g.members.size(); ++j) {
    const bool is_power = std::find(powers.begin() + 1, powers.end(), j) != powers.end();
    const double rate = g.members[j].rate - (is_power ? g.m : 0.0);
    if (rate > kTiny) out.push_back({j, j, rate, TransitionKind::Diagonal, 0});
  }
}

std::vector<TableEntry> off_range_table(const RangeGroup& g) {
  std::vector<TableEntry> out;
  for (std::size_t j = 0; j < g.members.size(); ++j)
    out.push_back({j, j, g.members[j].rate, TransitionKind::OffRange, 0});
  return out;
}

}  // namespace

std::vector<TableEntry> recurrent_table(const RangeGroup& g, Word a, Word b, bool holds_both, SelectionPolicy policy) {
  if (!holds_both) return off_range_table(g);
  if (popcount(a) != popcount(b) || popcount(a ^ b) != 2)
    throw Error(ErrorKind::Precondition, "the range must hold exactly one discrepancy of each type");
  const std::size_t k = g.base_range.size();
  auto idx = select_for_group(g, a, b, policy);
  if (!idx) throw Error(ErrorKind::NoCover, "no cyclic permutation of the range maps A onto B");
  const auto powers = *power_members(g, cyclic_position_perms(k)[*idx]);
  std::vector<TableEntry> out;
  if (k == 2) {
    out.push_back({powers[1], std::nullopt, g.m, TransitionKind::Staircase, 1});
    out.push_back({std::nullopt, powers[1], g.m, TransitionKind::Staircase, 2});
  } else {
    for (std::size_t i = 1; i + 1 < k; ++i)
      out.push_back({powers[i + 1], powers[i], g.m, TransitionKind::Staircase, static_cast<int>(i)});
    out.push_back({powers[1], powers[k - 1], g.m, TransitionKind::Staircase, static_cast<int>(k - 1)});
  }
  add_diagonals(g, powers, out);
  return out;
}

std::vector<TableEntry> general_table(const RangeGroup& g, Word a, Word b, SelectionPolicy policy) {
  if (a == b) return off_range_table(g);
  const std::size_t k = g.base_range.size();
  const bool a_major = popcount(a) >= popcount(b);
  auto idx = a_major ? select_for_group(g, a, b, policy) : select_for_group(g, b, a, policy);
  if (!idx) throw Error(ErrorKind::NoCover, "no cyclic permutation of the range covers the smaller word");
  const auto powers = *power_members(g, cyclic_position_perms(k)[*idx]);
  auto member = [&](std::size_t i) -> std::optional<std::size_t> {
    if (i == 0 || i == k) return std::nullopt;
    return powers[i];
  };
  std::vector<TableEntry> out;
  for (std::size_t i = 1; i <= k; ++i) {
    if (a_major)
      out.push_back({member(i), member(i - 1), g.m, TransitionKind::Staircase, static_cast<int>(i)});
    else
      out.push_back({member(i - 1), member(i), g.m, TransitionKind::Staircase, static_cast<int>(i)});
  }
  add_diagonals(g, powers, out);
  return out;
}

CouplingEngine::CouplingEngine(const RateFamily& fam, Kind kind, const CouplingOptions& opt)
    : fam_(fam), kind_(kind), opt_(opt) {
  require_simulatable(fam_);
  if (!fam_.lattice().is_torus()) throw Error(ErrorKind::Precondition, "coupled configurations need a torus");
  const auto closure = check_range_closure(fam_, opt_.closure);
  if (!closure.pass) throw Error(ErrorKind::NotRangeClosed, closure.detail);
  expanded_ = expand(fam_);
  groups_ = range_groups(fam_, expanded_);
  for (const auto& g : groups_) {
    const bool pair_range = g.base_range.size() == 2;
    budget_.push_back(g.Z + ((kind_ == Kind::General || pair_range) ? g.m : 0.0));
  }
  alias_ = AliasTable(budget_);
}

CouplingRun CouplingEngine::run(const Configuration& a0, const Configuration& b0, double horizon,
                                CounterRng& rng) const {
  const auto& lat = fam_.lattice();
  if (!(a0.lattice() == lat) || !(b0.lattice() == lat))
    throw Error(ErrorKind::Precondition, "configurations must live on the family's torus");
  if (!(horizon >= 0.0)) throw Error(ErrorKind::Precondition, "horizon must be non-negative");

  Configuration A = a0, B = b0;
  std::size_t d_plus = 0, d_minus = 0;
  for (std::size_t w = 0; w < A.words().size(); ++w) {
    d_plus += static_cast<std::size_t>(std::popcount(A.words()[w] & ~B.words()[w]));
    d_minus += static_cast<std::size_t>(std::popcount(~A.words()[w] & B.words()[w]));
  }
  if (kind_ == Kind::Recurrent && !(d_plus == 1 && d_minus == 1))
    throw Error(ErrorKind::BadInitial, "the recurrent coupling starts from exactly one discrepancy of each type");

  CouplingRun out;
  out.a_counts.assign(fam_.base().size(), 0);
  out.b_counts.assign(fam_.base().size(), 0);
  out.initial_D = d_plus + d_minus;
  if (out.initial_D == 0) {
    out.coupled = true;
    out.T_couple = 0.0;
  }

  const double total = alias_.total();
  double t = 0.0;
  while (true) {
    if (opt_.stop_on_merge && out.coupled) break;
    t += rng.exponential(total);
    if (t > horizon) break;
    const std::size_t gi = alias_.sample(rng);
    const auto& g = groups_[gi];
    const Word wa = word_on(g, A), wb = word_on(g, B);
    double u = rng.uniform() * budget_[gi];

    const bool holds_both = kind_ == Kind::Recurrent && popcount(wa ^ wb) == 2;
    const bool plain = kind_ == Kind::Recurrent ? !holds_both : wa == wb;
    const auto table = plain ? off_range_table(g)
                             : (kind_ == Kind::Recurrent ? recurrent_table(g, wa, wb, true, opt_.policy)
                                                         : general_table(g, wa, wb, opt_.policy));
    const TableEntry* pick = nullptr;
    for (const auto& e : table) {
      if (u < e.rate) {
        pick = &e;
        break;
      }
      u -= e.rate;
    }
    if (!pick) continue;  // thinned arrival

    if (pick->a_member) {
      const auto& ex = expanded_[g.members[*pick->a_member].expanded];
      apply_in_place(ex, A);
      ++out.a_counts[ex.base];
    }
    if (pick->b_member) {
      const auto& ex = expanded_[g.members[*pick->b_member].expanded];
      apply_in_place(ex, B);
      ++out.b_counts[ex.base];
    }
    ++out.events;

    const Word na = word_on(g, A), nb = word_on(g, B);
    const std::size_t before = d_plus + d_minus;
    const auto dp_before = static_cast<std::size_t>(popcount(wa & ~wb));
    const auto dm_before = static_cast<std::size_t>(popcount(~wa & wb));
    const auto dp_after = static_cast<std::size_t>(popcount(na & ~nb));
    const auto dm_after = static_cast<std::size_t>(popcount(~na & nb));
    if (dp_after > dp_before || dm_after > dm_before)
      throw Error(ErrorKind::InvariantViolation, "a discrepancy count increased");
    d_plus = d_plus - dp_before + dp_after;
    d_minus = d_minus - dm_before + dm_after;
    const std::size_t after = d_plus + d_minus;
    if (kind_ == Kind::Recurrent && after != 0 && after != 2)
      throw Error(ErrorKind::InvariantViolation, "the recurrent coupling left the {0, 2} discrepancy states");

    if (holds_both) {
      ++out.both_discrepancy_events;
      if (after == 0) ++out.merges;
    }
    if (after == 0 && !out.coupled) {
      out.coupled = true;
      out.T_couple = t;
    }
    if (opt_.record) out.log.push_back({t, pick->kind, pick->step, gi, before, after});
  }
  out.final_state = make_coupled_state(A, B);
  if (out.final_state->d_plus.size() != d_plus || out.final_state->d_minus.size() != d_minus)
    throw Error(ErrorKind::InvariantViolation, "discrepancy bookkeeping diverged");
  return out;
}

CouplingRun run_recurrent_coupling(const Configuration& a0, const Configuration& b0, const RateFamily& fam,
                                   double horizon, std::uint64_t seed, const CouplingOptions& opt) {
  CouplingEngine eng(fam, CouplingEngine::Kind::Recurrent, opt);
  CounterRng rng(seed, 0);
  return eng.run(a0, b0, horizon, rng);
}

CouplingRun run_general_coupling(const Configuration& a0, const Configuration& b0, const RateFamily& fam,
                                 double horizon, std::uint64_t seed, const CouplingOptions& opt) {
  CouplingEngine eng(fam, CouplingEngine::Kind::General, opt);
  CounterRng rng(seed, 0);
  return eng.run(a0, b0, horizon, rng);
}

std::string coupling_log_csv(const CouplingRun& run) {
  std::ostringstream os;
  os.precision(17);
  os << "time,kind,step,range_id,D_before,D_after\n";
  for (const auto& e : run.log)
    os << e.time << ',' << to_string(e.kind) << ',' << e.step << ',' << e.group << ',' << e.D_before << ','
       << e.D_after << '\n';
  return os.str();
}

// ============================================================================
// Lemmas
// ============================================================================

LemmaReport lemma_D_monotone(int max_range, SelectionPolicy policy) {
  if (max_range < 2 || max_range > 5) throw Error(ErrorKind::Precondition, "max_range must lie in [2, 5]");
  LemmaReport rep;
  rep.max_range = max_range;
  for (int r = 2; r <= max_range; ++r) {
    const auto k = static_cast<std::size_t>(r);
    const auto& cands = cyclic_position_perms(k);
    const Word full = (Word{1} << r) - 1;
    for (Word a = 0; a <= full; ++a)
      for (Word b = 0; b <= full; ++b) {
        // orient so that `big` carries at least as many particles
        const bool a_major = popcount(a) >= popcount(b);
        const Word big = a_major ? a : b, small = a_major ? b : a;
        ++rep.pairs_checked;
        auto idx = select_cover_index(k, big, small, policy);
        if (!idx) {
          if (a == b && a != 0 && a != full)
            ++rep.equal_word_exceptions;
          else
            ++rep.missing_covers;
          continue;
        }
        ++rep.covers_found;
        const auto& sigma = cands[*idx];
        const int d0 = discrepancies(a, b);
        const int d1 = discrepancies(apply_word(sigma, big), small);
        const int excess = popcount(big & ~small);  // discrepancies of the majorizing type
        const int deficit = popcount(~big & small & full);
        if (d1 > d0) ++rep.monotone_violations;
        if ((d1 == d0) != (deficit == 0)) ++rep.equality_violations;
        if (excess > 0 && deficit > 0 && !(d1 < d0)) ++rep.strictness_violations;
        // every staircase step (σ^i big, σ^{i-1} small) has the same count
        PositionPerm lo = identity_positions(k), hi = sigma;
        for (int i = 1; i <= r; ++i) {
          if (discrepancies(apply_word(hi, big), apply_word(lo, small)) != d1) ++rep.monotone_violations;
          lo = hi;
          hi = compose_positions(sigma, hi);
        }
        if (popcount(a) == popcount(b) && popcount(a ^ b) == 2) {
          ++rep.two_discrepancy_pairs;
          if (apply_word(sigma, big) != small) ++rep.two_discrepancy_failures;
        }
      }
  }
  return rep;
}

SuccessBoundReport success_bound_check(const RateFamily& fam, std::size_t n, std::uint64_t seed, double horizon,
                                       unsigned threads) {
  const auto& lat = fam.lattice();
  if (!lat.is_torus()) throw Error(ErrorKind::Precondition, "the success-bound check runs on a torus");
  if (lat.dim() > 2) throw Error(ErrorKind::Precondition, "the success-bound check targets recurrent families (d <= 2)");
  const auto rep = report(fam);
  if (!rep.M_II) throw Error(ErrorKind::NotRangeClosed, "the bound needs a range-closed family");
  SuccessBoundReport out;
  out.bound = 1.0 / (static_cast<double>(derangement_count(rep.M_I)) * *rep.M_II);

  CouplingOptions opt;
  opt.record = false;
  opt.stop_on_merge = true;
  const CouplingEngine eng(fam, CouplingEngine::Kind::Recurrent, opt);
  const Site origin{}, step = lat.dim() == 1 ? Site{1} : Site{1, 0};
  auto runs = parallel_map(n, threads, [&](std::size_t i) {
    CounterRng rng(seed, i);
    Configuration a = sample_product(0.5, lat, rng);
    a.set(origin, true);
    a.set(step, false);
    Configuration b = a;
    b.set(origin, false);
    b.set(step, true);
    const auto run = eng.run(a, b, horizon, rng);
    return std::make_pair(run.both_discrepancy_events, run.merges);
  });
  std::vector<double> outcomes;
  for (const auto& [events, merges] : runs) {
    out.events += events;
    out.merges += merges;
    for (std::size_t k = 0; k < events; ++k) outcomes.push_back(k < merges ? 1.0 : 0.0);
  }
  if (outcomes.empty()) throw Error(ErrorKind::Precondition, "no both-discrepancy events before the horizon");
  out.fraction = Estimate::from_samples(outcomes);
  out.pass = out.fraction.mean >= out.bound - 3.0 * out.fraction.std_error;
  return out;
}

}  // namespace permuta
