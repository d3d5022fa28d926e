#ifndef PERMUTA_COUPLING_HPP
#define PERMUTA_COUPLING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "permuta/alias.hpp"
#include "permuta/configuration.hpp"
#include "permuta/process.hpp"
#include "permuta/rates.hpp"
#include "permuta/rng.hpp"

namespace permuta {

// ============================================================================
// Two-point triple coupling (I, J, E)
// ============================================================================

struct PointPair {
  Site first;
  Site second;
  bool operator==(const PointPair&) const = default;
};

struct TripleState {
  PointPair I;
  PointPair J;
  PointPair E;
  bool decoupled = false;
  std::optional<double> T_dec;
};

enum class ClockCopy { First, Second };

struct TripleEvent {
  double time = 0.0;
  ClockCopy copy = ClockCopy::First;
  std::size_t base = 0;
  Site shift;
  bool covers_both = false;
  bool acted_on_E = false;
  TripleState after;
};

struct TripleOptions {
  bool record = true;
  /// Stop each component once its first-passage event has been seen.
  bool stop_when_resolved = false;
};

struct TripleRun {
  std::vector<TripleEvent> joint_events;  // events before (and at) decoupling
  TripleState final_state;
  std::optional<double> I_meet;   // first time I₁ = I₂
  std::optional<double> J_both;   // first J jump moving both points
  std::optional<double> E_both;   // first E jump moving both points
  std::size_t joint_arrivals = 0;
  std::size_t both_point_arrivals = 0;  // in the joint phase: 0 or 1
  std::size_t both_point_acted_on_E = 0;
};

/// Shared-clock construction: the clocks of Σ₁(t) and Σ₂(t) run separately
/// (a permutation covering both points has two clocks). Copy k moves I_k only;
/// J takes every arrival; E takes arrivals from Σ₁ and from Σ₂ \ Σ₁. After
/// the first arrival covering both points the three evolve independently.
class TripleSimulator {
 public:
  explicit TripleSimulator(const RateFamily& fam);

  TripleRun run(const PointPair& x, double horizon, CounterRng& rng, const TripleOptions& opt = {}) const;

  /// Σ_{σ ∋ x} q(σ); equals M_PL for a shift-invariant family.
  double point_rate() const { return alias_.total(); }

 private:
  struct CoverEntry {
    std::size_t base;
    Site offset;  // site of the anchored range that lands on the point
    double rate;
  };
  struct Placed {
    std::size_t base;
    Site shift;
  };

  Placed sample_cover(const Site& x, CounterRng& rng) const;
  bool covers(const Placed& p, const Site& x) const;
  Site image(const Placed& p, const Site& x) const;

  RateFamily fam_;
  std::vector<std::vector<Site>> ranges_;
  std::vector<CoverEntry> cover_;
  AliasTable alias_;
};

TripleRun run_triple(const PointPair& x, const RateFamily& fam, double horizon, std::uint64_t seed,
                     const TripleOptions& opt = {});

struct GEstimates {
  Estimate g2;        // I₁ and I₂ meet before the horizon
  Estimate gbar2;     // E has a jump moving both points before the horizon
  Estimate gbarbar2;  // J has a jump moving both points before the horizon
  double horizon = 0.0;
  /// Runs where E's both-point jump preceded J's (never possible).
  std::size_t e_before_j = 0;
  /// Runs where I met before J's both-point jump (never possible).
  std::size_t i_before_j = 0;
  /// Runs where I met before the horizon but E had no both-point jump.
  std::size_t i_without_e = 0;
  /// Fraction of decoupling arrivals that acted on E.
  Estimate e_acts_at_decoupling;
};

GEstimates estimate_g(const PointPair& x, const RateFamily& fam, double horizon, std::size_t n, std::uint64_t seed,
                      unsigned threads = 1);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double allowance = 0.0;  // lhs ≥ rhs − allowance
  bool pass = false;
};

/// One-sided 3σ checks of ḡ̄₂ ≥ ḡ₂, ḡ₂ ≥ g₂, ḡ₂ ≥ ½ḡ̄₂ and
/// g₂ ≥ ḡ̄₂ / (M_II·𝒫(M_I)).
std::vector<InequalityCheck> check_g_inequalities(const GEstimates& g, const FamilyReport& rep);

// ============================================================================
// Coupled configurations
// ============================================================================

struct CoupledState {
  Configuration A;
  Configuration B;
  std::vector<Site> d_plus;   // A = 1, B = 0
  std::vector<Site> d_minus;  // A = 0, B = 1
};

CoupledState make_coupled_state(const Configuration& a, const Configuration& b);

enum class TransitionKind { Staircase, Diagonal, OffRange };

std::string to_string(TransitionKind kind);

/// One row of a coupled rate table on a range group. Members index into
/// RangeGroup::members; nullopt leaves that copy unchanged.
struct TableEntry {
  std::optional<std::size_t> a_member;
  std::optional<std::size_t> b_member;
  double rate = 0.0;
  TransitionKind kind = TransitionKind::OffRange;
  int step = 0;  // staircase index, 1-based
};

struct CouplingOptions {
  bool record = true;
  /// Stop as soon as A = B (recurrent engine).
  bool stop_on_merge = false;
  SelectionPolicy policy = SelectionPolicy::CanonicalFirst;
  ClosureMode closure = ClosureMode::Strict;
};

/// Rates for one range group when the pair (a, b) on it holds both
/// discrepancies of a two-discrepancy state, or a plain diagonal table when
/// it does not. Ranges of size 2 use (σA, B), (A, σB) since the cyclic
/// staircase has no merging step there.
std::vector<TableEntry> recurrent_table(const RangeGroup& g, Word a, Word b, bool holds_both,
                                        SelectionPolicy policy = SelectionPolicy::CanonicalFirst);

/// Rates of the discrepancy-monotone coupling on one range group. The table
/// sums to Z(R) + m(R) whenever R holds a discrepancy; otherwise to Z(R).
std::vector<TableEntry> general_table(const RangeGroup& g, Word a, Word b,
                                      SelectionPolicy policy = SelectionPolicy::CanonicalFirst);

Word word_on(const RangeGroup& g, const Configuration& eta);

struct CouplingEvent {
  double time = 0.0;
  TransitionKind kind = TransitionKind::OffRange;
  int step = 0;
  std::size_t group = 0;
  std::size_t D_before = 0;
  std::size_t D_after = 0;
};

struct CouplingRun {
  std::vector<CouplingEvent> log;
  std::optional<CoupledState> final_state;  // set when the run finishes
  bool coupled = false;
  std::optional<double> T_couple;
  std::size_t events = 0;
  /// Events drawn from a range set holding both discrepancies.
  std::size_t both_discrepancy_events = 0;
  std::size_t merges = 0;
  /// Non-identity permutations applied to each copy, by base index.
  std::vector<std::size_t> a_counts;
  std::vector<std::size_t> b_counts;
  std::size_t initial_D = 0;
};

class CouplingEngine {
 public:
  enum class Kind { Recurrent, General };

  CouplingEngine(const RateFamily& fam, Kind kind, const CouplingOptions& opt = {});

  CouplingRun run(const Configuration& a0, const Configuration& b0, double horizon, CounterRng& rng) const;

  const std::vector<RangeGroup>& groups() const { return groups_; }
  const std::vector<ExpandedPermutation>& expanded() const { return expanded_; }
  double budget_rate() const { return alias_.total(); }

 private:
  RateFamily fam_;
  Kind kind_;
  CouplingOptions opt_;
  std::vector<ExpandedPermutation> expanded_;
  std::vector<RangeGroup> groups_;
  std::vector<double> budget_;
  AliasTable alias_;
};

CouplingRun run_recurrent_coupling(const Configuration& a0, const Configuration& b0, const RateFamily& fam,
                                   double horizon, std::uint64_t seed, const CouplingOptions& opt = {});
CouplingRun run_general_coupling(const Configuration& a0, const Configuration& b0, const RateFamily& fam,
                                 double horizon, std::uint64_t seed, const CouplingOptions& opt = {});

std::string coupling_log_csv(const CouplingRun& run);

// ============================================================================
// Exhaustive lemmas on a single range
// ============================================================================

struct LemmaReport {
  int max_range = 0;
  std::size_t pairs_checked = 0;
  std::size_t covers_found = 0;
  /// a = b with a non-constant word: no single cycle fixes it, so there is
  /// no cyclic cover; the engines leave such ranges on diagonal rates.
  std::size_t equal_word_exceptions = 0;
  std::size_t missing_covers = 0;     // any other pair without a cover
  std::size_t monotone_violations = 0;
  std::size_t strictness_violations = 0;
  std::size_t equality_violations = 0;  // D preserved although both D⁺, D⁻ present, or vice versa
  std::size_t two_discrepancy_pairs = 0;
  std::size_t two_discrepancy_failures = 0;
  bool pass() const {
    return missing_covers == 0 && monotone_violations == 0 && strictness_violations == 0 &&
           equality_violations == 0 && two_discrepancy_failures == 0;
  }
};

/// Every range size 2..max_range and every pair of words: cover existence,
/// D(σ_R(a), b) ≤ D(a, b) with equality exactly when D⁻ = 0 (mirrored when b
/// carries more particles), and the two-discrepancy exact cover.
LemmaReport lemma_D_monotone(int max_range, SelectionPolicy policy = SelectionPolicy::CanonicalFirst);

int discrepancies(Word a, Word b);

struct SuccessBoundReport {
  double bound = 0.0;
  std::size_t events = 0;
  std::size_t merges = 0;
  Estimate fraction;
  bool pass = false;  // fraction ≥ bound − 3σ
};

/// Recurrent-coupling runs started with d⁺ at the origin and d⁻ one step
/// along the first axis on a Bernoulli(1/2) background.
SuccessBoundReport success_bound_check(const RateFamily& fam, std::size_t n, std::uint64_t seed,
                                       double horizon, unsigned threads = 1);

}  // namespace permuta

#endif  // PERMUTA_COUPLING_HPP
