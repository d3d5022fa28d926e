#ifndef PERMUTA_PROCESS_HPP
#define PERMUTA_PROCESS_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "permuta/alias.hpp"
#include "permuta/configuration.hpp"
#include "permuta/rates.hpp"
#include "permuta/rng.hpp"

namespace permuta {

/// Finite set of sites, sorted and without duplicates.
using DualState = std::vector<Site>;

DualState make_dual_state(std::vector<Site> sites, const Lattice& lat);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;

  static Estimate from_samples(const std::vector<double>& xs);
};

struct Event {
  double time = 0.0;
  std::size_t perm_id = 0;  // base permutation index
  Site shift;
  std::size_t popcount = 0;
};

template <class State>
struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<Event> events;  // empty unless recording was requested
  std::size_t event_count = 0;
  State terminal;
};

/// Independent Bernoulli(rho) occupation of every torus site.
Configuration sample_product(double rho, const Lattice& lat, CounterRng& rng);
Configuration sample_product(double rho, const Lattice& lat, std::uint64_t seed);

void apply_in_place(const ExpandedPermutation& e, Configuration& eta);

/// Direct-method simulation of the configuration process on a torus with a
/// static alias table over every shift of every base permutation.
class ConfigSimulator {
 public:
  explicit ConfigSimulator(const RateFamily& fam);

  Trajectory<Configuration> run(const Configuration& eta0, double horizon, CounterRng& rng,
                                bool record_events = true) const;

  const std::vector<ExpandedPermutation>& expanded() const { return expanded_; }
  double total_rate() const { return alias_.total(); }

 private:
  std::vector<ExpandedPermutation> expanded_;
  AliasTable alias_;
};

/// Set-valued process A → σ(A) driven only by permutations whose range meets A.
/// Works on a torus or on the unbounded lattice; shifts are materialized
/// around the current support after every event.
class FiniteSimulator {
 public:
  struct Candidate {
    std::size_t base = 0;
    Site shift;
    double rate = 0.0;
  };

  explicit FiniteSimulator(const RateFamily& fam);

  Trajectory<DualState> run(const DualState& a0, double horizon, CounterRng& rng, bool record_events = true) const;

  /// Shifted base permutations covering at least one site of A, in a fixed
  /// order: support sites ascending, then base index, then range position.
  std::vector<Candidate> candidates(const DualState& a) const;
  double effective_rate(const DualState& a) const;

  Site image(const Candidate& c, const Site& x) const;
  bool covers(const Candidate& c, const Site& x) const;
  DualState apply(const Candidate& c, const DualState& a) const;

  const RateFamily& family() const { return fam_; }

 private:
  RateFamily fam_;
  std::vector<std::vector<Site>> ranges_;
};

Trajectory<Configuration> run_config(const Configuration& eta0, const RateFamily& fam, double horizon,
                                     std::uint64_t seed);
Trajectory<DualState> run_finite(const DualState& a0, const RateFamily& fam, double horizon, std::uint64_t seed);

struct ProductLaw {
  double rho = 0.5;
};
using InitialLaw = std::variant<ProductLaw, Configuration>;

struct DualityEstimate {
  Estimate lhs;  // P[η_t ≡ 1 on A]
  Estimate rhs;  // P[η₀ ≡ 1 on A_t]
};

/// Monte Carlo estimate of both sides of the self-duality identity. Replica i
/// uses stream 2i for the configuration run and 2i+1 for the dual run.
DualityEstimate duality_mc(const InitialLaw& mu0, const DualState& a, const RateFamily& fam, double t,
                           std::size_t n, std::uint64_t seed, unsigned threads = 1);

bool all_occupied(const Configuration& eta, const DualState& a);

}  // namespace permuta

#endif  // PERMUTA_PROCESS_HPP
