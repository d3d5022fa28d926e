#ifndef PERMUTA_EXACT_HPP
#define PERMUTA_EXACT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "permuta/configuration.hpp"
#include "permuta/process.hpp"
#include "permuta/rates.hpp"

namespace permuta {

/// Generator of the configuration chain on a torus with N sites. Rows are
/// configuration codes (bit i = site i in canonical order). Off-diagonal
/// entries are stored in CSR form; the diagonal separately.
struct GeneratorMatrix {
  std::size_t sites = 0;
  std::vector<std::size_t> row_ptr;  // size 2^N + 1
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  std::vector<double> diag;

  std::size_t states() const { return diag.size(); }
  double entry(std::uint32_t from, std::uint32_t to) const;
  /// max |Σ_j Q(i, j)|
  double max_row_sum() const;
  /// True when no entry connects configurations of different particle counts.
  bool sector_block_diagonal() const;
  /// max_i |Q(i, i)|
  double max_exit_rate() const;
};

struct GeneratorOptions {
  std::size_t max_sites = 16;
  /// Raises the site limit to 22.
  bool large = false;
};

GeneratorMatrix build_generator(const RateFamily& fam, const GeneratorOptions& opt = {});

/// Generator from an explicit list of index-level permutations on `sites`
/// sites (used for toy chains that no shift-invariant family produces).
GeneratorMatrix build_generator(std::size_t sites, const std::vector<ExpandedPermutation>& perms,
                                const GeneratorOptions& opt = {});

/// ‖νQ‖∞
double stationarity_residual(const std::vector<double>& nu, const GeneratorMatrix& Q);

std::vector<double> product_measure(double rho, std::size_t sites);
std::vector<double> uniform_on_sector(std::size_t n, std::size_t sites);

struct SectorDistribution {
  std::size_t n = 0;
  std::vector<std::uint32_t> codes;  // increasing
  std::vector<double> probabilities;
};

struct SectorOptions {
  double tolerance = 1e-10;
  std::size_t max_states = 4000;  // dense solve limit
};

SectorDistribution sector_stationary(const GeneratorMatrix& Q, std::size_t n, const SectorOptions& opt = {});

/// Strong connectivity of the particle-count-n block.
bool sector_irreducible(const GeneratorMatrix& Q, std::size_t n);

struct UniformizationOptions {
  double tail = 1e-12;
  /// Terms kept beyond the tail cut (for truncation checks).
  std::size_t extra_terms = 0;
  std::size_t max_sites = 16;
};

struct DualityExact {
  double lhs = 0.0;
  double rhs = 0.0;
  std::size_t terms_lhs = 0;
  std::size_t terms_rhs = 0;
};

/// lhs = (e^{tQ} 1{≡1 on A})(η₀) and rhs = Σ_B P^A[A_t = B] 1{η₀ ≡ 1 on B},
/// each by uniformization of its own chain.
DualityExact duality_exact(const RateFamily& fam, const Configuration& eta0, const DualState& a, double t,
                           const UniformizationOptions& opt = {});

/// Poisson(λ) weights w_0..w_K with Σ_{k>K} w_k < tail.
std::vector<double> poisson_weights(double lambda, double tail, std::size_t extra_terms = 0);

struct FalsifierOptions {
  std::vector<std::size_t> subset_sizes{2};
  double threshold = 1e-6;
  UniformizationOptions uniformization;
};

struct FalsifierReport {
  bool witness_found = false;
  std::size_t instances_checked = 0;
  double max_gap = 0.0;
  std::string eta0;  // bits of the worst instance
  DualState a;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string summary;
};

/// Searches every η₀ and every A of the given sizes for |lhs − rhs| above the
/// threshold. Symmetry is not required; absence of a witness is reported.
FalsifierReport asymmetric_duality_falsifier(const RateFamily& fam, double t, const FalsifierOptions& opt = {});

}  // namespace permuta

#endif  // PERMUTA_EXACT_HPP
