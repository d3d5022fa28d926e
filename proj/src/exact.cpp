#include "permuta/exact.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <sstream>

#include "permuta/errors.hpp"

namespace permuta {

namespace {

std::size_t site_limit(const GeneratorOptions& opt) { return opt.large ? std::max<std::size_t>(opt.max_sites, 22) : opt.max_sites; }

std::uint32_t apply_code(const ExpandedPermutation& e, std::uint32_t code) {
  std::uint32_t cleared = code, moved = 0;
  for (std::size_t j = 0; j < e.from.size(); ++j) {
    cleared &= ~(std::uint32_t{1} << e.from[j]);
    if ((code >> e.from[j]) & 1u) moved |= std::uint32_t{1} << e.to[j];
  }
  return cleared | moved;
}

std::vector<std::uint32_t> sector_codes(std::size_t n, std::size_t sites) {
  std::vector<std::uint32_t> out;
  const std::uint64_t total = std::uint64_t{1} << sites;
  for (std::uint64_t c = 0; c < total; ++c)
    if (static_cast<std::size_t>(std::popcount(c)) == n) out.push_back(static_cast<std::uint32_t>(c));
  return out;
}

/// Linear index of a code inside an increasing code list.
std::size_t code_index(const std::vector<std::uint32_t>& codes, std::uint32_t c) {
  return static_cast<std::size_t>(std::lower_bound(codes.begin(), codes.end(), c) - codes.begin());
}

}  // namespace

double GeneratorMatrix::entry(std::uint32_t from, std::uint32_t to) const {
  if (from == to) return diag.at(from);
  for (std::size_t k = row_ptr.at(from); k < row_ptr[from + 1]; ++k)
    if (col[k] == to) return val[k];
  return 0.0;
}

double GeneratorMatrix::max_row_sum() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < states(); ++i) {
    double s = diag[i];
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

bool GeneratorMatrix::sector_block_diagonal() const {
  for (std::size_t i = 0; i < states(); ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (std::popcount(static_cast<std::uint32_t>(i)) != std::popcount(col[k])) return false;
  return true;
}

double GeneratorMatrix::max_exit_rate() const {
  double m = 0.0;
  for (double d : diag) m = std::max(m, -d);
  return m;
}

GeneratorMatrix build_generator(std::size_t sites, const std::vector<ExpandedPermutation>& perms,
                                const GeneratorOptions& opt) {
  if (sites > site_limit(opt))
    throw Error(ErrorKind::TooLarge, "generator limited to " + std::to_string(site_limit(opt)) + " sites, got " +
                                         std::to_string(sites));
  for (const auto& e : perms)
    for (std::size_t j = 0; j < e.from.size(); ++j)
      if (e.from[j] >= sites || e.to[j] >= sites) throw Error(ErrorKind::Precondition, "site index out of range");

  GeneratorMatrix Q;
  Q.sites = sites;
  const std::size_t n = std::size_t{1} << sites;
  Q.diag.assign(n, 0.0);
  Q.row_ptr.reserve(n + 1);
  Q.row_ptr.push_back(0);
  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t i = 0; i < n; ++i) {
    const auto code = static_cast<std::uint32_t>(i);
    row.clear();
    for (const auto& e : perms) {
      const auto to = apply_code(e, code);
      if (to != code) row.emplace_back(to, e.rate);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!Q.col.empty() && Q.col.size() > Q.row_ptr.back() && Q.col.back() == row[k].first) {
        Q.val.back() += row[k].second;
      } else {
        Q.col.push_back(row[k].first);
        Q.val.push_back(row[k].second);
      }
      Q.diag[i] -= row[k].second;
    }
    Q.row_ptr.push_back(Q.col.size());
  }
  return Q;
}

GeneratorMatrix build_generator(const RateFamily& fam, const GeneratorOptions& opt) {
  const auto& lat = fam.lattice();
  if (!lat.is_torus()) throw Error(ErrorKind::Precondition, "exact computations need a torus");
  if (lat.size() > site_limit(opt))
    throw Error(ErrorKind::TooLarge, "generator limited to " + std::to_string(site_limit(opt)) + " sites, got " +
                                         std::to_string(lat.size()));
  return build_generator(lat.size(), expand(fam), opt);
}

double stationarity_residual(const std::vector<double>& nu, const GeneratorMatrix& Q) {
  if (nu.size() != Q.states()) throw Error(ErrorKind::Precondition, "distribution length does not match Q");
  std::vector<double> out(nu.size(), 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    out[i] += nu[i] * Q.diag[i];
    for (std::size_t k = Q.row_ptr[i]; k < Q.row_ptr[i + 1]; ++k) out[Q.col[k]] += nu[i] * Q.val[k];
  }
  double worst = 0.0;
  for (double v : out) worst = std::max(worst, std::abs(v));
  return worst;
}

std::vector<double> product_measure(double rho, std::size_t sites) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorKind::Precondition, "density must lie in [0, 1]");
  if (sites > 22) throw Error(ErrorKind::TooLarge, "too many sites for a full distribution");
  const std::size_t n = std::size_t{1} << sites;
  std::vector<double> pw1(sites + 1), pw0(sites + 1);
  for (std::size_t k = 0; k <= sites; ++k) {
    pw1[k] = std::pow(rho, static_cast<double>(k));
    pw0[k] = std::pow(1.0 - rho, static_cast<double>(k));
  }
  std::vector<double> nu(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto k = static_cast<std::size_t>(std::popcount(c));
    nu[c] = pw1[k] * pw0[sites - k];
  }
  return nu;
}

std::vector<double> uniform_on_sector(std::size_t n, std::size_t sites) {
  if (n > sites) throw Error(ErrorKind::Precondition, "sector larger than the torus");
  if (sites > 22) throw Error(ErrorKind::TooLarge, "too many sites for a full distribution");
  const auto codes = sector_codes(n, sites);
  std::vector<double> nu(std::size_t{1} << sites, 0.0);
  for (auto c : codes) nu[c] = 1.0 / static_cast<double>(codes.size());
  return nu;
}

bool sector_irreducible(const GeneratorMatrix& Q, std::size_t n) {
  const auto codes = sector_codes(n, Q.sites);
  if (codes.size() <= 1) return true;
  std::vector<std::vector<std::size_t>> fwd(codes.size()), bwd(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t k = Q.row_ptr[codes[i]]; k < Q.row_ptr[codes[i] + 1]; ++k) {
      const auto j = code_index(codes, Q.col[k]);
      fwd[i].push_back(j);
      bwd[j].push_back(i);
    }
  auto reach_all = [&](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<char> seen(codes.size(), 0);
    std::deque<std::size_t> q{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop_front();
      for (auto v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          q.push_back(v);
        }
    }
    return count == codes.size();
  };
  return reach_all(fwd) && reach_all(bwd);
}

SectorDistribution sector_stationary(const GeneratorMatrix& Q, std::size_t n, const SectorOptions& opt) {
  if (n > Q.sites) throw Error(ErrorKind::Precondition, "sector larger than the torus");
  SectorDistribution out;
  out.n = n;
  out.codes = sector_codes(n, Q.sites);
  const std::size_t m = out.codes.size();
  if (m > opt.max_states)
    throw Error(ErrorKind::TooLarge, "sector has " + std::to_string(m) + " states; dense limit is " +
                                         std::to_string(opt.max_states));
  if (!sector_irreducible(Q, n)) throw Error(ErrorKind::SectorReducible, "sector " + std::to_string(n) + " is reducible");
  if (m == 1) {
    out.probabilities = {1.0};
    return out;
  }
  // π Q_s = 0  ⇔  Q_sᵀ πᵀ = 0
  Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    qt(ii, ii) += Q.diag[out.codes[i]];
    for (std::size_t k = Q.row_ptr[out.codes[i]]; k < Q.row_ptr[out.codes[i] + 1]; ++k)
      qt(static_cast<Eigen::Index>(code_index(out.codes, Q.col[k])), ii) += Q.val[k];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(qt);
  lu.setThreshold(opt.tolerance);
  const Eigen::MatrixXd ker = lu.kernel();
  if (ker.cols() != 1)
    throw Error(ErrorKind::SectorReducible,
                "stationary vector not unique: kernel dimension " + std::to_string(ker.cols()));
  Eigen::VectorXd pi = ker.col(0);
  pi /= pi.sum();
  out.probabilities.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = pi(static_cast<Eigen::Index>(i));
    if (p < -opt.tolerance) throw Error(ErrorKind::InvariantViolation, "stationary vector has a negative entry");
    out.probabilities[i] = std::max(p, 0.0);
  }
  return out;
}

std::vector<double> poisson_weights(double lambda, double tail, std::size_t extra_terms) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::Precondition, "Poisson mean must be non-negative");
  if (lambda == 0.0) {
    std::vector<double> w(1 + extra_terms, 0.0);
    w[0] = 1.0;
    return w;
  }
  const auto kmax = static_cast<std::size_t>(lambda + 12.0 * std::sqrt(lambda) + 60.0);
  std::vector<double> w(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    w[k] = std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0));
  }
  // cut where the remaining mass drops below the tail
  double rest = 0.0;
  std::size_t cut = kmax;
  for (std::size_t k = kmax; k > 0; --k) {
    rest += w[k];
    if (rest >= tail) break;
    cut = k - 1;
  }
  cut = std::max<std::size_t>(cut, static_cast<std::size_t>(lambda));
  w.resize(std::min(kmax, cut + extra_terms) + 1);
  return w;
}

namespace {

/// Σ_k w_k P^k f with P = I + Q/Λ applied on the right (functions).
std::vector<double> uniformized_function(const GeneratorMatrix& Q, std::vector<double> f, double t,
                                         const UniformizationOptions& opt, std::size_t& terms) {
  const double lambda = Q.max_exit_rate();
  std::vector<double> out(f.size(), 0.0);
  if (lambda == 0.0 || t == 0.0) {
    terms = 1;
    return f;
  }
  const auto w = poisson_weights(lambda * t, opt.tail, opt.extra_terms);
  terms = w.size();
  std::vector<double> next(f.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (std::size_t i = 0; i < f.size(); ++i) out[i] += w[k] * f[i];
    for (std::size_t i = 0; i < f.size(); ++i) {
      double s = f[i] * (1.0 + Q.diag[i] / lambda);
      for (std::size_t j = Q.row_ptr[i]; j < Q.row_ptr[i + 1]; ++j) s += Q.val[j] / lambda * f[Q.col[j]];
      next[i] = s;
    }
    f.swap(next);
  }
  return out;
}

/// Chain on |A|-subsets, built from the site maps of the permutations rather
/// than from the configuration generator.
struct DualChain {
  std::vector<std::uint32_t> codes;
  std::vector<std::vector<std::pair<std::size_t, double>>> out;  // off-diagonal moves
  std::vector<double> exit;
};

DualChain build_dual_chain(const RateFamily& fam, std::size_t size) {
  const auto& lat = fam.lattice();
  const std::size_t sites = lat.size();
  DualChain ch;
  ch.codes = sector_codes(size, sites);
  ch.out.resize(ch.codes.size());
  ch.exit.assign(ch.codes.size(), 0.0);

  // per shifted permutation: image of every torus site
  std::vector<std::pair<std::vector<std::uint32_t>, double>> maps;
  for (const auto& b : fam.base()) {
    const auto range = b.perm.range();
    for (const auto& y : lat.sites()) {
      std::vector<std::uint32_t> img(sites);
      for (std::size_t i = 0; i < sites; ++i) img[i] = static_cast<std::uint32_t>(i);
      for (const auto& r : range) img[lat.index(lat.wrap(r + y))] = static_cast<std::uint32_t>(lat.index(lat.wrap(b.perm(r) + y)));
      maps.emplace_back(std::move(img), b.rate);
    }
  }
  for (std::size_t s = 0; s < ch.codes.size(); ++s) {
    const auto code = ch.codes[s];
    for (const auto& [img, rate] : maps) {
      std::uint32_t to = 0;
      for (std::size_t i = 0; i < sites; ++i)
        if ((code >> i) & 1u) to |= std::uint32_t{1} << img[i];
      if (to == code) continue;
      ch.out[s].emplace_back(code_index(ch.codes, to), rate);
      ch.exit[s] += rate;
    }
  }
  return ch;
}

/// Distribution at time t of the dual chain started from `start`.
std::vector<double> dual_distribution(const DualChain& ch, std::size_t start, double t,
                                      const UniformizationOptions& opt, std::size_t& terms) {
  std::vector<double> p(ch.codes.size(), 0.0), out(ch.codes.size(), 0.0), next(ch.codes.size());
  p[start] = 1.0;
  const double lambda = ch.exit.empty() ? 0.0 : *std::max_element(ch.exit.begin(), ch.exit.end());
  if (lambda == 0.0 || t == 0.0) {
    terms = 1;
    return p;
  }
  const auto w = poisson_weights(lambda * t, opt.tail, opt.extra_terms);
  terms = w.size();
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += w[k] * p[i];
    for (std::size_t i = 0; i < p.size(); ++i) next[i] = p[i] * (1.0 - ch.exit[i] / lambda);
    for (std::size_t i = 0; i < p.size(); ++i)
      for (const auto& [j, rate] : ch.out[i]) next[j] += p[i] * rate / lambda;
    p.swap(next);
  }
  return out;
}

std::uint32_t subset_code(const Lattice& lat, const DualState& a) {
  std::uint32_t c = 0;
  for (const auto& x : a) c |= std::uint32_t{1} << lat.index(lat.wrap(x));
  return c;
}

void check_exact_lattice(const RateFamily& fam, const UniformizationOptions& opt) {
  const auto& lat = fam.lattice();
  if (!lat.is_torus()) throw Error(ErrorKind::Precondition, "exact computations need a torus");
  if (lat.size() > opt.max_sites)
    throw Error(ErrorKind::TooLarge, "configuration space limited to 2^" + std::to_string(opt.max_sites));
}

}  // namespace

DualityExact duality_exact(const RateFamily& fam, const Configuration& eta0, const DualState& a, double t,
                           const UniformizationOptions& opt) {
  if (!check_symmetry(fam)) throw Error(ErrorKind::NotSymmetric, "duality needs q(σ) = q(σ⁻¹)");
  check_exact_lattice(fam, opt);
  if (!(t >= 0.0)) throw Error(ErrorKind::Precondition, "time must be non-negative");
  const auto& lat = fam.lattice();
  if (!(eta0.lattice() == lat)) throw Error(ErrorKind::Precondition, "configuration lives on another lattice");
  const auto A = make_dual_state(a, lat);

  DualityExact res;
  const auto Q = build_generator(fam, GeneratorOptions{opt.max_sites, false});
  const std::uint32_t amask = subset_code(lat, A);
  std::vector<double> f(Q.states());
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = (static_cast<std::uint32_t>(c) & amask) == amask ? 1.0 : 0.0;
  res.lhs = uniformized_function(Q, std::move(f), t, opt, res.terms_lhs)[eta0.code()];

  const auto ch = build_dual_chain(fam, A.size());
  const auto p = dual_distribution(ch, code_index(ch.codes, amask), t, opt, res.terms_rhs);
  const auto eta = static_cast<std::uint32_t>(eta0.code());
  for (std::size_t i = 0; i < p.size(); ++i)
    if ((ch.codes[i] & eta) == ch.codes[i]) res.rhs += p[i];
  return res;
}

FalsifierReport asymmetric_duality_falsifier(const RateFamily& fam, double t, const FalsifierOptions& opt) {
  check_exact_lattice(fam, opt.uniformization);
  const auto& lat = fam.lattice();
  const auto Q = build_generator(fam, GeneratorOptions{opt.uniformization.max_sites, false});
  FalsifierReport rep;
  bool have_worst = false;
  for (std::size_t size : opt.subset_sizes) {
    if (size > lat.size()) continue;
    const auto ch = build_dual_chain(fam, size);
    for (std::size_t ai = 0; ai < ch.codes.size(); ++ai) {
      const auto amask = ch.codes[ai];
      std::vector<double> f(Q.states());
      for (std::size_t c = 0; c < f.size(); ++c) f[c] = (static_cast<std::uint32_t>(c) & amask) == amask ? 1.0 : 0.0;
      std::size_t terms = 0;
      const auto lhs = uniformized_function(Q, std::move(f), t, opt.uniformization, terms);
      const auto p = dual_distribution(ch, ai, t, opt.uniformization, terms);
      for (std::uint32_t eta = 0; eta < Q.states(); ++eta) {
        double rhs = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
          if ((ch.codes[i] & eta) == ch.codes[i]) rhs += p[i];
        ++rep.instances_checked;
        const double gap = std::abs(lhs[eta] - rhs);
        if (!have_worst || gap > rep.max_gap) {
          have_worst = true;
          rep.max_gap = gap;
          rep.eta0 = Configuration::from_code(lat, eta).to_bits();
          rep.a.clear();
          for (std::size_t s = 0; s < lat.size(); ++s)
            if ((amask >> s) & 1u) rep.a.push_back(lat.site_at(s));
          rep.lhs = lhs[eta];
          rep.rhs = rhs;
        }
      }
    }
  }
  rep.witness_found = rep.max_gap > opt.threshold;
  std::ostringstream os;
  os.precision(6);
  if (rep.witness_found) {
    os << "witness: eta0=" << rep.eta0 << " A={";
    for (std::size_t i = 0; i < rep.a.size(); ++i) os << (i ? "," : "") << rep.a[i].to_string(lat.dim());
    os << "} lhs=" << rep.lhs << " rhs=" << rep.rhs << " gap=" << rep.max_gap;
  } else {
    os << "no witness among " << rep.instances_checked << " instances (max gap " << rep.max_gap << ")";
  }
  rep.summary = os.str();
  return rep;
}

}  // namespace permuta
