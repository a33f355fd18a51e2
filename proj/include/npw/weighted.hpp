#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "npw/rng.hpp"

namespace npw {

/// One sample of a weighted ensemble: a state paired with a signed real weight.
template <typename X>
struct WeightedPoint {
  X state;
  double weight = 1.0;
};

template <typename X>
using WeightedEnsemble = std::vector<WeightedPoint<X>>;

/// Raw moment sums entering the weighted mean / standard-error formulas.
/// Accumulated in long double so ensembles with huge weight spreads
/// (gauge-P+ paths carry weights up to ~e^700) stay finite when squared.
struct WeightMoments {
  long double w = 0, w2 = 0, wf = 0, w2f = 0, w2f2 = 0;
  std::int64_t n = 0;

  void add(double weight, double f) {
    const long double lw = weight;
    const long double lf = f;
    w += lw;
    w2 += lw * lw;
    wf += lw * lf;
    w2f += lw * lw * lf;
    w2f2 += lw * lw * lf * lf;
    ++n;
  }
  WeightMoments& operator+=(const WeightMoments& o) {
    w += o.w;
    w2 += o.w2;
    wf += o.wf;
    w2f += o.w2f;
    w2f2 += o.w2f2;
    n += o.n;
    return *this;
  }
};

/// Weighted mean and its standard error.
///
/// sem evaluates
///   sigma^2 = (fbar^2/N) ( E[w^2 f^2]/E[w f]^2 - 2 E[w^2 f]/(E[w f] E[w])
///             + E[w^2]/E[w]^2 )
/// multiplied through by fbar^2 = (E[w f]/E[w])^2, which is the same
/// expression rearranged so that the E[w f] -> 0 limit stays finite.
/// sem_defined is the formula's validity flag: it drops when E[w f] is
/// statistically indistinguishable from zero (within 3 standard errors of
/// its own sample mean), where the formula as written is singular.
struct WeightedStats {
  double mean = 0.0;
  double sem = 0.0;
  bool sem_defined = false;
};

WeightedStats stats_from_moments(const WeightMoments& m);

namespace detail {
template <typename X>
void require_nonempty(const WeightedEnsemble<X>& ens) {
  if (ens.empty()) throw std::invalid_argument("weighted ensemble is empty");
}
}  // namespace detail

/// Weighted average  E[w f(x)] / E[w].
template <typename X, typename F>
auto weighted_mean(const WeightedEnsemble<X>& ens, F&& f) {
  detail::require_nonempty(ens);
  using R = std::decay_t<std::invoke_result_t<F&, const X&>>;
  if constexpr (std::is_same_v<R, std::complex<double>>) {
    long double wsum = 0, sr = 0, si = 0;
    for (const auto& p : ens) {
      const std::complex<double> v = f(p.state);
      wsum += static_cast<long double>(p.weight);
      sr += static_cast<long double>(p.weight) * v.real();
      si += static_cast<long double>(p.weight) * v.imag();
    }
    if (wsum == 0) throw std::domain_error("weighted_mean: total weight is zero");
    return std::complex<double>(static_cast<double>(sr / wsum),
                                static_cast<double>(si / wsum));
  } else {
    long double wsum = 0, fsum = 0;
    for (const auto& p : ens) {
      wsum += static_cast<long double>(p.weight);
      fsum += static_cast<long double>(p.weight) * static_cast<long double>(f(p.state));
    }
    if (wsum == 0) throw std::domain_error("weighted_mean: total weight is zero");
    return static_cast<double>(fsum / wsum);
  }
}

/// Standard error of the weighted mean; nullopt when E[w f] is statistically
/// indistinguishable from zero and the variance formula is singular.
template <typename X, typename F>
std::optional<double> weighted_stderr(const WeightedEnsemble<X>& ens, F&& f) {
  detail::require_nonempty(ens);
  WeightMoments m;
  for (const auto& p : ens) m.add(p.weight, f(p.state));
  const WeightedStats s = stats_from_moments(m);
  if (!s.sem_defined) return std::nullopt;
  return s.sem;
}

/// Variance-inflation factor E[w^2]/E[w]^2 (1 for uniform weights).
template <typename X>
double efficiency(const WeightedEnsemble<X>& ens) {
  detail::require_nonempty(ens);
  long double w = 0, w2 = 0;
  for (const auto& p : ens) {
    w += static_cast<long double>(p.weight);
    w2 += static_cast<long double>(p.weight) * p.weight;
  }
  if (w == 0) throw std::domain_error("efficiency: total weight is zero");
  const long double n = static_cast<long double>(ens.size());
  return static_cast<double>((w2 / n) / ((w / n) * (w / n)));
}

/// Unsquared ratio E[w^2]/E[w]; the deterministic-grid figure of merit.
template <typename X>
double weight_ratio_unsquared(const WeightedEnsemble<X>& ens) {
  detail::require_nonempty(ens);
  long double w = 0, w2 = 0;
  for (const auto& p : ens) {
    w += static_cast<long double>(p.weight);
    w2 += static_cast<long double>(p.weight) * p.weight;
  }
  if (w == 0) throw std::domain_error("weight_ratio_unsquared: total weight is zero");
  const long double n = static_cast<long double>(ens.size());
  return static_cast<double>((w2 / n) / (w / n));
}

/// Tabulated signed quasi-probability on an enumerated support.
/// Cells carry a 1-D coordinate for convenience (samplers jitter inside
/// cells of nonzero width); richer domains key off the cell index.
class SignedDistribution {
 public:
  struct Cell {
    double x = 0.0;        // cell centre
    double width = 0.0;    // extent for continuous coordinates; 0 = discrete atom
    double value = 0.0;    // P(x)
    double measure = 1.0;  // cell measure Delta_x
  };

  explicit SignedDistribution(std::vector<Cell> cells);

  /// Discrete support on {0, 1, ...} with uniform cell measure.
  static SignedDistribution from_values(const std::vector<double>& values,
                                        double cell_measure = 1.0);

  std::size_t size() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_[i]; }

  double c_plus() const { return c_plus_; }    // integral of the positive part
  double c_minus() const { return c_minus_; }  // integral of the negative part (<= 0)
  double volume() const { return volume_; }    // V = sum of cell measures

 private:
  std::vector<Cell> cells_;
  double c_plus_ = 0.0, c_minus_ = 0.0, volume_ = 0.0;
};

/// Optimal probabilistic split: rates lambda+- = +-C+-/(C+ - C-) and
/// path weights w+- = C+-/lambda+- = +-(C+ - C-).
struct SplitScheme {
  double lambda_plus = 1.0;
  double lambda_minus = 0.0;
  double weight_plus = 1.0;
  double weight_minus = -1.0;
};

SplitScheme optimal_split(const SignedDistribution& dist);

/// State produced by the tabulated samplers.
struct SampledCell {
  std::size_t index = 0;  // support cell
  double x = 0.0;         // coordinate (jittered inside cells of nonzero width)
};

struct SplitSampleOptions {
  // Override the optimal positive-branch rate (weights follow w+- = C+-/lambda+-,
  // so any rate in (0,1) stays unbiased).  Used for optimality studies.
  std::optional<double> lambda_plus;
  // Extra nonnegative mass g_i added to both parts of cell i, perturbing the
  // sign-split while leaving P = P+ + P- unchanged.
  std::vector<double> split_inflation;
};

/// Probabilistic sampler: each sample is drawn from the normalised positive
/// part with probability lambda+ (weight w+) and otherwise from the negative
/// part (signed weight w-), via inverse CDF over the tabulated cells.
/// Sample i uses the counter-based stream (seed, i).
WeightedEnsemble<SampledCell> sample_split(const SignedDistribution& dist,
                                           std::size_t n_samples,
                                           std::uint64_t seed,
                                           const SplitSampleOptions& opts = {});

/// Deterministic grid sampler: one path per tabulated cell with weight
/// w_i = N * P(x_i) * Delta_i  (V * P(x_i) on a uniform grid).
WeightedEnsemble<SampledCell> sample_grid(const SignedDistribution& dist);

/// Variance figure of merit of the deterministic method, V * int P(x)^2 dx.
double grid_variance_proxy(const SignedDistribution& dist);

}  // namespace npw
