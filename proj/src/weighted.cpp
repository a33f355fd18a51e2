#include "npw/weighted.hpp"

#include <algorithm>
#include <cmath>

namespace npw {

WeightedStats stats_from_moments(const WeightMoments& m) {
  if (m.n <= 0) throw std::invalid_argument("stats_from_moments: empty moments");
  if (m.w == 0) throw std::domain_error("stats_from_moments: total weight is zero");
  const long double n = static_cast<long double>(m.n);
  const long double ew = m.w / n;
  const long double ew2 = m.w2 / n;
  const long double ewf = m.wf / n;
  const long double ew2f = m.w2f / n;
  const long double ew2f2 = m.w2f2 / n;

  WeightedStats out;
  const long double fbar = ewf / ew;
  out.mean = static_cast<double>(fbar);

  long double s2 = (ew2f2 - 2.0L * fbar * ew2f + fbar * fbar * ew2) / (n * ew * ew);
  if (s2 < 0) s2 = 0;
  out.sem = static_cast<double>(sqrtl(s2));

  // Var(w f) from the same pass; the mean E[w f] must clear 3 of its own
  // standard errors for the variance formula to be considered defined.
  const long double var_wf = std::max(0.0L, ew2f2 - ewf * ewf);
  out.sem_defined = m.n > 1 && fabsl(ewf) > 3.0L * sqrtl(var_wf / n);
  return out;
}

SignedDistribution::SignedDistribution(std::vector<Cell> cells) : cells_(std::move(cells)) {
  if (cells_.empty())
    throw std::invalid_argument("SignedDistribution: needs at least one cell");
  long double cp = 0, cm = 0, vol = 0;
  for (const auto& c : cells_) {
    if (!std::isfinite(c.value) || !std::isfinite(c.measure) || c.measure <= 0)
      throw std::invalid_argument(
          "SignedDistribution: cell value must be finite and measure positive");
    const long double mass = static_cast<long double>(c.value) * c.measure;
    if (c.value >= 0)
      cp += mass;  // ties at P = 0 go to the positive part
    else
      cm += mass;
    vol += c.measure;
  }
  c_plus_ = static_cast<double>(cp);
  c_minus_ = static_cast<double>(cm);
  volume_ = static_cast<double>(vol);
  if (std::abs(c_plus_ + c_minus_ - 1.0) > 1e-9)
    throw std::invalid_argument("SignedDistribution: not normalised, C+ + C- = " +
                                std::to_string(c_plus_ + c_minus_));
}

SignedDistribution SignedDistribution::from_values(const std::vector<double>& values,
                                                   double cell_measure) {
  std::vector<Cell> cells(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    cells[i].x = static_cast<double>(i);
    cells[i].value = values[i];
    cells[i].measure = cell_measure;
  }
  return SignedDistribution(std::move(cells));
}

SplitScheme optimal_split(const SignedDistribution& dist) {
  const double cp = dist.c_plus();
  const double cm = dist.c_minus();
  if (cp <= 0) throw std::domain_error("optimal_split: degenerate distribution, C+ = 0");
  const double span = cp - cm;  // >= 1 by normalisation
  SplitScheme s;
  s.lambda_plus = cp / span;
  s.lambda_minus = -cm / span;
  s.weight_plus = span;
  s.weight_minus = -span;
  return s;
}

WeightedEnsemble<SampledCell> sample_split(const SignedDistribution& dist,
                                           std::size_t n_samples, std::uint64_t seed,
                                           const SplitSampleOptions& opts) {
  if (n_samples < 1) throw std::invalid_argument("sample_split: need at least one sample");
  const std::size_t k = dist.size();
  if (!opts.split_inflation.empty() && opts.split_inflation.size() != k)
    throw std::invalid_argument("sample_split: split_inflation size mismatch");

  // Per-cell masses of the two parts; inflation g adds mass to both so that
  // P+ + P- is unchanged while C+ grows.
  std::vector<double> cum_pos(k), cum_neg(k);
  long double pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double g = opts.split_inflation.empty() ? 0.0 : opts.split_inflation[i];
    if (g < 0) throw std::invalid_argument("sample_split: split_inflation must be >= 0");
    const auto& c = dist.cell(i);
    pos_total += (std::max(c.value, 0.0) + g) * c.measure;
    neg_total += (std::max(-c.value, 0.0) + g) * c.measure;
    cum_pos[i] = static_cast<double>(pos_total);
    cum_neg[i] = static_cast<double>(neg_total);
  }
  if (pos_total <= 0) throw std::domain_error("sample_split: positive part is empty");
  const double c_plus = static_cast<double>(pos_total);
  const double c_minus = -static_cast<double>(neg_total);

  double lambda_plus =
      opts.lambda_plus ? *opts.lambda_plus : c_plus / (c_plus - c_minus);
  if (!(lambda_plus > 0.0 && lambda_plus <= 1.0))
    throw std::invalid_argument("sample_split: lambda_plus outside (0, 1]");
  if (neg_total > 0 && lambda_plus >= 1.0)
    throw std::invalid_argument(
        "sample_split: lambda_plus = 1 cannot sample the negative part");
  const double w_plus = c_plus / lambda_plus;
  const double w_minus = neg_total > 0 ? c_minus / (1.0 - lambda_plus) : 0.0;

  WeightedEnsemble<SampledCell> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(seed, i);
    const bool positive = rng.uniform() < lambda_plus;
    const auto& cum = positive ? cum_pos : cum_neg;
    const double total = positive ? c_plus : -c_minus;
    const double u = rng.uniform() * total;
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (idx >= k) idx = k - 1;
    const auto& cell = dist.cell(idx);
    double x = cell.x;
    if (cell.width > 0) x += (rng.uniform() - 0.5) * cell.width;
    out.push_back({SampledCell{idx, x}, positive ? w_plus : w_minus});
  }
  return out;
}

WeightedEnsemble<SampledCell> sample_grid(const SignedDistribution& dist) {
  const double n = static_cast<double>(dist.size());
  WeightedEnsemble<SampledCell> out;
  out.reserve(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& c = dist.cell(i);
    out.push_back({SampledCell{i, c.x}, n * c.value * c.measure});
  }
  return out;
}

double grid_variance_proxy(const SignedDistribution& dist) {
  long double s = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& c = dist.cell(i);
    s += static_cast<long double>(c.value) * c.value * c.measure;
  }
  return dist.volume() * static_cast<double>(s);
}

}  // namespace npw
