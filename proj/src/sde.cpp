#include "npw/sde.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "npw/weighted.hpp"

namespace npw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Stream-salt layout: path indices live below 2^40, method salts above, so
// init draws, stepping draws and the tabulated samplers never share a stream.
constexpr std::uint64_t kSaltNumphaseStep = 1ull << 40;
constexpr std::uint64_t kSaltTwInit = 2ull << 40;
constexpr std::uint64_t kSaltTwStep = 3ull << 40;
constexpr std::uint64_t kSaltGaugeStep = 4ull << 40;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void validate(const IntegrationParams& ip, const ModelParams& mp, double n_max) {
  if (!(ip.dt > 0)) throw std::invalid_argument("IntegrationParams: dt must be > 0");
  if (ip.n_traj < 1) throw std::invalid_argument("IntegrationParams: n_traj must be >= 1");
  if (ip.sample_times.empty())
    throw std::invalid_argument("IntegrationParams: no sample times");
  for (std::size_t i = 0; i < ip.sample_times.size(); ++i) {
    if (ip.sample_times[i] < 0 ||
        (i > 0 && ip.sample_times[i] <= ip.sample_times[i - 1]))
      throw std::invalid_argument("IntegrationParams: sample_times must be ascending");
  }
  if (mp.gamma * n_max * ip.dt >= 0.1)
    throw std::invalid_argument("IntegrationParams: gamma * n_max * dt >= 0.1");
  if (std::abs(mp.chi) * n_max * ip.dt >= 0.1)
    throw std::invalid_argument("IntegrationParams: chi * n_max * dt >= 0.1");
}

std::vector<NumPhasePath> init_numphase_ensemble(Complex alpha0, int two_n_max,
                                                 int phi_points, double prune_threshold,
                                                 InitSummary* summary) {
  if (phi_points < 2 * two_n_max + 2)
    throw std::invalid_argument(
        "init_numphase_ensemble: grid too coarse, need phi_points >= 2 two_n_max + 2");
  const NumPhaseDist w = coherent_closed_form(alpha0, two_n_max);
  const PhiGrid grid = make_phi_grid(phi_points);
  const double cell = kTwoPi / phi_points;

  std::vector<NumPhasePath> paths;
  paths.reserve(static_cast<std::size_t>(two_n_max + 1) * phi_points);
  std::size_t dropped = 0;
  long double sum_w = 0;
  for (int d = 0; d <= two_n_max; ++d) {
    for (int j = 0; j < phi_points; ++j) {
      const double omega = cell * eval_w(w, d, grid.phis[j]);
      if (prune_threshold > 0 && std::abs(omega) < prune_threshold) {
        ++dropped;
        continue;
      }
      paths.push_back({d, grid.phis[j], omega, false});
      sum_w += omega;
    }
  }
  if (paths.empty())
    throw std::invalid_argument("init_numphase_ensemble: all grid points pruned");
  if (summary) {
    summary->kept = paths.size();
    summary->dropped = dropped;
    summary->sum_weight = static_cast<double>(sum_w);
  }

  // The discrete quadrature must reproduce the first moments exactly.
  long double a_re = 0, a_im = 0, nbar = 0, wtot = 0;
  for (const auto& p : paths) {
    const double n = 0.5 * p.two_n;
    wtot += p.omega;
    if (p.two_n >= 1) {
      const double r = std::sqrt(n + 0.5);
      a_re += p.omega * r * std::cos(p.phi);
      a_im += p.omega * r * std::sin(p.phi);
    }
    if (p.two_n >= 0) nbar += p.omega * (n + 1.0);
  }
  const Complex a_est(static_cast<double>(a_re / wtot), static_cast<double>(a_im / wtot));
  const double n_est = static_cast<double>(nbar / wtot) - 1.0;
  if (std::abs(a_est - alpha0) > 1e-10 || std::abs(n_est - std::norm(alpha0)) > 1e-10)
    throw std::runtime_error(
        "init_numphase_ensemble: grid too coarse, initial moment check failed");
  return paths;
}

std::vector<TwPath> init_tw_ensemble(Complex alpha0, std::int64_t n_traj,
                                     std::uint64_t seed) {
  if (n_traj < 1) throw std::invalid_argument("init_tw_ensemble: n_traj must be >= 1");
  std::vector<TwPath> paths(static_cast<std::size_t>(n_traj));
  for (std::int64_t i = 0; i < n_traj; ++i) {
    Rng rng(seed, kSaltTwInit + static_cast<std::uint64_t>(i));
    paths[static_cast<std::size_t>(i)].alpha =
        alpha0 + 0.5 * Complex(rng.normal(), rng.normal());
  }
  return paths;
}

std::vector<GaugePPath> init_gauge_p_ensemble(Complex alpha0, std::int64_t n_traj) {
  if (n_traj < 1) throw std::invalid_argument("init_gauge_p_ensemble: n_traj must be >= 1");
  if (std::abs(alpha0) == 0.0)
    throw std::invalid_argument("init_gauge_p_ensemble: alpha0 = 0 has no log amplitude");
  GaugePPath p;
  p.log_amp = Complex(1.0, 1.0) * std::log(alpha0);
  p.log_amp_conj = Complex(1.0, 1.0) * std::log(std::conj(alpha0));
  p.theta = 0.0;
  p.alpha = std::exp(Complex(0.5, -0.5) * p.log_amp);
  p.beta = std::exp(Complex(0.5, -0.5) * p.log_amp_conj);
  return std::vector<GaugePPath>(static_cast<std::size_t>(n_traj), p);
}

void step_numphase(NumPhasePath& path, const ModelParams& p, double dt, Rng& rng) {
  if (path.two_n < 0) return;  // frozen boundary row
  const double n = 0.5 * path.two_n;
  path.phi -= p.chi * n * dt;
  if (p.gamma > 0) {
    path.phi += 0.5 * std::sqrt(p.gamma / (n + 1.0)) * std::sqrt(dt) * rng.normal();
    const double p_jump = p.gamma * n * dt;  // n >= 0 here
    if (rng.uniform() < p_jump) path.two_n -= 2;
  }
}

void step_truncated_wigner(TwPath& path, const ModelParams& p, double dt, Rng& rng) {
  if (path.flagged) return;
  // Split step: the deterministic flow d|alpha|^2/dt = -gamma |alpha|^2,
  // d(arg alpha)/dt = chi (1/2 - |alpha|^2) is solved exactly, then the
  // Euler-Maruyama noise kick is applied.  A literal explicit Euler step is
  // unstable on the Kerr rotation (|alpha|^2 grows as du/dt ~ chi^2 dt u^3,
  // a finite-time blow-up for the ensemble tail at the default step size).
  const double u0 = std::norm(path.alpha);
  const double int_u = p.gamma > 0 ? u0 * (1.0 - std::exp(-p.gamma * dt)) / p.gamma
                                   : u0 * dt;
  Complex next = path.alpha * std::polar(std::exp(-0.5 * p.gamma * dt),
                                         p.chi * (0.5 * dt - int_u));
  if (p.gamma > 0)
    next += 0.5 * std::sqrt(p.gamma) * std::sqrt(dt) * Complex(rng.normal(), rng.normal());
  if (!finite(next)) {
    path.flagged = true;
    return;
  }
  path.alpha = next;
}

void step_gauge_p(GaugePPath& path, const ModelParams& p, double dt, Rng& rng) {
  if (path.flagged) return;
  const Complex iu(0.0, 1.0);
  const Complex n = path.alpha * std::conj(path.beta);
  const double g1 = 0.005 * (n.imag() - n.real() + std::norm(path.alpha));
  const double g2 = 0.005 * (n.imag() + n.real() - std::norm(path.beta));
  const double tg = std::tan(path.theta);
  const double sdt = std::sqrt(dt);
  const double dw1 = sdt * rng.normal();
  const double dw2 = sdt * rng.normal();
  const double noise = std::sqrt(2.0 * p.chi);

  GaugePPath next = path;
  next.log_amp += (p.chi * (n * (1.0 - iu) - 2.0 * g1 * (tg + iu)) -
                   0.5 * p.gamma * (1.0 + iu)) *
                      dt +
                  noise * dw1;
  next.log_amp_conj += (p.chi * (std::conj(n) * (1.0 - iu) - 2.0 * g2 * (tg - iu)) -
                        0.5 * p.gamma * (1.0 + iu)) *
                           dt +
                       noise * dw2;
  next.theta += -2.0 * tg * (g1 * g1 + g2 * g2) * dt + kSqrt2 * (g2 * dw2 - g1 * dw1);
  next.alpha = std::exp(Complex(0.5, -0.5) * next.log_amp);
  next.beta = std::exp(Complex(0.5, -0.5) * next.log_amp_conj);
  const double re_n = (next.alpha * std::conj(next.beta)).real();
  if (!finite(next.log_amp) || !finite(next.log_amp_conj) || !finite(next.alpha) ||
      !finite(next.beta) || !std::isfinite(next.theta) || !std::isfinite(re_n) ||
      std::abs(re_n) > 700.0) {
    path.flagged = true;  // freeze at the last healthy state
    return;
  }
  path = next;
}

double gauge_p_weight(const GaugePPath& path) {
  const double re_n = (path.alpha * std::conj(path.beta)).real();
  return 2.0 * std::exp(re_n) * std::cos(path.theta);
}

std::vector<PathObservable<NumPhasePath>> numphase_observables() {
  return {
      // x estimator sqrt(2) sqrt(n + 1/2) cos(phi), zero below n = 1/2
      {"x",
       [](const NumPhasePath& p) {
         if (p.two_n < 1) return 0.0;
         return kSqrt2 * std::sqrt(0.5 * p.two_n + 0.5) * std::cos(p.phi);
       }},
      // n estimator from the (1,1) anti-normal estimator, (n+1) 1(n >= 0) - 1
      {"n",
       [](const NumPhasePath& p) {
         return p.two_n >= 0 ? 0.5 * p.two_n : -1.0;
       }},
  };
}

std::vector<PathObservable<TwPath>> tw_observables() {
  return {
      {"x", [](const TwPath& p) { return kSqrt2 * p.alpha.real(); }},
      // symmetric-ordering offset: E|alpha|^2 = <n> + 1/2
      {"n", [](const TwPath& p) { return std::norm(p.alpha) - 0.5; }},
  };
}

std::vector<PathObservable<GaugePPath>> gauge_p_observables() {
  return {
      {"x",
       [](const GaugePPath& p) { return (p.alpha + std::conj(p.beta)).real() / kSqrt2; }},
      {"n", [](const GaugePPath& p) { return (p.alpha * std::conj(p.beta)).real(); }},
  };
}

const SeriesColumn* EnsembleTimeSeries::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

struct Interval {
  long long n_steps = 0;  // (n_steps - 1) full dt steps plus one closing step
  double dt = 0.0;
  double last_dt = 0.0;
};

std::vector<Interval> plan_intervals(const std::vector<double>& times, double dt) {
  std::vector<Interval> plan(times.size());
  double t = 0.0;
  for (std::size_t s = 0; s < times.size(); ++s) {
    const double span = times[s] - t;
    Interval iv;
    iv.dt = dt;
    if (span > 1e-15) {
      iv.n_steps = static_cast<long long>(std::ceil(span / dt - 1e-9));
      if (iv.n_steps < 1) iv.n_steps = 1;
      iv.last_dt = span - (iv.n_steps - 1) * dt;
    }
    plan[s] = iv;
    t = times[s];
  }
  return plan;
}

template <typename Path, typename Stepper, typename WeightFn>
EnsembleTimeSeries integrate_paths(const std::vector<Path>& init, const ModelParams& mp,
                                   const IntegrationParams& ip, Stepper step,
                                   WeightFn weight_of,
                                   const std::vector<PathObservable<Path>>& obs,
                                   std::uint64_t stream_salt) {
  const auto& times = ip.sample_times;
  const std::size_t n_paths = init.size();
  const std::size_t n_times = times.size();
  const std::size_t n_obs = obs.size();
  if (n_paths == 0) throw std::invalid_argument("run_ensemble: empty ensemble");
  const auto plan = plan_intervals(times, ip.dt);

  // Per sample time: [sum w, sum w^2, then per observable (wf, w^2 f, w^2 f^2)].
  const std::size_t stride = 2 + 3 * n_obs;
  constexpr std::size_t kBlock = 4096;  // fixed block partition => fixed reduction order
  const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<std::vector<long double>> partials(n_blocks);
  std::vector<std::vector<std::int64_t>> flag_counts(n_blocks);

  std::atomic<std::size_t> next_block{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      auto& acc = partials[b];
      acc.assign(n_times * stride, 0.0L);
      auto& flags = flag_counts[b];
      flags.assign(n_times, 0);
      const std::size_t lo = b * kBlock;
      const std::size_t hi = std::min(n_paths, lo + kBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        Path path = init[i];
        Rng rng(ip.seed, stream_salt + static_cast<std::uint64_t>(i));
        for (std::size_t s = 0; s < n_times; ++s) {
          const Interval& iv = plan[s];
          for (long long k = 0; k + 1 < iv.n_steps; ++k) step(path, mp, iv.dt, rng);
          if (iv.n_steps > 0) step(path, mp, iv.last_dt, rng);
          const double w = weight_of(path);
          long double* a = acc.data() + s * stride;
          const long double lw = w;
          a[0] += lw;
          a[1] += lw * lw;
          for (std::size_t o = 0; o < n_obs; ++o) {
            const long double f = obs[o].eval(path);
            a[2 + 3 * o] += lw * f;
            a[3 + 3 * o] += lw * lw * f;
            a[4 + 3 * o] += lw * lw * f * f;
          }
          if (path.flagged) ++flags[s];
        }
      }
    }
  };

  int n_threads = ip.threads > 0 ? ip.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min<int>(n_threads, static_cast<int>(n_blocks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Reduce partial sums in block order; identical for every thread count.
  std::vector<long double> total(n_times * stride, 0.0L);
  std::vector<std::int64_t> flagged(n_times, 0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += partials[b][i];
    for (std::size_t s = 0; s < n_times; ++s) flagged[s] += flag_counts[b][s];
  }

  // Abort point: first sample time with more than 1% of paths flagged.
  std::size_t keep = n_times;
  for (std::size_t s = 0; s < n_times; ++s) {
    if (static_cast<double>(flagged[s]) > 0.01 * static_cast<double>(n_paths)) {
      keep = s;
      break;
    }
  }

  EnsembleTimeSeries out;
  out.times.assign(times.begin(), times.begin() + keep);
  out.mean_weight.resize(keep);
  out.columns.resize(n_obs);
  for (std::size_t o = 0; o < n_obs; ++o) {
    out.columns[o].name = obs[o].name;
    out.columns[o].mean.resize(keep);
    out.columns[o].sem.resize(keep);
  }
  for (std::size_t s = 0; s < keep; ++s) {
    const long double* a = total.data() + s * stride;
    out.mean_weight[s] = static_cast<double>(a[0] / static_cast<long double>(n_paths));
    for (std::size_t o = 0; o < n_obs; ++o) {
      WeightMoments m;
      m.w = a[0];
      m.w2 = a[1];
      m.wf = a[2 + 3 * o];
      m.w2f = a[3 + 3 * o];
      m.w2f2 = a[4 + 3 * o];
      m.n = static_cast<std::int64_t>(n_paths);
      const WeightedStats st = stats_from_moments(m);
      out.columns[o].mean[s] = st.mean;
      out.columns[o].sem[s] = st.sem;
    }
  }
  out.flagged_fraction =
      keep > 0 ? static_cast<double>(flagged[keep - 1]) / static_cast<double>(n_paths)
               : 1.0;
  if (keep < n_times) {
    out.status = "aborted at t = " + std::to_string(times[keep]) + ": " +
                 std::to_string(100.0 * static_cast<double>(flagged[keep]) /
                                static_cast<double>(n_paths)) +
                 "% of paths flagged divergent";
  }
  return out;
}

double numphase_n_max(const std::vector<NumPhasePath>& init) {
  int m = 0;
  for (const auto& p : init) m = std::max(m, p.two_n);
  return 0.5 * m;
}

}  // namespace

EnsembleTimeSeries run_ensemble(const std::vector<NumPhasePath>& init,
                                const ModelParams& mp, const IntegrationParams& ip) {
  validate(ip, mp, numphase_n_max(init));
  return integrate_paths(
      init, mp, ip, step_numphase, [](const NumPhasePath& p) { return p.omega; },
      numphase_observables(), kSaltNumphaseStep);
}

EnsembleTimeSeries run_ensemble(const std::vector<TwPath>& init, const ModelParams& mp,
                                const IntegrationParams& ip) {
  validate(ip, mp, std::norm(mp.alpha0) + 6.0 * std::abs(mp.alpha0) + 10.0);
  return integrate_paths(
      init, mp, ip, step_truncated_wigner, [](const TwPath&) { return 1.0; },
      tw_observables(), kSaltTwStep);
}

EnsembleTimeSeries run_ensemble(const std::vector<GaugePPath>& init,
                                const ModelParams& mp, const IntegrationParams& ip) {
  if (mp.chi < 0)
    throw std::invalid_argument("run_ensemble: gauge-P+ noise needs chi >= 0");
  validate(ip, mp, std::norm(mp.alpha0) + 6.0 * std::abs(mp.alpha0) + 10.0);
  return integrate_paths(init, mp, ip, step_gauge_p, gauge_p_weight,
                         gauge_p_observables(), kSaltGaugeStep);
}

}  // namespace npw
