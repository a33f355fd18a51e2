#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "npw/fock.hpp"
#include "npw/numphase.hpp"
#include "npw/rng.hpp"

namespace npw {

/// One number-phase trajectory.  The half-integer occupation is stored
/// doubled; it only ever decreases by unit jumps (two_n -= 2), so the
/// integer/half-integer parity class is conserved.  two_n = -1 (n = -1/2,
/// reachable only from n = 1/2 rows) is a frozen boundary: no drift, no
/// diffusion, no jumps, and every moment estimator vanishes there.
/// The signed weight is static for the whole trajectory.
struct NumPhasePath {
  int two_n = 0;
  double phi = 0.0;
  double omega = 1.0;
  bool flagged = false;
};

/// Truncated-Wigner trajectory (implicit weight 1).
struct TwPath {
  Complex alpha;
  bool flagged = false;
};

/// Gauge-P+ trajectory.  alpha = exp((1-i)/2 log_amp) and
/// beta = exp((1-i)/2 log_amp_conj) are cached after each committed step;
/// beta(0) = conj(alpha(0)).  A path is flagged divergent (and frozen) when
/// |Re[alpha conj(beta)]| would exceed 700 (the e^x overflow scale of its
/// weight) or any component stops being finite.
struct GaugePPath {
  Complex log_amp;       // phi_t
  Complex log_amp_conj;  // psi_t
  double theta = 0.0;    // theta-tilde
  Complex alpha;
  Complex beta;
  bool flagged = false;
};

struct IntegrationParams {
  double dt = 1e-3;
  double t_final = 7.0;
  std::vector<double> sample_times;  // ascending, in [0, t_final]
  std::int64_t n_traj = 100000;
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = hardware concurrency
};

/// Step-size invariants: gamma n_max dt < 0.1 (per-step jump probability)
/// and chi n_max dt < 0.1 (phase-drift resolution).
void validate(const IntegrationParams& ip, const ModelParams& mp, double n_max);

enum class Method { oracle, numphase, tw, gaugep };

struct InitSummary {
  std::size_t kept = 0;
  std::size_t dropped = 0;
  double sum_weight = 0.0;
};

/// Deterministic grid sampler over (n, phi) for the closed-form coherent
/// table: rows 2n in [0, two_n_max] times M uniform phases, weight
/// omega = (2 pi / M) W_alpha(n, phi_j).  Grid points with |omega| below
/// prune_threshold are dropped (kept by default).  Verifies the initial
/// weighted moments <a> = alpha0 and <n> = |alpha0|^2 to 1e-10 and throws
/// "grid too coarse" otherwise.
std::vector<NumPhasePath> init_numphase_ensemble(Complex alpha0, int two_n_max,
                                                 int phi_points,
                                                 double prune_threshold = 0.0,
                                                 InitSummary* summary = nullptr);

/// Symmetric-ordering vacuum noise around alpha0: alpha = alpha0 +
/// (eta1 + i eta2)/2 with independent standard normals (variance 1/4 per
/// quadrature).  Path i draws from stream (seed, tw-init salt + i).
std::vector<TwPath> init_tw_ensemble(Complex alpha0, std::int64_t n_traj,
                                     std::uint64_t seed);

/// All paths start at the deterministic point alpha = alpha0, beta = alpha0*,
/// theta = 0 (the positive-P density of a coherent state is a delta).
std::vector<GaugePPath> init_gauge_p_ensemble(Complex alpha0, std::int64_t n_traj);

/// Euler-Maruyama step of the jump-diffusion unraveling:
///   dphi = -chi n dt + sqrt(gamma)/(2 sqrt(n+1)) dW,
///   dn   = -dN,  dN ~ Bernoulli(gamma max(n,0) dt).
void step_numphase(NumPhasePath& path, const ModelParams& p, double dt, Rng& rng);

/// d alpha = (i chi alpha (1/2 - |alpha|^2) - gamma/2 alpha) dt
///           + sqrt(gamma)/2 (dW1 + i dW2).
/// Integrated split-step: the drift flow is solved exactly within the step
/// (it conserves |alpha| up to the e^{-gamma t/2} decay), then the noise
/// kick is added; explicit Euler on the Kerr rotation is unstable.
void step_truncated_wigner(TwPath& path, const ModelParams& p, double dt, Rng& rng);

/// Gauge-P+ equations with gauge terms G1, G2 and T = tan(theta); noise
/// sqrt(2 chi) dW on both log amplitudes and sqrt(2)(G2 dW2 - G1 dW1) on
/// theta.  Draws two normals per step.
void step_gauge_p(GaugePPath& path, const ModelParams& p, double dt, Rng& rng);

/// Per-path gauge-P+ weight at observation time, 2 e^{Re[alpha beta*]} cos(theta).
double gauge_p_weight(const GaugePPath& path);

template <typename Path>
struct PathObservable {
  std::string name;
  std::function<double(const Path&)> eval;
};

/// Standard observables recorded for every method: "x" and "n".
std::vector<PathObservable<NumPhasePath>> numphase_observables();
std::vector<PathObservable<TwPath>> tw_observables();
std::vector<PathObservable<GaugePPath>> gauge_p_observables();

struct SeriesColumn {
  std::string name;
  std::vector<double> mean;
  std::vector<double> sem;
};

struct EnsembleTimeSeries {
  std::vector<double> times;
  std::vector<SeriesColumn> columns;
  std::vector<double> mean_weight;
  std::string status = "ok";
  std::string notes;
  double flagged_fraction = 0.0;

  const SeriesColumn* find(const std::string& name) const;
};

/// Integrates every path over sample_times and records the weighted mean,
/// weighted standard error and E[omega] of each observable.  Path i draws
/// from the counter-based stream (seed, method salt + i), so trajectories
/// are bitwise reproducible for any thread count; per-block partial sums
/// are reduced in fixed order.  If more than 1% of paths are flagged
/// divergent at a sample time the series is truncated there and the status
/// records the abort.
EnsembleTimeSeries run_ensemble(const std::vector<NumPhasePath>& init,
                                const ModelParams& mp, const IntegrationParams& ip);
EnsembleTimeSeries run_ensemble(const std::vector<TwPath>& init, const ModelParams& mp,
                                const IntegrationParams& ip);
EnsembleTimeSeries run_ensemble(const std::vector<GaugePPath>& init,
                                const ModelParams& mp, const IntegrationParams& ip);

}  // namespace npw
