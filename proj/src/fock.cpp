#include "npw/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace npw {

int min_fock_dim(Complex alpha) {
  const double a = std::abs(alpha);
  return static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0));
}

void validate(const ModelParams& p) {
  if (!(p.gamma >= 0)) throw std::invalid_argument("ModelParams: gamma must be >= 0");
  if (p.dim < 1) throw std::invalid_argument("ModelParams: dim must be >= 1");
  if (std::abs(p.alpha0) > 0 && p.dim < min_fock_dim(p.alpha0))
    throw std::invalid_argument("ModelParams: dim below the Poisson-tail bound " +
                                std::to_string(min_fock_dim(p.alpha0)));
}

FockVector coherent_state(Complex alpha, int dim, double* truncation_leakage) {
  if (dim < 1) throw std::invalid_argument("coherent_state: dim must be >= 1");
  FockVector psi;
  psi.amps = Eigen::VectorXcd::Zero(dim);
  const double mag = std::abs(alpha);
  if (mag == 0.0) {
    psi.amps[0] = 1.0;
    if (truncation_leakage) *truncation_leakage = 0.0;
    return psi;
  }
  const double theta = std::arg(alpha);
  double norm2 = 0.0;
  for (int p = 0; p < dim; ++p) {
    const double logmag = p * std::log(mag) - 0.5 * mag * mag - 0.5 * std::lgamma(p + 1.0);
    const double r = std::exp(logmag);
    psi.amps[p] = std::polar(r, p * theta);
    norm2 += r * r;
  }
  const double leakage = 1.0 - norm2;
  if (truncation_leakage) *truncation_leakage = leakage;
  if (leakage > 1e-8)
    throw std::invalid_argument("coherent_state: truncation leakage " +
                                std::to_string(leakage) + " exceeds 1e-8 at dim " +
                                std::to_string(dim));
  psi.amps /= std::sqrt(norm2);
  return psi;
}

DensityMatrix fock_projector(int m, int dim) {
  if (m < 0 || m >= dim)
    throw std::invalid_argument("fock_projector: m out of range [0, dim)");
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  rho(m, m) = 1.0;
  return rho;
}

DensityMatrix outer(const FockVector& psi) { return psi.amps * psi.amps.adjoint(); }

Eigen::MatrixXcd annihilation_op(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 1; m < dim; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  return a;
}

Eigen::MatrixXcd phase_exponential_op(int dim) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 0; m + 1 < dim; ++m) e(m, m + 1) = 1.0;
  return e;
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const ModelParams& p) {
  const int dim = static_cast<int>(rho.rows());
  if (rho.cols() != dim) throw std::invalid_argument("lindblad_rhs: rho must be square");
  if (p.dim > 0 && p.dim != dim)
    throw std::invalid_argument("lindblad_rhs: dimension mismatch with ModelParams");
  DensityMatrix out(dim, dim);
  const Complex iu(0.0, 1.0);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      const double da = a, db = b;
      Complex v = -iu * (0.5 * p.chi) * (da * da - db * db) * rho(a, b);
      v -= 0.5 * p.gamma * (da + db) * rho(a, b);
      if (a + 1 < dim && b + 1 < dim)
        v += p.gamma * std::sqrt((da + 1.0) * (db + 1.0)) * rho(a + 1, b + 1);
      out(a, b) = v;
    }
  }
  return out;
}

namespace {

void rk4_step(DensityMatrix& rho, const ModelParams& p, double dt, DensityMatrix& k1,
              DensityMatrix& k2, DensityMatrix& k3, DensityMatrix& k4) {
  k1 = lindblad_rhs(rho, p);
  k2 = lindblad_rhs(rho + (0.5 * dt) * k1, p);
  k3 = lindblad_rhs(rho + (0.5 * dt) * k2, p);
  k4 = lindblad_rhs(rho + dt * k3, p);
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  rho = 0.5 * (rho + rho.adjoint().eval());  // suppress Hermiticity drift
}

}  // namespace

std::vector<DensityMatrix> evolve_master(const DensityMatrix& rho0, const ModelParams& p,
                                         const std::vector<double>& tgrid, double dt) {
  const int dim = static_cast<int>(rho0.rows());
  if (rho0.cols() != dim) throw std::invalid_argument("evolve_master: rho0 must be square");
  if (!(dt > 0)) throw std::invalid_argument("evolve_master: dt must be positive");
  if (p.chi * dim * dim * dt >= 0.1)
    throw std::invalid_argument("evolve_master: chi * D^2 * dt = " +
                                std::to_string(p.chi * dim * dim * dt) +
                                " violates the < 0.1 stability bound");
  if (tgrid.empty()) throw std::invalid_argument("evolve_master: empty time grid");
  for (std::size_t i = 0; i < tgrid.size(); ++i) {
    if (tgrid[i] < 0 || (i > 0 && tgrid[i] <= tgrid[i - 1]))
      throw std::invalid_argument("evolve_master: tgrid must be ascending and >= 0");
  }

  std::vector<DensityMatrix> snapshots;
  snapshots.reserve(tgrid.size());
  DensityMatrix rho = rho0;
  DensityMatrix k1, k2, k3, k4;
  const double trace0 = rho0.trace().real();
  double t = 0.0;
  for (double target : tgrid) {
    const double span = target - t;
    if (span > 1e-15) {
      const auto n_steps = static_cast<long long>(std::ceil(span / dt - 1e-9));
      for (long long s = 0; s + 1 < n_steps; ++s) rk4_step(rho, p, dt, k1, k2, k3, k4);
      const double last = span - (n_steps - 1) * dt;
      rk4_step(rho, p, last, k1, k2, k3, k4);
    }
    t = target;
    if (!rho.allFinite()) throw std::runtime_error("evolve_master: non-finite state at t = " +
                                                   std::to_string(t));
    if (std::abs(rho.trace().real() - trace0) > 1e-9)
      throw std::runtime_error("evolve_master: trace drift exceeds 1e-9 at t = " +
                               std::to_string(t));
    snapshots.push_back(rho);
  }
  return snapshots;
}

Complex expect_antinormal_direct(const DensityMatrix& rho, int p, int q) {
  const int dim = static_cast<int>(rho.rows());
  if (p < 0 || q < 0) throw std::invalid_argument("expect_antinormal_direct: p, q >= 0");
  if (p + q > dim / 2)
    throw std::invalid_argument("expect_antinormal_direct: p + q must be <= D/2");
  // Embed rho so the raising operators keep their headroom; the product of
  // truncated ladder matrices would silently drop the top-row terms.
  const int big = dim + p + q;
  Eigen::MatrixXcd padded = Eigen::MatrixXcd::Zero(big, big);
  padded.topLeftCorner(dim, dim) = rho;
  const Eigen::MatrixXcd a = annihilation_op(big);
  const Eigen::MatrixXcd ad = a.adjoint();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(big, big);
  for (int i = 0; i < q; ++i) m = m * a;
  for (int i = 0; i < p; ++i) m = m * ad;
  return (m * padded).trace();
}

double expect_position(const DensityMatrix& rho) {
  const int dim = static_cast<int>(rho.rows());
  const Eigen::MatrixXcd a = annihilation_op(dim);
  const Complex z = ((a * rho).trace() + (a.adjoint() * rho).trace()) / std::sqrt(2.0);
  if (std::abs(z.imag()) > 1e-10)
    throw std::runtime_error("expect_position: imaginary residue " +
                             std::to_string(z.imag()) + " exceeds 1e-10");
  return z.real();
}

double expect_number(const DensityMatrix& rho) {
  Complex s = 0.0;
  for (int m = 0; m < rho.rows(); ++m) s += static_cast<double>(m) * rho(m, m);
  if (std::abs(s.imag()) > 1e-10)
    throw std::runtime_error("expect_number: imaginary residue exceeds 1e-10");
  return s.real();
}

double hermiticity_defect(const DensityMatrix& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace npw
