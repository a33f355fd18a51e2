#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace npw {

using Complex = std::complex<double>;
using DensityMatrix = Eigen::MatrixXcd;

/// Damped anharmonic (Kerr) oscillator parameters:
///   d rho/dt = -i (chi/2) [(a^dag a)^2, rho] + gamma D[a] rho,
///   D[a] rho = a rho a^dag - (a^dag a rho + rho a^dag a)/2.
struct ModelParams {
  double chi = 0.0;     // Kerr rate [1/time]
  double gamma = 0.0;   // damping rate [1/time], >= 0
  Complex alpha0 = 0.0; // initial coherent amplitude
  int dim = 0;          // Fock truncation D
};

/// Smallest safe truncation for a coherent state of amplitude alpha,
/// ceil(|alpha|^2 + 6 |alpha| + 10); keeps the Poisson tail below ~1e-9.
int min_fock_dim(Complex alpha);

void validate(const ModelParams& p);

/// Pure state in the truncated Fock basis, index = occupation.
struct FockVector {
  Eigen::VectorXcd amps;
  int dim() const { return static_cast<int>(amps.size()); }
};

/// Coherent state |alpha>, amplitudes alpha^p e^{-|alpha|^2/2}/sqrt(p!),
/// renormalised after truncation.  Fails if the truncation leakage
/// 1 - sum |amps|^2 exceeds 1e-8; the raw leakage is reported through
/// truncation_leakage when given.
FockVector coherent_state(Complex alpha, int dim, double* truncation_leakage = nullptr);

DensityMatrix fock_projector(int m, int dim);
DensityMatrix outer(const FockVector& psi);

Eigen::MatrixXcd annihilation_op(int dim);
/// Susskind-Glogower exponential phase operator, sum_m |m><m+1|.
Eigen::MatrixXcd phase_exponential_op(int dim);

/// Right-hand side of the master equation; Hermitian and traceless output.
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const ModelParams& p);

/// Fixed-step classical RK4 on lindblad_rhs, re-symmetrising each step.
/// Returns one snapshot per tgrid entry (tgrid ascending, from t = 0).
/// Preconditions: chi * D^2 * dt < 0.1 (stability heuristic); trace drift
/// beyond 1e-9 or non-finite entries abort with an exception.
std::vector<DensityMatrix> evolve_master(const DensityMatrix& rho0, const ModelParams& p,
                                         const std::vector<double>& tgrid, double dt);

/// Tr[a^q (a^dag)^p rho] by direct matrix algebra; the oracle for the
/// anti-normal moment identity.  Requires p + q < D/2.
Complex expect_antinormal_direct(const DensityMatrix& rho, int p, int q);

/// <x> with x = (a + a^dag)/sqrt(2); throws if the imaginary residue of the
/// underlying traces exceeds 1e-10.
double expect_position(const DensityMatrix& rho);

double expect_number(const DensityMatrix& rho);

double hermiticity_defect(const DensityMatrix& rho);

}  // namespace npw
