#pragma once

#include <iosfwd>
#include <vector>

#include "npw/fock.hpp"

namespace npw {

/// Number-phase Wigner coefficient table.
///
/// W(n, phi) = (1/2pi) sum_k c_k(n) e^{-2 i k phi} with half-integer n and
/// integer-spaced k, |k| <= n.  Half-integers are stored doubled: row
/// d = 2n in [0, two_n_max], entry j in [0, d] holds
///   c_k(n) = <n+k|rho|n-k>  with  k2 = 2k = 2j - d,
/// i.e. row d is the d-th anti-diagonal of the density matrix,
/// c(d, j) = rho(j, d - j).  Storing Fourier coefficients instead of
/// phi-sampled values keeps the representation exact: every phi integral
/// is a finite discrete sum.
class NumPhaseDist {
 public:
  explicit NumPhaseDist(int two_n_max);

  int two_n_max() const { return two_n_max_; }
  int density_dim() const { return two_n_max_ / 2 + 1; }

  Complex coeff(int d, int k2) const;
  void set_coeff(int d, int k2, Complex v);

  const std::vector<Complex>& row(int d) const { return rows_[d]; }
  std::vector<Complex>& row(int d) { return rows_[d]; }

  /// max |c_{-k}(n) - conj(c_k(n))| over the table (0 for Hermitian input).
  double conjugate_symmetry_defect() const;

  /// sum over integer n of c_0(n); equals Tr[rho] = 1 for physical states.
  Complex trace() const;

  /// max |table difference| against another table of the same size.
  double max_abs_diff(const NumPhaseDist& other) const;

 private:
  int two_n_max_;
  std::vector<std::vector<Complex>> rows_;  // rows_[d].size() == d + 1
};

/// Exact transform rho -> W; two_n_max = 2 (D - 1).  Rejects non-Hermitian
/// input (the conjugate-symmetry invariant of the table would fail).
NumPhaseDist from_density(const DensityMatrix& rho);

/// Exact inverse of from_density; rejects tables whose conjugate-symmetry
/// defect exceeds 1e-10.
DensityMatrix to_density(const NumPhaseDist& w);

/// W(n, phi) for 2n = two_n; real by construction, throws if the imaginary
/// residue of the Fourier sum exceeds 1e-12 (corrupted table).
double eval_w(const NumPhaseDist& w, int two_n, double phi);

/// Integer-n marginal, integral over phi of W(n, .) = <n|rho|n>.
std::vector<double> marginal_number(const NumPhaseDist& w);

/// Uniform phi grid, phi_j = 2 pi j / M.
struct PhiGrid {
  int m = 0;
  std::vector<double> phis;
};

PhiGrid make_phi_grid(int m);

/// Phase marginal sum_n W(n, phi_j); equals the Susskind-Glogower
/// distribution <phi|rho|phi>.  Requires M >= 2 two_n_max + 2 so the grid
/// resolves every frequency in the table.
std::vector<double> marginal_phase(const NumPhaseDist& w, const PhiGrid& grid);

/// Closed-form coherent-state table,
///   c_k(n) = |alpha|^{2n} e^{-|alpha|^2} e^{2 i k arg(alpha)} / sqrt((n+k)!(n-k)!).
/// Throws when the Poisson tail beyond n_max = two_n_max/2 exceeds 1e-9.
NumPhaseDist coherent_closed_form(Complex alpha, int two_n_max);

/// Anti-normal moment Tr[a^q (a^dag)^p rho] evaluated from the table via the
/// moment identity (exact discrete sum).  Requires p + q < two_n_max / 2.
Complex antinormal_moment(const NumPhaseDist& w, int p, int q);

/// Pointwise estimator entering the moment identity:
///   0 for n < |q-p|/2, else
///   Gamma(n + (p+q)/2 + 1) e^{i (q-p) phi}
///     / sqrt(Gamma(n + (q-p)/2 + 1) Gamma(n + (p-q)/2 + 1)).
/// Reduces to sqrt(n + 1/2) e^{i phi} for (p,q) = (0,1) and n + 1 for (1,1).
Complex antinormal_estimator(int p, int q, double n, double phi);

/// Operator correspondences of the representation, applied exactly in
/// coefficient space.  The table is read as a density_dim()-dimensional
/// matrix, so the result equals from_density of the matrix product in the
/// same truncation.
enum class Correspondence {
  rho_number,     // rho n
  number_rho,     // n rho
  rho_phase,      // rho e^{i Phi}
  phase_dag_rho,  // (e^{i Phi})^dag rho
  rho_phase_dag,  // rho (e^{i Phi})^dag
  phase_rho,      // e^{i Phi} rho
};

NumPhaseDist apply_correspondence(const NumPhaseDist& w, Correspondence which);

/// Exact evolution generator of the damped Kerr oscillator in coefficient
/// space (phi derivatives become -2ik):
///   dc_k(n)/dt = -2 i chi n k c_k(n) - gamma n c_k(n)
///                + gamma sqrt((n+1)^2 - k^2) c_k(n+1).
NumPhaseDist generator_exact(const NumPhaseDist& w, const ModelParams& p);

/// Generator after the square-root and locality approximations used for the
/// stochastic unraveling:
///   dc_k(n)/dt = -2 i chi n k c_k(n) - gamma k^2/(2(n+1)) c_k(n)
///                + gamma ((n+1) c_k(n+1) - n c_k(n)).
NumPhaseDist generator_truncated(const NumPhaseDist& w, const ModelParams& p);

/// CSV export of W evaluated on the (n, phi) grid; columns two_n, phi, w.
void write_wigner_csv(const NumPhaseDist& w, const PhiGrid& grid, std::ostream& out);

}  // namespace npw
