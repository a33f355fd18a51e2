#pragma once

#include <complex>

#include "npw/fock.hpp"
#include "npw/rng.hpp"

namespace npw::testing {

// Random Hermitian matrix with unit trace (not necessarily positive).
inline DensityMatrix random_hermitian_unit_trace(int dim, Rng& rng) {
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      a(i, j) = Complex(rng.normal(), rng.normal());
  DensityMatrix h = 0.5 * (a + a.adjoint());
  const Complex tr = h.trace();
  h += ((1.0 - tr) / static_cast<double>(dim)) * Eigen::MatrixXcd::Identity(dim, dim);
  return h;
}

// Random physical state: positive semidefinite with unit trace.
inline DensityMatrix random_density(int dim, Rng& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      g(i, j) = Complex(rng.normal(), rng.normal());
  DensityMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint().eval());
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// Heisenberg-picture closed form for the undamped Kerr oscillator,
// <a(t)> = alpha e^{-i chi t / 2} exp(|alpha|^2 (e^{-i chi t} - 1)),
// derived independently as the Fock-series sum.
inline Complex kerr_coherent_amplitude(Complex alpha, double chi, double t) {
  const Complex iu(0.0, 1.0);
  return alpha * std::exp(-iu * chi * t / 2.0) *
         std::exp(std::norm(alpha) * (std::exp(-iu * chi * t) - 1.0));
}

}  // namespace npw::testing
