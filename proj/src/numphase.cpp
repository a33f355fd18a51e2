#include "npw/numphase.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace npw {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_row(const NumPhaseDist& w, int d) {
  if (d < 0 || d > w.two_n_max())
    throw std::invalid_argument("NumPhaseDist: row 2n = " + std::to_string(d) +
                                " outside [0, " + std::to_string(w.two_n_max()) + "]");
}

int entry_index(int d, int k2) {
  if (k2 < -d || k2 > d || ((d - k2) & 1))
    throw std::invalid_argument("NumPhaseDist: k2 = " + std::to_string(k2) +
                                " invalid for row 2n = " + std::to_string(d));
  return (d + k2) / 2;
}
}  // namespace

NumPhaseDist::NumPhaseDist(int two_n_max) : two_n_max_(two_n_max) {
  if (two_n_max < 0 || (two_n_max & 1))
    throw std::invalid_argument("NumPhaseDist: two_n_max must be even and >= 0");
  rows_.resize(two_n_max + 1);
  for (int d = 0; d <= two_n_max; ++d) rows_[d].assign(d + 1, Complex(0.0, 0.0));
}

Complex NumPhaseDist::coeff(int d, int k2) const {
  check_row(*this, d);
  return rows_[d][entry_index(d, k2)];
}

void NumPhaseDist::set_coeff(int d, int k2, Complex v) {
  check_row(*this, d);
  rows_[d][entry_index(d, k2)] = v;
}

double NumPhaseDist::conjugate_symmetry_defect() const {
  double defect = 0.0;
  for (int d = 0; d <= two_n_max_; ++d)
    for (int j = 0; j <= d; ++j)
      defect = std::max(defect, std::abs(rows_[d][j] - std::conj(rows_[d][d - j])));
  return defect;
}

Complex NumPhaseDist::trace() const {
  Complex s = 0.0;
  for (int d = 0; d <= two_n_max_; d += 2) s += rows_[d][d / 2];
  return s;
}

double NumPhaseDist::max_abs_diff(const NumPhaseDist& other) const {
  if (other.two_n_max_ != two_n_max_)
    throw std::invalid_argument("NumPhaseDist: size mismatch in max_abs_diff");
  double m = 0.0;
  for (int d = 0; d <= two_n_max_; ++d)
    for (int j = 0; j <= d; ++j)
      m = std::max(m, std::abs(rows_[d][j] - other.rows_[d][j]));
  return m;
}

NumPhaseDist from_density(const DensityMatrix& rho) {
  const int dim = static_cast<int>(rho.rows());
  if (rho.cols() != dim) throw std::invalid_argument("from_density: rho must be square");
  if (hermiticity_defect(rho) > 1e-10)
    throw std::invalid_argument("from_density: rho is not Hermitian");
  NumPhaseDist w(2 * (dim - 1));
  for (int d = 0; d <= w.two_n_max(); ++d) {
    auto& row = w.row(d);
    const int lo = std::max(0, d - (dim - 1));
    const int hi = std::min(d, dim - 1);
    for (int j = lo; j <= hi; ++j) row[j] = rho(j, d - j);
  }
  return w;
}

DensityMatrix to_density(const NumPhaseDist& w) {
  const double defect = w.conjugate_symmetry_defect();
  if (defect > 1e-10)
    throw std::invalid_argument("to_density: conjugate-symmetry defect " +
                                std::to_string(defect) + " exceeds 1e-10");
  const int dim = w.density_dim();
  DensityMatrix rho(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) rho(a, b) = w.row(a + b)[a];
  return rho;
}

double eval_w(const NumPhaseDist& w, int two_n, double phi) {
  check_row(w, two_n);
  const auto& row = w.row(two_n);
  Complex s = 0.0;
  for (int j = 0; j <= two_n; ++j) {
    const int k2 = 2 * j - two_n;
    s += row[j] * std::polar(1.0, -k2 * phi);
  }
  s /= kTwoPi;
  if (std::abs(s.imag()) > 1e-12)
    throw std::runtime_error("eval_w: imaginary residue " + std::to_string(s.imag()) +
                             " signals a corrupted table");
  return s.real();
}

std::vector<double> marginal_number(const NumPhaseDist& w) {
  std::vector<double> out(w.two_n_max() / 2 + 1);
  for (int n = 0; n < static_cast<int>(out.size()); ++n) {
    const Complex c = w.row(2 * n)[n];
    if (std::abs(c.imag()) > 1e-10)
      throw std::runtime_error("marginal_number: imaginary residue on the diagonal");
    out[n] = c.real();
  }
  return out;
}

PhiGrid make_phi_grid(int m) {
  if (m < 1) throw std::invalid_argument("make_phi_grid: M must be >= 1");
  PhiGrid g;
  g.m = m;
  g.phis.resize(m);
  for (int j = 0; j < m; ++j) g.phis[j] = kTwoPi * j / m;
  return g;
}

std::vector<double> marginal_phase(const NumPhaseDist& w, const PhiGrid& grid) {
  if (grid.m < 2 * w.two_n_max() + 2)
    throw std::invalid_argument("marginal_phase: grid must have M >= 2 two_n_max + 2");
  std::vector<double> out(grid.m, 0.0);
  for (int j = 0; j < grid.m; ++j) {
    double s = 0.0;
    for (int d = 0; d <= w.two_n_max(); ++d) s += eval_w(w, d, grid.phis[j]);
    out[j] = s;
  }
  return out;
}

NumPhaseDist coherent_closed_form(Complex alpha, int two_n_max) {
  NumPhaseDist w(two_n_max);
  const double mag = std::abs(alpha);
  if (mag == 0.0) {
    w.set_coeff(0, 0, 1.0);
    return w;
  }
  // Poisson tail beyond n_max must be negligible for the table to hold the state.
  const double mean = mag * mag;
  double head = 0.0;
  for (int n = 0; n <= two_n_max / 2; ++n)
    head += std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
  if (1.0 - head > 1e-9)
    throw std::invalid_argument("coherent_closed_form: Poisson tail " +
                                std::to_string(1.0 - head) +
                                " exceeds 1e-9; increase two_n_max");
  const double theta = std::arg(alpha);
  for (int d = 0; d <= two_n_max; ++d) {
    auto& row = w.row(d);
    for (int j = 0; j <= d; ++j) {
      const int k2 = 2 * j - d;
      const double logmag = d * std::log(mag) - mean -
                            0.5 * (std::lgamma(j + 1.0) + std::lgamma(d - j + 1.0));
      row[j] = std::polar(std::exp(logmag), k2 * theta);
    }
  }
  return w;
}

Complex antinormal_moment(const NumPhaseDist& w, int p, int q) {
  if (p < 0 || q < 0) throw std::invalid_argument("antinormal_moment: p, q >= 0");
  if (p + q >= w.two_n_max() / 2)
    throw std::invalid_argument("antinormal_moment: p + q must be < two_n_max / 2");
  const int delta = q - p;  // = 2k of the single surviving Fourier mode
  Complex s = 0.0;
  for (int d = std::abs(delta); d <= w.two_n_max(); d += 2) {
    const double g = std::exp(std::lgamma(0.5 * (d + p + q) + 1.0) -
                              0.5 * std::lgamma(0.5 * (d + delta) + 1.0) -
                              0.5 * std::lgamma(0.5 * (d - delta) + 1.0));
    s += g * w.row(d)[(d + delta) / 2];
  }
  return s;
}

Complex antinormal_estimator(int p, int q, double n, double phi) {
  if (p < 0 || q < 0) throw std::invalid_argument("antinormal_estimator: p, q >= 0");
  const double half_diff = 0.5 * (q - p);
  if (n < std::abs(half_diff)) return 0.0;
  const double g = std::exp(std::lgamma(n + 0.5 * (p + q) + 1.0) -
                            0.5 * std::lgamma(n + half_diff + 1.0) -
                            0.5 * std::lgamma(n - half_diff + 1.0));
  return std::polar(g, (q - p) * phi);
}

NumPhaseDist apply_correspondence(const NumPhaseDist& w, Correspondence which) {
  const int nmax2 = w.two_n_max();
  const int top = w.density_dim() - 1;  // largest Fock index of the represented matrix
  NumPhaseDist out(nmax2);
  for (int d = 0; d <= nmax2; ++d) {
    auto& dst = out.row(d);
    const auto& src = w.row(d);
    // entry j of row d is the matrix element (a, b) = (j, d - j)
    const auto in_matrix = [&](int j) { return j <= top && d - j <= top; };
    switch (which) {
      case Correspondence::rho_number:  // (rho n)_{a,b} = b rho_{a,b}
        for (int j = 0; j <= d; ++j) dst[j] = static_cast<double>(d - j) * src[j];
        break;
      case Correspondence::number_rho:  // (n rho)_{a,b} = a rho_{a,b}
        for (int j = 0; j <= d; ++j) dst[j] = static_cast<double>(j) * src[j];
        break;
      case Correspondence::rho_phase:  // rho_{a,b-1}; column shift from the row below
        for (int j = 0; j <= d; ++j)
          dst[j] = (d - j >= 1 && in_matrix(j)) ? w.row(d - 1)[j] : Complex(0.0, 0.0);
        break;
      case Correspondence::phase_dag_rho:  // rho_{a-1,b}
        for (int j = 0; j <= d; ++j)
          dst[j] = (j >= 1 && in_matrix(j)) ? w.row(d - 1)[j - 1] : Complex(0.0, 0.0);
        break;
      case Correspondence::rho_phase_dag:
        // rho_{a,b+1} comes from the row above; the entry this skips,
        // <2n+1|rho|0>, is exactly the vacuum-correlation term the
        // phi-space rule subtracts.
        for (int j = 0; j <= d; ++j)
          dst[j] = (d + 1 <= nmax2 && d - j + 1 <= top && j <= top)
                       ? w.row(d + 1)[j]
                       : Complex(0.0, 0.0);
        break;
      case Correspondence::phase_rho:  // rho_{a+1,b}, skipping <0|rho|2n+1>
        for (int j = 0; j <= d; ++j)
          dst[j] = (d + 1 <= nmax2 && j + 1 <= top && d - j <= top)
                       ? w.row(d + 1)[j + 1]
                       : Complex(0.0, 0.0);
        break;
    }
  }
  return out;
}

NumPhaseDist generator_exact(const NumPhaseDist& w, const ModelParams& p) {
  const int nmax2 = w.two_n_max();
  NumPhaseDist out(nmax2);
  const Complex iu(0.0, 1.0);
  for (int d = 0; d <= nmax2; ++d) {
    const double n = 0.5 * d;
    auto& dst = out.row(d);
    const auto& src = w.row(d);
    for (int j = 0; j <= d; ++j) {
      const double k = 0.5 * (2 * j - d);
      Complex v = (-2.0 * iu * p.chi * n * k - p.gamma * n) * src[j];
      if (d + 2 <= nmax2)
        v += p.gamma * std::sqrt((n + 1.0) * (n + 1.0) - k * k) * w.row(d + 2)[j + 1];
      dst[j] = v;
    }
  }
  return out;
}

NumPhaseDist generator_truncated(const NumPhaseDist& w, const ModelParams& p) {
  const int nmax2 = w.two_n_max();
  NumPhaseDist out(nmax2);
  const Complex iu(0.0, 1.0);
  for (int d = 0; d <= nmax2; ++d) {
    const double n = 0.5 * d;
    auto& dst = out.row(d);
    const auto& src = w.row(d);
    for (int j = 0; j <= d; ++j) {
      const double k = 0.5 * (2 * j - d);
      Complex v =
          (-2.0 * iu * p.chi * n * k - p.gamma * k * k / (2.0 * (n + 1.0)) - p.gamma * n) *
          src[j];
      if (d + 2 <= nmax2) v += p.gamma * (n + 1.0) * w.row(d + 2)[j + 1];
      dst[j] = v;
    }
  }
  return out;
}

void write_wigner_csv(const NumPhaseDist& w, const PhiGrid& grid, std::ostream& out) {
  out << "two_n,phi,w\n";
  char buf[96];
  for (int d = 0; d <= w.two_n_max(); ++d) {
    for (int j = 0; j < grid.m; ++j) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", d, grid.phis[j],
                    eval_w(w, d, grid.phis[j]));
      out << buf;
    }
  }
}

}  // namespace npw
