#ifndef MW_SPECFUN_HPP
#define MW_SPECFUN_HPP

#include <vector>

#include "mw/errors.hpp"

namespace mw::specfun {

// Gamma family, x > 0.
double ln_gamma(double x);
double gamma_fn(double x);

// psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

// Digamma continued to negative non-integer arguments by reflection; used by
// the order-derivative formulas where psi(1 - nu) appears.
double digamma_any(double x);

// Modified Bessel function of the second kind, real order, x > 0.
// Symmetric in the order (K_{-v} = K_v, shared code path). Underflows to 0
// once exp(ln K) leaves double range.
double bessel_k(double order, double x);
double ln_bessel_k(double order, double x);
double bessel_k_scaled(double order, double x);  // e^x K_v(x)

// Modified Bessel function of the first kind, x >= 0. Negative non-integer
// orders require x > 0 (I_{-v} diverges at the origin).
double bessel_i(double order, double x);
double bessel_i_scaled(double order, double x);  // e^{-x} I_v(x)

// Generalized hypergeometric series pFq(a; b; z).
struct HypergeometricSpec {
  std::vector<double> numerator_params;    // a_1..a_p
  std::vector<double> denominator_params;  // b_1..b_q
  double argument = 0.0;
};

struct PfqResult {
  double value = 0.0;
  double abs_error = 0.0;  // estimated truncation + rounding bound
  int terms = 0;
};

// Compensated (Kahan) summation with a term-ratio stopping test. Throws
// PoleError for a non-positive-integer denominator parameter and
// NonConvergenceError past 1e5 terms.
PfqResult pfq(const HypergeometricSpec& spec, double rel_tol = 1e-12);

// dK_v(x)/dv at fixed argument. Integer orders use the finite-sum identity;
// non-integer orders the hypergeometric closed form; within 1e-4 of an
// integer, and for large x where the closed form cancels catastrophically,
// a guarded central difference of bessel_k over the order.
double dbessel_k_dorder(double order, double x);

// (dK_v/dv) / K_v, computed without forming the possibly huge numerator and
// denominator separately.
double dbessel_k_dorder_ratio(double order, double x);

}  // namespace mw::specfun

#endif
