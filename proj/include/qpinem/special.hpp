#pragma once

#include <vector>

namespace qpinem::special {

// J_0(x) .. J_{max_order}(x) by Miller's backward recurrence, normalized with
// J_0 + 2 * sum_{j>=1} J_{2j} = 1. Accurate in the relative sense even for the
// tiny high-order values that d_mk-weighted sums depend on.
std::vector<double> bessel_j_sequence(double x, int max_order);

// exp(-x) I_k(x) for k = 0 .. max_order, x >= 0. Normalized with
// exp(-x) (I_0 + 2 sum I_k) = 1.
std::vector<double> bessel_i_scaled_sequence(double x, int max_order);

// Normalized associated-Laguerre chain
//   l_N = sqrt(N! / (N+order)!) x^{order/2} e^{-x/2} L_N^{(order)}(x),
// for N = 0 .. count-1. These are the magnitudes of displacement-operator
// matrix elements <N+order|D(xi)|N> with x = |xi|^2; |l_N| <= 1 always.
std::vector<double> laguerre_chain(int order, double x, int count);

// Single element of the chain above.
double laguerre_normalized(int degree, int order, double x);

// Normalized Hermite functions for the X = (a + a^dagger)/2 quadrature,
// psi_n(x) = <x|n>, n = 0 .. count-1, with int |psi_n|^2 dx = 1.
std::vector<double> quadrature_eigenfunctions(double x, int count);

double log_factorial(int n);
// log((2j-1)!!) for odd argument 2j-1 >= -1; (-1)!! = 1.
double log_odd_double_factorial(int odd);

// exp(log_prefactor) * 2F2(a1, a2; b1, b2; z), evaluated in multiprecision so
// that large negative z (alternating series with terms ~e^{|z|}) stays exact.
double hypergeometric_2f2_scaled(double a1, double a2, double b1, double b2,
                                 double z, double log_prefactor = 0.0);

}  // namespace qpinem::special
