#pragma once

#include <cstddef>
#include <vector>

#include "partial_matrix.hpp"

namespace pmc {

// Independent brute-force checks used by tests and the verify/gradcheck
// commands. Nothing here shares a computation path with the analytic
// formulas it validates.

// Univariate polynomial, ascending coefficients: c[0] + c[1] x + ...
struct PolyCoeffs {
    std::vector<double> c;
    std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }
};

// Central differences of the objective, step h*(1+|x_c|) per coordinate.
// Throws DomainError naming the coordinate when a probe point is singular.
std::vector<double> fd_gradient(const PartialMatrix& pm, const std::vector<double>& x,
                                double h);

// det(Sigma(x)) as a polynomial in class c's variable (other classes frozen
// at x), interpolated at integer nodes 0..|class c| through a Vandermonde
// solve. Returns all |class c|+1 coefficients untrimmed. Square mode only.
PolyCoeffs det_poly_along_class(const PartialMatrix& pm, const std::vector<double>& x,
                                std::size_t class_index);

// Derivative polynomial, one degree lower.
PolyCoeffs poly_derivative(const PolyCoeffs& p);

double poly_eval(const PolyCoeffs& p, double x);

// Real roots, ascending, multiplicities kept. Coefficients negligible
// against the largest (1e-12 relative) are trimmed first; degree 0 after
// trimming throws DomainError. Degree 1-2 closed form, degree >= 3 via the
// companion matrix and implicit double-shift QR. Eigenvalues with
// |imag| <= 1e-8 x max(1,|z|) count as real. Accepted roots get a short
// Newton polish on the polynomial itself.
std::vector<double> real_roots(const PolyCoeffs& p);

// Max violation over the four Moore-Penrose identities plus the right-inverse
// identity Sigma*pinv = I (full row rank). Throws DimensionError on shape
// mismatch.
double mp_axiom_check(const Matrix& sigma, const Matrix& pinv);

}  // namespace pmc
