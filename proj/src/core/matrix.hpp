#pragma once

#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace pmc {

// Dense real matrix, row-major. Small fixed-cost kernel: everything here is
// O(n^3) textbook code tuned for desk-scale dimensions (n, p <= ~50).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transpose() const;

    double max_abs() const;       // max |a_ij|
    double inf_norm() const;      // max absolute row sum
    bool all_finite() const;

    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix scaled(double s) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// LU with partial pivoting, combined storage. A pivot whose magnitude falls
// at or below 1e-14 x (max absolute row sum of the input) raises the singular
// flag; det() is then exactly 0 and solve/inverse refuse to run.
struct LuFactorization {
    Matrix lu;
    std::vector<std::size_t> perm;  // row i of LU came from row perm[i] of A
    int sign = 1;
    bool singular = false;
    std::size_t pivot_index = 0;  // first failing pivot column when singular

    double det() const;
    Matrix solve(const Matrix& b) const;  // throws SingularError when flagged
};

LuFactorization lu_factor(const Matrix& a);
double det(const Matrix& a);
Matrix inverse(const Matrix& a);
Matrix solve(const Matrix& a, const Matrix& b);

// Symmetric eigendecomposition by cyclic Jacobi. Input is symmetrized as
// (S+S^T)/2 before iterating. Eigenvalues ascending, eigenvectors as columns.
struct SymEig {
    std::vector<double> values;
    Matrix vectors;
};

SymEig sym_eig(const Matrix& s);

// Symmetric PSD square root via sym_eig. Eigenvalues in
// [-1e-12 x max|lambda|, 0) are clamped to 0; anything lower throws.
Matrix sqrt_psd(const Matrix& s);

// Polar factors of a full-row-rank Sigma (rows <= cols):
// P = (Sigma Sigma^T)^{1/2} symmetric positive definite, U = P^{-1} Sigma
// with orthonormal rows, so P*U = Sigma.
struct PolarFactors {
    Matrix p;
    Matrix u;
};

PolarFactors polar(const Matrix& sigma);

// Moore-Penrose pseudoinverse for full row rank: Sigma^T (Sigma Sigma^T)^{-1}.
// Also a right inverse. Throws RankError when Sigma Sigma^T is numerically
// rank-deficient.
Matrix pinv_frr(const Matrix& sigma);

// True iff s (assumed symmetric) is positive definite by an unpivoted
// Cholesky test.
bool is_positive_definite_chol(const Matrix& s);

}  // namespace pmc
