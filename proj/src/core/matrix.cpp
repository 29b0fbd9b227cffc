#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pmc {

namespace {

constexpr double kPivotRel = 1e-14;       // singularity flag threshold, x inf-norm
constexpr double kSqrtClampRel = 1e-12;   // negative eigenvalue clamp in sqrt_psd
constexpr double kRankRel = 1e-12;        // full-row-rank threshold on eigenvalues

void require(bool cond, const char* msg) {
    if (!cond) throw DimensionError(msg);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Matrix::inf_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::fabs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    require(cols_ == rhs.rows_, "matrix product: inner dimensions differ");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
        }
    return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "matrix sum: shape mismatch");
    Matrix out = *this;
    for (std::size_t n = 0; n < data_.size(); ++n) out.data_[n] += rhs.data_[n];
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "matrix difference: shape mismatch");
    Matrix out = *this;
    for (std::size_t n = 0; n < data_.size(); ++n) out.data_[n] -= rhs.data_[n];
    return out;
}

Matrix Matrix::scaled(double s) const {
    Matrix out = *this;
    for (double& v : out.data_) v *= s;
    return out;
}

LuFactorization lu_factor(const Matrix& a) {
    require(a.square(), "lu_factor: matrix must be square");
    const std::size_t n = a.rows();
    LuFactorization f;
    f.lu = a;
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});

    const double threshold = kPivotRel * a.inf_norm();

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(f.lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best > threshold)) {  // also catches NaN pivots
            f.singular = true;
            f.pivot_index = k;
            return f;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        const double pivot = f.lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = f.lu(i, k) / pivot;
            f.lu(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
        }
    }
    return f;
}

double LuFactorization::det() const {
    if (singular) return 0.0;
    double d = sign;
    for (std::size_t i = 0; i < lu.rows(); ++i) d *= lu(i, i);
    return d;
}

Matrix LuFactorization::solve(const Matrix& b) const {
    if (singular)
        throw SingularError("solve: matrix is singular (pivot " +
                                std::to_string(pivot_index) + ")",
                            pivot_index);
    const std::size_t n = lu.rows();
    require(b.rows() == n, "solve: right-hand side row count mismatch");
    const std::size_t m = b.cols();

    Matrix x(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x(i, j) = b(perm[i], j);

    for (std::size_t k = 0; k < n; ++k)  // forward, unit lower
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = lu(i, k);
            if (l == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) x(i, j) -= l * x(k, j);
        }
    for (std::size_t kk = n; kk-- > 0;) {  // backward, upper
        const double piv = lu(kk, kk);
        for (std::size_t j = 0; j < m; ++j) x(kk, j) /= piv;
        for (std::size_t i = 0; i < kk; ++i) {
            const double u = lu(i, kk);
            if (u == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) x(i, j) -= u * x(kk, j);
        }
    }
    return x;
}

double det(const Matrix& a) { return lu_factor(a).det(); }

Matrix inverse(const Matrix& a) {
    return lu_factor(a).solve(Matrix::identity(a.rows()));
}

Matrix solve(const Matrix& a, const Matrix& b) { return lu_factor(a).solve(b); }

SymEig sym_eig(const Matrix& s) {
    require(s.square(), "sym_eig: matrix must be square");
    const std::size_t n = s.rows();

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
    Matrix v = Matrix::identity(n);

    auto off_frobenius = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) sum += a(i, j) * a(i, j);
        return std::sqrt(sum);
    };

    const double off0 = off_frobenius();
    const double target = 1e-13 * off0;
    const int max_sweeps = 64;

    for (int sweep = 0; sweep < max_sweeps && off_frobenius() > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymEig out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

Matrix sqrt_psd(const Matrix& s) {
    const SymEig e = sym_eig(s);
    const std::size_t n = s.rows();
    double scale = 0.0;
    for (double lam : e.values) scale = std::max(scale, std::fabs(lam));
    const double clamp = -kSqrtClampRel * scale;

    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lam = e.values[i];
        if (lam < clamp)
            throw DomainError("sqrt_psd: matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(lam) + ")");
        if (lam < 0.0) lam = 0.0;
        r[i] = std::sqrt(lam);
    }

    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                sum += e.vectors(i, k) * r[k] * e.vectors(j, k);
            out(i, j) = sum;
            out(j, i) = sum;
        }
    return out;
}

PolarFactors polar(const Matrix& sigma) {
    require(sigma.rows() <= sigma.cols(), "polar: requires rows <= cols");
    const Matrix gram = sigma * sigma.transpose();
    const SymEig e = sym_eig(gram);
    const double lam_max = e.values.empty() ? 0.0 : e.values.back();
    const double lam_min = e.values.empty() ? 0.0 : e.values.front();
    if (!(lam_min > kRankRel * lam_max))
        throw RankError("polar: matrix is rank deficient (min eigenvalue " +
                            std::to_string(lam_min) + ")",
                        lam_min);

    const std::size_t n = sigma.rows();
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                sum += e.vectors(i, k) * std::sqrt(e.values[k]) * e.vectors(j, k);
            p(i, j) = sum;
            p(j, i) = sum;
        }
    PolarFactors out;
    out.u = solve(p, sigma);
    out.p = std::move(p);
    return out;
}

Matrix pinv_frr(const Matrix& sigma) {
    require(sigma.rows() <= sigma.cols(), "pinv_frr: requires rows <= cols");
    const Matrix gram = sigma * sigma.transpose();
    const SymEig e = sym_eig(gram);
    const double lam_max = e.values.empty() ? 0.0 : e.values.back();
    const double lam_min = e.values.empty() ? 0.0 : e.values.front();
    if (!(lam_min > kRankRel * lam_max))
        throw RankError("pinv_frr: matrix is rank deficient (min eigenvalue " +
                            std::to_string(lam_min) + ")",
                        lam_min);
    // Sigma^T (Sigma Sigma^T)^{-1}, computed as solve(gram, Sigma)^T.
    return solve(gram, sigma).transpose();
}

bool is_positive_definite_chol(const Matrix& s) {
    if (!s.square()) return false;
    const std::size_t n = s.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / ljj;
        }
    }
    return true;
}

}  // namespace pmc
