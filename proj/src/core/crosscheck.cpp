#include "crosscheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pmc {

namespace {

constexpr double kTrimRel = 1e-12;   // coefficient trim threshold
constexpr double kImagRel = 1e-8;    // near-real acceptance for QR eigenvalues

// Diagonal radix-2 balancing (no permutations); similarity transform, so
// eigenvalues are untouched and Hessenberg structure survives.
void balance(Matrix& a) {
    const std::size_t n = a.rows();
    const double radix = 2.0, sq = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) {
                    c += std::fabs(a(j, i));
                    r += std::fabs(a(i, j));
                }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double g = r / radix, f = 1.0;
            while (c < g) {
                f *= radix;
                c *= sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sq;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= ginv;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// Eigenvalues of an upper Hessenberg matrix by the Francis implicit
// double-shift QR iteration (classic hqr scheme). Destroys a.
void hqr_eigenvalues(Matrix& a, std::vector<double>& wr, std::vector<double>& wi) {
    const int n = static_cast<int>(a.rows());
    wr.assign(n, 0.0);
    wi.assign(n, 0.0);
    const double eps = std::numeric_limits<double>::epsilon();

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(a(i, j));
    if (anorm == 0.0) anorm = 1.0;

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 1) l = 0;
            double x = a(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                --nn;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + (p >= 0.0 ? z : -z);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn] = z;
                        wi[nn - 1] = -z;
                    }
                    nn -= 2;
                } else {
                    if (its == 60)
                        throw Error("real_roots: QR iteration failed to converge");
                    if (its == 10 || its == 20 || its == 30 || its == 40 || its == 50) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        const double s =
                            std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (m = nn - 2; m >= l; --m) {
                        z = a(m, m);
                        const double rr = x - z;
                        const double ss = y - z;
                        p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - rr - ss;
                        r = a(m + 2, m + 1);
                        double sc = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        if (sc == 0.0) sc = 1.0;
                        p /= sc;
                        q /= sc;
                        r /= sc;
                        if (m == l) break;
                        const double u =
                            std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                        const double v =
                            std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) +
                                            std::fabs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i > m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
                            x = std::fabs(p) + std::fabs(q) + std::fabs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        double s = std::sqrt(p * p + q * q + r * r);
                        if (p < 0.0) s = -s;
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) a(k, k - 1) = -a(k, k - 1);
                        } else {
                            a(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            double pp = a(k, j) + q * a(k + 1, j);
                            if (k != nn - 1) {
                                pp += r * a(k + 2, j);
                                a(k + 2, j) -= pp * z;
                            }
                            a(k + 1, j) -= pp * y;
                            a(k, j) -= pp * x;
                        }
                        const int mmin = (nn < k + 3) ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            double pp = x * a(i, k) + y * a(i, k + 1);
                            if (k != nn - 1) {
                                pp += z * a(i, k + 2);
                                a(i, k + 2) -= pp * r;
                            }
                            a(i, k + 1) -= pp * q;
                            a(i, k) -= pp;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
}

}  // namespace

std::vector<double> fd_gradient(const PartialMatrix& pm, const std::vector<double>& x,
                                double h) {
    const std::size_t k = pm.pattern.k();
    std::vector<double> g(k, 0.0);
    std::vector<double> xp = x;
    for (std::size_t c = 0; c < k; ++c) {
        const double step = h * (1.0 + std::fabs(x[c]));
        double fp, fm;
        try {
            xp[c] = x[c] + step;
            fp = objective(pm, xp);
            xp[c] = x[c] - step;
            fm = objective(pm, xp);
        } catch (const Error&) {
            throw DomainError("fd_gradient: singular probe at coordinate " +
                              std::to_string(c + 1));
        }
        xp[c] = x[c];
        g[c] = (fp - fm) / (2.0 * step);
    }
    return g;
}

PolyCoeffs det_poly_along_class(const PartialMatrix& pm, const std::vector<double>& x,
                                std::size_t class_index) {
    if (pm.mode != Mode::square)
        throw DomainError("det_poly_along_class: square mode only");
    if (class_index >= pm.pattern.k())
        throw DimensionError("det_poly_along_class: class index out of range");

    const std::size_t d = pm.pattern.classes[class_index].size();
    std::vector<double> xp = x;
    Matrix vand(d + 1, d + 1);
    Matrix rhs(d + 1, 1);
    for (std::size_t node = 0; node <= d; ++node) {
        xp[class_index] = static_cast<double>(node);
        rhs(node, 0) = det(assemble(pm, xp));
        double pw = 1.0;
        for (std::size_t pexp = 0; pexp <= d; ++pexp) {
            vand(node, pexp) = pw;
            pw *= static_cast<double>(node);
        }
    }
    const Matrix coef = solve(vand, rhs);
    PolyCoeffs out;
    out.c.resize(d + 1);
    for (std::size_t p = 0; p <= d; ++p) out.c[p] = coef(p, 0);
    return out;
}

PolyCoeffs poly_derivative(const PolyCoeffs& p) {
    PolyCoeffs d;
    if (p.c.size() <= 1) {
        d.c = {0.0};
        return d;
    }
    d.c.resize(p.c.size() - 1);
    for (std::size_t i = 1; i < p.c.size(); ++i)
        d.c[i - 1] = p.c[i] * static_cast<double>(i);
    return d;
}

double poly_eval(const PolyCoeffs& p, double x) {
    double v = 0.0;
    for (std::size_t i = p.c.size(); i-- > 0;) v = v * x + p.c[i];
    return v;
}

std::vector<double> real_roots(const PolyCoeffs& poly) {
    double cmax = 0.0;
    for (double v : poly.c) cmax = std::max(cmax, std::fabs(v));
    if (cmax == 0.0) throw DomainError("real_roots: zero polynomial");

    std::vector<double> c = poly.c;
    while (c.size() > 1 && std::fabs(c.back()) <= kTrimRel * cmax) c.pop_back();
    const std::size_t d = c.size() - 1;
    if (d == 0) throw DomainError("real_roots: degree 0 after trimming");

    std::vector<double> roots;

    auto polish = [&](double r) {
        const PolyCoeffs trimmed{c};
        const PolyCoeffs deriv = poly_derivative(trimmed);
        for (int it = 0; it < 3; ++it) {
            const double pv = poly_eval(trimmed, r);
            const double dv = poly_eval(deriv, r);
            if (dv == 0.0) break;
            const double rn = r - pv / dv;
            if (!std::isfinite(rn)) break;
            if (std::fabs(poly_eval(trimmed, rn)) <= std::fabs(pv)) r = rn;
        }
        return r;
    };

    if (d == 1) {
        roots.push_back(-c[0] / c[1]);
    } else if (d == 2) {
        const double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double qq = -0.5 * (c[1] + (c[1] >= 0.0 ? sq : -sq));
            if (qq != 0.0) {
                roots.push_back(qq / c[2]);
                roots.push_back(c[0] / qq);
            } else {  // c1 == 0 and disc == 0: double root at 0
                roots.push_back(0.0);
                roots.push_back(0.0);
            }
        } else {
            const double re = -0.5 * c[1] / c[2];
            const double im = 0.5 * std::sqrt(-disc) / std::fabs(c[2]);
            if (std::fabs(im) <= kImagRel * std::max(1.0, std::hypot(re, im))) {
                roots.push_back(re);
                roots.push_back(re);
            }
        }
    } else {
        // Upper Hessenberg companion of the monic polynomial: first row holds
        // -c[d-1]/c[d] ... -c[0]/c[d], ones on the subdiagonal.
        Matrix comp(d, d);
        for (std::size_t j = 0; j < d; ++j) comp(0, j) = -c[d - 1 - j] / c[d];
        for (std::size_t i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
        balance(comp);
        std::vector<double> wr, wi;
        hqr_eigenvalues(comp, wr, wi);
        for (std::size_t i = 0; i < d; ++i)
            if (std::fabs(wi[i]) <= kImagRel * std::max(1.0, std::hypot(wr[i], wi[i])))
                roots.push_back(polish(wr[i]));
    }

    std::sort(roots.begin(), roots.end());
    return roots;
}

double mp_axiom_check(const Matrix& sigma, const Matrix& pinv) {
    if (pinv.rows() != sigma.cols() || pinv.cols() != sigma.rows())
        throw DimensionError("mp_axiom_check: pseudoinverse shape mismatch");

    const Matrix sp = sigma * pinv;  // n x n
    const Matrix ps = pinv * sigma;  // p x p

    double worst = 0.0;
    worst = std::max(worst, (sp * sigma - sigma).max_abs());
    worst = std::max(worst, (ps * pinv - pinv).max_abs());
    worst = std::max(worst, (sp.transpose() - sp).max_abs());
    worst = std::max(worst, (ps.transpose() - ps).max_abs());
    worst = std::max(worst, (sp - Matrix::identity(sigma.rows())).max_abs());
    return worst;
}

}  // namespace pmc
