#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmc {

namespace {

constexpr double kMinStep = 1e-12;       // backtracking floor
constexpr double kStepCertRel = 1e-8;    // convergence: Newton step vs (1+||x||)
constexpr double kRegBase = 1e-8;        // Tikhonov fallback seed, x max|H|
constexpr double kLmMuInit = 1e-3;
constexpr double kLmMuMax = 1e16;
constexpr double kLmMuShrink = 0.3;
constexpr double kArmijoSlope = 1e-4;
constexpr double kSymSpecRel = 1e-12;    // specified-set symmetry tolerance
constexpr double kClassifySymRel = 1e-8;
constexpr double kClassifyPdRel = 1e-10;
constexpr double kObjTieRel = 1e-12;     // near-tie window for the ordering

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::fabs(e));
    return m;
}

double sq_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return s;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

std::vector<double> solve_vec(const LuFactorization& f, const std::vector<double>& rhs) {
    Matrix b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    const Matrix x = f.solve(b);
    std::vector<double> out(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
    return out;
}

bool feasible(const Evaluation& ev, const SolverConfig& cfg) {
    return ev.feas_ratio > cfg.singular_guard;
}

// Newton direction for the stationarity system; nullopt when even the
// regularized system cannot produce a finite step.
struct Direction {
    std::vector<double> d;
    bool newton_exact = false;  // true when the unregularized solve succeeded
};

std::optional<Direction> newton_direction(const Matrix& h, const std::vector<double>& g) {
    std::vector<double> rhs(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) rhs[i] = -g[i];

    const LuFactorization f = lu_factor(h);
    if (!f.singular) {
        std::vector<double> d = solve_vec(f, rhs);
        if (all_finite(d)) return Direction{std::move(d), true};
    }
    double tau = kRegBase * std::max(h.max_abs(), 1e-300);
    for (int attempt = 0; attempt < 40; ++attempt, tau *= 100.0) {
        Matrix hr = h;
        for (std::size_t i = 0; i < h.rows(); ++i) hr(i, i) += tau;
        const LuFactorization fr = lu_factor(hr);
        if (fr.singular) continue;
        std::vector<double> d = solve_vec(fr, rhs);
        if (all_finite(d)) return Direction{std::move(d), false};
    }
    return std::nullopt;
}

// The convergence certificate shared by every solver path: small gradient,
// nonsingular Newton matrix, and a full Newton step already negligible
// relative to x. Runaway iterates (gradient vanishing at infinity) fail the
// last two conditions.
bool certified(const PartialMatrix& pm, const std::vector<double>& x,
               const Evaluation& ev, const SolverConfig& cfg) {
    if (!(ev.grad_inf < cfg.grad_tol)) return false;
    Matrix h;
    try {
        h = newton_matrix_with(pm, x, ev);
    } catch (const Error&) {
        return false;
    }
    const LuFactorization f = lu_factor(h);
    if (f.singular) return false;
    std::vector<double> rhs(ev.gradient.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -ev.gradient[i];
    const std::vector<double> d = solve_vec(f, rhs);
    if (!all_finite(d)) return false;
    return inf_norm(d) <= kStepCertRel * (1.0 + inf_norm(x));
}

Solution build_solution(const PartialMatrix& pm, const std::vector<double>& x,
                        const Evaluation& ev, const SolverConfig& cfg,
                        std::size_t iterations) {
    Solution s;
    s.x = x;
    s.sigma = ev.sigma;
    s.inv = ev.inv;
    s.objective = ev.objective;
    s.gradient = ev.gradient;
    s.grad_norm = ev.grad_inf;
    s.residuals = residual_report(pm, x);
    s.flags = classify(s.sigma, s.inv);
    s.iterations = iterations;

    // Runtime contract: stationarity reached, and for untied patterns every
    // transposed-position entry of the (pseudo)inverse vanishes.
    if (!(s.grad_norm < cfg.grad_tol))
        throw Error("solver: produced a solution violating the gradient tolerance");
    if (pm.pattern.untied())
        for (const auto& e : s.residuals.entries)
            if (!(std::fabs(e.value) < s.residuals.zero_threshold))
                throw Error("solver: untied solution with nonvanishing transposed entry");
    return s;
}

}  // namespace

const char* failure_name(FailureReason r) {
    switch (r) {
        case FailureReason::singular_start: return "singular_start";
        case FailureReason::singular_newton_matrix: return "singular_newton_matrix";
        case FailureReason::max_iters: return "max_iters";
        case FailureReason::step_underflow: return "step_underflow";
    }
    return "unknown";
}

Flags classify(const Matrix& sigma, const Matrix& inv) {
    Flags f;
    const double tol = kClassifySymRel * sigma.max_abs();

    if (sigma.square()) {
        double dmax = 0.0;
        for (std::size_t i = 0; i < sigma.rows(); ++i)
            for (std::size_t j = i + 1; j < sigma.cols(); ++j)
                dmax = std::max(dmax, std::fabs(sigma(i, j) - sigma(j, i)));
        f.symmetric = dmax <= tol;
    }

    f.toeplitz = true;
    for (std::size_t i = 1; i < sigma.rows() && f.toeplitz; ++i)
        for (std::size_t j = 1; j < sigma.cols(); ++j)
            if (std::fabs(sigma(i, j) - sigma(i - 1, j - 1)) > tol) {
                f.toeplitz = false;
                break;
            }

    if (f.symmetric) {
        const SymEig e = sym_eig(sigma);
        double scale = 0.0;
        for (double lam : e.values) scale = std::max(scale, std::fabs(lam));
        f.positive_definite = !e.values.empty() && e.values.front() > kClassifyPdRel * scale;
    }

    const double zero_tol = 1e-9 * (1.0 + inv.max_abs());
    for (double v : inv.data())
        if (std::fabs(v) < zero_tol) ++f.zero_count;
    return f;
}

NewtonResult newton(const PartialMatrix& pm, const std::vector<double>& x0,
                    const SolverConfig& cfg) {
    NewtonResult res;
    std::vector<double> x = x0;
    auto ev = try_evaluate(pm, x);
    if (!ev || !feasible(*ev, cfg)) {
        res.failure = FailureReason::singular_start;
        return res;
    }

    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        res.iterations = it;
        if (ev->grad_inf < cfg.grad_tol && certified(pm, x, *ev, cfg)) {
            res.solution = build_solution(pm, x, *ev, cfg, it);
            return res;
        }

        Matrix h;
        try {
            h = newton_matrix_with(pm, x, *ev);
        } catch (const Error&) {
            res.failure = FailureReason::singular_newton_matrix;
            return res;
        }
        const auto dir = newton_direction(h, ev->gradient);
        if (!dir) {
            res.failure = FailureReason::singular_newton_matrix;
            return res;
        }

        const double m0 = sq_norm(ev->gradient);
        bool accepted = false;
        for (double t = 1.0; t >= kMinStep; t *= 0.5) {
            std::vector<double> cand = x;
            for (std::size_t c = 0; c < cand.size(); ++c) cand[c] += t * dir->d[c];
            auto ev2 = try_evaluate(pm, cand);
            if (ev2 && feasible(*ev2, cfg) && sq_norm(ev2->gradient) < m0) {
                x = std::move(cand);
                ev = std::move(ev2);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.failure = FailureReason::step_underflow;
            return res;
        }
    }
    res.iterations = cfg.max_iters;
    res.failure = FailureReason::max_iters;
    return res;
}

namespace {

// One multistart attempt: Levenberg-Marquardt on the polynomial residual
// p(x) = scale_det * gradient (the determinant's own derivative in the square
// case). Unlike ||gradient||^2, ||p||^2 grows along generic rays to infinity,
// so descent cannot drift off to the false minima at infinity and nearly
// every feasible start lands on some stationary point.
NewtonResult lm_attempt(const PartialMatrix& pm, const std::vector<double>& x0,
                        const SolverConfig& cfg) {
    NewtonResult res;
    std::vector<double> x = x0;
    auto ev = try_evaluate(pm, x);
    if (!ev || !feasible(*ev, cfg)) {
        res.failure = FailureReason::singular_start;
        return res;
    }

    const double gg_factor = (pm.mode == Mode::square) ? 1.0 : 2.0;
    const std::size_t k = pm.pattern.k();
    double mu = kLmMuInit;

    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        res.iterations = it;
        if (ev->grad_inf < cfg.grad_tol && certified(pm, x, *ev, cfg)) {
            res.solution = build_solution(pm, x, *ev, cfg, it);
            return res;
        }

        Matrix h;
        try {
            h = newton_matrix_with(pm, x, *ev);
        } catch (const Error&) {
            res.failure = FailureReason::singular_newton_matrix;
            return res;
        }

        // p = s*g, J = s*(H + factor*g*g^T) with s = det (or det of the Gram).
        const double s = ev->scale_det;
        std::vector<double> p(k);
        for (std::size_t i = 0; i < k; ++i) p[i] = s * ev->gradient[i];
        Matrix jac(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                jac(i, j) = s * (h(i, j) + gg_factor * ev->gradient[i] * ev->gradient[j]);
        if (!all_finite(p) || !jac.all_finite()) {
            res.failure = FailureReason::step_underflow;
            return res;
        }

        Matrix a(k, k);
        std::vector<double> b(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                double sum = 0.0;
                for (std::size_t r = 0; r < k; ++r) sum += jac(r, i) * jac(r, j);
                a(i, j) = sum;
            }
        for (std::size_t i = 0; i < k; ++i) {
            double sum = 0.0;
            for (std::size_t r = 0; r < k; ++r) sum -= jac(r, i) * p[r];
            b[i] = sum;
        }
        double diag_max = 0.0;
        for (std::size_t i = 0; i < k; ++i) diag_max = std::max(diag_max, a(i, i));
        if (!(diag_max > 0.0) || !std::isfinite(diag_max)) {
            res.failure = FailureReason::step_underflow;
            return res;
        }
        std::vector<double> damp(k);
        for (std::size_t i = 0; i < k; ++i)
            damp[i] = (a(i, i) > 0.0) ? a(i, i) : diag_max;

        const double m0 = sq_norm(p);
        bool accepted = false;
        while (mu <= kLmMuMax) {
            Matrix m = a;
            for (std::size_t i = 0; i < k; ++i) m(i, i) += mu * damp[i];
            const LuFactorization f = lu_factor(m);
            if (f.singular) {
                mu *= 10.0;
                continue;
            }
            const std::vector<double> d = solve_vec(f, b);
            if (!all_finite(d)) {
                mu *= 10.0;
                continue;
            }
            std::vector<double> cand = x;
            for (std::size_t c = 0; c < k; ++c) cand[c] += d[c];
            auto ev2 = try_evaluate(pm, cand);
            if (ev2 && feasible(*ev2, cfg)) {
                double m2 = 0.0;
                bool fin = true;
                for (std::size_t c = 0; c < k; ++c) {
                    const double pc = ev2->scale_det * ev2->gradient[c];
                    if (!std::isfinite(pc)) {
                        fin = false;
                        break;
                    }
                    m2 += pc * pc;
                }
                if (fin && m2 < m0) {
                    x = std::move(cand);
                    ev = std::move(ev2);
                    mu = std::max(mu * kLmMuShrink, 1e-12);
                    accepted = true;
                    break;
                }
            }
            mu *= 10.0;
        }
        if (!accepted) {
            res.failure = FailureReason::step_underflow;
            return res;
        }
    }
    res.iterations = cfg.max_iters;
    res.failure = FailureReason::max_iters;
    return res;
}

bool near_duplicate(const std::vector<double>& a, const std::vector<double>& b,
                    double tol) {
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        diff = std::max(diff, std::fabs(a[i] - b[i]));
    const double scale = 1.0 + std::max(inf_norm(a), inf_norm(b));
    return diff / scale < tol;
}

}  // namespace

SolutionSet multistart(const PartialMatrix& pm, const SolverConfig& cfg) {
    SolutionSet set;
    const std::size_t k = pm.pattern.k();

    if (k == 0) {
        set.attempts = 1;
        const std::vector<double> empty;
        auto ev = try_evaluate(pm, empty);
        if (ev && feasible(*ev, cfg)) {
            set.solutions.push_back(build_solution(pm, empty, *ev, cfg, 0));
        } else {
            ++set.failure_counts[static_cast<int>(FailureReason::singular_start)];
        }
        return set;
    }

    const double range = (cfg.start_range > 0.0)
                             ? cfg.start_range
                             : 2.0 * (1.0 + pm.pattern.max_abs_specified());

    SplitMix64 master{cfg.seed};
    std::vector<Solution> found;
    for (std::size_t i = 0; i < cfg.starts; ++i) {
        SplitMix64 rng{master.next()};
        std::vector<double> x0(k);
        for (std::size_t c = 0; c < k; ++c) x0[c] = rng.uniform(-range, range);

        NewtonResult r = lm_attempt(pm, x0, cfg);
        ++set.attempts;
        if (r.ok()) {
            r.solution->start_index = i;
            found.push_back(std::move(*r.solution));
        } else {
            ++set.failure_counts[static_cast<int>(r.failure)];
        }
    }

    // Deduplicate in start order, first occurrence wins.
    for (auto& s : found) {
        bool dup = false;
        for (const auto& kept : set.solutions)
            if (near_duplicate(s.x, kept.x, cfg.dedup_tol)) {
                dup = true;
                break;
            }
        if (!dup) set.solutions.push_back(std::move(s));
    }

    std::stable_sort(set.solutions.begin(), set.solutions.end(),
                     [](const Solution& a, const Solution& b) {
                         const double tie = kObjTieRel *
                             std::max({1.0, std::fabs(a.objective), std::fabs(b.objective)});
                         if (std::fabs(a.objective - b.objective) > tie)
                             return a.objective > b.objective;
                         return std::lexicographical_compare(a.x.begin(), a.x.end(),
                                                             b.x.begin(), b.x.end());
                     });
    return set;
}

Solution dempster_spd(const PartialMatrix& pm, const SolverConfig& cfg) {
    const Pattern& p = pm.pattern;
    if (pm.mode != Mode::square)
        throw PatternError("dempster: requires a square pattern");

    // Specified set must be symmetric with matching values.
    for (const auto& e : p.specified) {
        bool found = false;
        for (const auto& e2 : p.specified)
            if (e2.pos.i == e.pos.j && e2.pos.j == e.pos.i) {
                const double scale = std::max({1.0, std::fabs(e.value), std::fabs(e2.value)});
                if (std::fabs(e.value - e2.value) > kSymSpecRel * scale)
                    throw PatternError("dempster: specified values are not symmetric at (" +
                                       std::to_string(e.pos.i + 1) + "," +
                                       std::to_string(e.pos.j + 1) + ")");
                found = true;
                break;
            }
        if (!found)
            throw PatternError("dempster: specified set is not symmetric at (" +
                               std::to_string(e.pos.i + 1) + "," +
                               std::to_string(e.pos.j + 1) + ")");
    }
    // Classes must be diagonal singletons or symmetric pairs.
    for (const auto& cls : p.classes) {
        const bool diag_single = cls.size() == 1 && cls[0].i == cls[0].j;
        const bool sym_pair = cls.size() == 2 && cls[0].i == cls[1].j &&
                              cls[0].j == cls[1].i && cls[0].i != cls[0].j;
        if (!diag_single && !sym_pair)
            throw PatternError(
                "dempster: classes must be diagonal singletons or symmetric pairs");
    }

    const std::size_t k = p.k();
    std::vector<double> x(k, 0.0);
    if (!is_positive_definite_chol(assemble(pm, x))) {
        const double range = (cfg.start_range > 0.0)
                                 ? cfg.start_range
                                 : 2.0 * (1.0 + p.max_abs_specified());
        SplitMix64 rng{cfg.seed};
        bool ok = false;
        for (int draw = 0; draw < 1000 && !ok; ++draw) {
            for (std::size_t c = 0; c < k; ++c) x[c] = rng.uniform(-range, range);
            ok = is_positive_definite_chol(assemble(pm, x));
        }
        if (!ok)
            throw DomainError("dempster: no positive definite starting completion found");
    }

    auto ev = try_evaluate(pm, x);
    if (!ev || !feasible(*ev, cfg))
        throw DomainError("dempster: starting completion is numerically singular");

    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        if (ev->grad_inf < cfg.grad_tol) {
            Solution s = build_solution(pm, x, *ev, cfg, it);
            s.entropy = entropy(s.sigma);
            return s;
        }

        const Matrix h = newton_matrix_with(pm, x, *ev);
        const LuFactorization f = lu_factor(h);
        if (f.singular)
            throw DomainError("dempster: singular newton matrix during ascent");
        std::vector<double> rhs(k);
        for (std::size_t i = 0; i < k; ++i) rhs[i] = -ev->gradient[i];
        const std::vector<double> d = solve_vec(f, rhs);
        double slope = 0.0;  // directional derivative; positive by concavity
        for (std::size_t i = 0; i < k; ++i) slope += ev->gradient[i] * d[i];
        if (!all_finite(d) || !(slope > 0.0))
            throw DomainError("dempster: ascent direction unavailable");

        const double f0 = ev->objective;
        bool accepted = false;
        for (double t = 1.0; t >= kMinStep; t *= 0.5) {
            std::vector<double> cand = x;
            for (std::size_t c = 0; c < k; ++c) cand[c] += t * d[c];
            if (!is_positive_definite_chol(assemble(pm, cand))) continue;
            auto ev2 = try_evaluate(pm, cand);
            if (!ev2 || !feasible(*ev2, cfg)) continue;
            if (ev2->objective >= f0 + kArmijoSlope * t * slope && ev2->objective >= f0) {
                x = std::move(cand);
                ev = std::move(ev2);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw DomainError("dempster: line search could not make progress");
        // Monotone by construction; defend against regressions anyway.
        if (!(ev->objective >= f0))
            throw Error("dempster: objective decreased along an accepted step");
    }
    throw DomainError("dempster: did not converge within the iteration cap");
}

double entropy(const Matrix& sigma) {
    if (!sigma.square())
        throw DomainError("entropy: matrix must be square");
    const double tol = kClassifySymRel * sigma.max_abs();
    for (std::size_t i = 0; i < sigma.rows(); ++i)
        for (std::size_t j = i + 1; j < sigma.cols(); ++j)
            if (std::fabs(sigma(i, j) - sigma(j, i)) > tol)
                throw DomainError("entropy: matrix is not symmetric");

    const SymEig e = sym_eig(sigma);
    double scale = 0.0;
    for (double lam : e.values) scale = std::max(scale, std::fabs(lam));
    if (e.values.empty() || !(e.values.front() > kClassifyPdRel * scale))
        throw DomainError("entropy: matrix is not positive definite");

    double logdet = 0.0;
    for (double lam : e.values) logdet += std::log(lam);
    const double n = static_cast<double>(sigma.rows());
    return 0.5 * logdet + 0.5 * n * (1.0 + std::log(2.0 * 3.14159265358979323846));
}

NewtonResult dual_solve(const PartialMatrix& pm, const SolverConfig& cfg,
                        const std::vector<double>* lambda_init) {
    const Pattern& p = pm.pattern;
    if (pm.mode != Mode::square)
        throw PatternError("dual_solve: requires a square pattern");
    if (!p.untied())
        throw PatternError("dual_solve: requires an untied pattern");

    const std::size_t n = p.rows;
    const std::size_t m = p.specified.size();
    if (lambda_init && lambda_init->size() != m)
        throw DimensionError("dual_solve: lambda_init length mismatch");

    // Lambda holds variable q at the transpose of specified position q;
    // everything else in Lambda is structurally zero.
    auto assemble_lambda = [&](const std::vector<double>& lam) {
        Matrix l(n, n);
        for (std::size_t q = 0; q < m; ++q)
            l(p.specified[q].pos.j, p.specified[q].pos.i) = lam[q];
        return l;
    };

    auto lambda_feasible = [&](const Matrix& l, LuFactorization& f) {
        f = lu_factor(l);
        if (f.singular) return false;
        const double d = f.det();
        if (!std::isfinite(d)) return false;
        double bound = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += l(i, j) * l(i, j);
            bound *= std::sqrt(s);
        }
        return std::isfinite(bound) && bound > 0.0 &&
               std::fabs(d) / bound > cfg.singular_guard;
    };

    // G(lambda) and its Jacobian from the inverse-derivative rule.
    auto residual = [&](const Matrix& inv, std::vector<double>& g) {
        g.resize(m);
        for (std::size_t q = 0; q < m; ++q)
            g[q] = inv(p.specified[q].pos.i, p.specified[q].pos.j) - p.specified[q].value;
    };

    auto run_from = [&](std::vector<double> lam) {
        NewtonResult res;
        Matrix l = assemble_lambda(lam);
        LuFactorization f;
        if (!lambda_feasible(l, f)) {
            res.failure = FailureReason::singular_start;
            return res;
        }
        Matrix inv = f.solve(Matrix::identity(n));
        std::vector<double> g;
        residual(inv, g);

        for (std::size_t it = 0; it < cfg.max_iters; ++it) {
            res.iterations = it;
            if (inf_norm(g) < cfg.grad_tol) {
                // Map back to x-space and certify through the primal path.
                std::vector<double> x(p.k());
                for (std::size_t c = 0; c < p.k(); ++c) {
                    const Position pos = p.classes[c][0];
                    x[c] = inv(pos.i, pos.j);
                }
                NewtonResult polished = newton(pm, x, cfg);
                polished.iterations += it;
                return polished;
            }

            Matrix jac(m, m);
            for (std::size_t q = 0; q < m; ++q)
                for (std::size_t q2 = 0; q2 < m; ++q2) {
                    const Position a = p.specified[q].pos;    // equation at (i,j)
                    const Position b2 = p.specified[q2].pos;  // variable at (b2.j, b2.i)
                    jac(q, q2) = -inv(a.i, b2.j) * inv(b2.i, a.j);
                }
            const auto dir = newton_direction(jac, g);
            if (!dir) {
                res.failure = FailureReason::singular_newton_matrix;
                return res;
            }

            const double m0 = sq_norm(g);
            bool accepted = false;
            for (double t = 1.0; t >= kMinStep; t *= 0.5) {
                std::vector<double> cand = lam;
                for (std::size_t q = 0; q < m; ++q) cand[q] += t * dir->d[q];
                Matrix l2 = assemble_lambda(cand);
                LuFactorization f2;
                if (!lambda_feasible(l2, f2)) continue;
                Matrix inv2 = f2.solve(Matrix::identity(n));
                if (!inv2.all_finite()) continue;
                std::vector<double> g2;
                residual(inv2, g2);
                if (sq_norm(g2) < m0) {
                    lam = std::move(cand);
                    inv = std::move(inv2);
                    g = std::move(g2);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                res.failure = FailureReason::step_underflow;
                return res;
            }
        }
        res.iterations = cfg.max_iters;
        res.failure = FailureReason::max_iters;
        return res;
    };

    if (lambda_init) return run_from(*lambda_init);

    // Default: mask the best primal solution's inverse to the support.
    const SolutionSet primal = multistart(pm, cfg);
    if (!primal.solutions.empty()) {
        const Matrix& inv = primal.solutions.front().inv;
        std::vector<double> lam(m);
        for (std::size_t q = 0; q < m; ++q)
            lam[q] = inv(p.specified[q].pos.j, p.specified[q].pos.i);
        return run_from(std::move(lam));
    }

    // Last resort: seeded random draws.
    SplitMix64 rng{cfg.seed};
    NewtonResult last;
    last.failure = FailureReason::singular_start;
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(cfg.starts, 1);
         ++attempt) {
        std::vector<double> lam(m);
        for (std::size_t q = 0; q < m; ++q) lam[q] = rng.uniform(-2.0, 2.0);
        last = run_from(std::move(lam));
        if (last.ok()) return last;
    }
    return last;
}

ApplyResult apply_completion(const Solution& sol, const Matrix& b, bool side_right) {
    ApplyResult out;
    out.zeros_exploited = sol.flags.zero_count;
    if (side_right) {
        if (b.cols() != sol.inv.rows())
            throw DimensionError("apply_completion: B column count must match the "
                                 "(pseudo)inverse row count");
        out.result = b * sol.inv;
    } else {
        if (!sol.sigma.square())
            throw DimensionError("apply_completion: left application requires a square completion");
        if (b.rows() != sol.sigma.rows())
            throw DimensionError("apply_completion: B row count must match the matrix order");
        out.result = solve(sol.sigma, b);
    }
    return out;
}

}  // namespace pmc
