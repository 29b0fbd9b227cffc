#include "partial_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmc {

namespace {

constexpr double kZeroRel = 1e-9;    // vanishing-entry threshold, x (1 + max|inv|)
constexpr double kSlopeRel = 1e-12;  // nonzero-cofactor threshold in the precheck
constexpr double kFdStep = 1e-6;     // rectangular Hessian step, x (1+|x_c|)

std::string pos_str(const Position& p) {
    // 1-based in messages, matching the file format.
    return "(" + std::to_string(p.i + 1) + "," + std::to_string(p.j + 1) + ")";
}

// Product of row 2-norms: Hadamard's bound on |det|, the scale for the
// square-mode singularity guard.
double hadamard_bound(const Matrix& m) {
    double prod = 1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
        prod *= std::sqrt(s);
    }
    return prod;
}

}  // namespace

bool Pattern::untied() const {
    return std::all_of(classes.begin(), classes.end(),
                       [](const std::vector<Position>& c) { return c.size() == 1; });
}

double Pattern::max_abs_specified() const {
    double m = 0.0;
    for (const auto& e : specified) m = std::max(m, std::fabs(e.value));
    return m;
}

void validate_pattern(const Pattern& p) {
    if (p.rows == 0 || p.cols == 0)
        throw PatternError("pattern: dimensions must be positive");

    std::vector<char> seen(p.rows * p.cols, 0);
    auto mark = [&](const Position& pos, const char* what) {
        if (pos.i >= p.rows || pos.j >= p.cols)
            throw PatternError(std::string("pattern: ") + what + " position " +
                               pos_str(pos) + " out of range");
        char& cell = seen[pos.i * p.cols + pos.j];
        if (cell)
            throw PatternError(std::string("pattern: position ") + pos_str(pos) +
                               " occurs more than once");
        cell = 1;
    };

    for (const auto& e : p.specified) {
        if (!std::isfinite(e.value))
            throw PatternError("pattern: non-finite value at " + pos_str(e.pos));
        mark(e.pos, "specified");
    }
    for (std::size_t c = 0; c < p.classes.size(); ++c) {
        if (p.classes[c].empty())
            throw PatternError("pattern: class " + std::to_string(c + 1) + " is empty");
        for (const auto& pos : p.classes[c]) mark(pos, "class");
    }
    for (std::size_t n = 0; n < seen.size(); ++n)
        if (!seen[n])
            throw PatternError("pattern: position (" + std::to_string(n / p.cols + 1) +
                               "," + std::to_string(n % p.cols + 1) +
                               ") is neither specified nor in a class");
}

PartialMatrix make_partial(Pattern pattern, std::optional<Mode> mode) {
    validate_pattern(pattern);
    Mode m;
    if (mode.has_value()) {
        m = *mode;
        if (m == Mode::square && pattern.rows != pattern.cols)
            throw PatternError("square mode requires a square pattern");
    } else {
        m = (pattern.rows == pattern.cols) ? Mode::square : Mode::rectangular;
    }
    return PartialMatrix{std::move(pattern), m};
}

Matrix assemble(const PartialMatrix& pm, const std::vector<double>& x) {
    const Pattern& p = pm.pattern;
    if (x.size() != p.k())
        throw DimensionError("assemble: expected " + std::to_string(p.k()) +
                             " unknowns, got " + std::to_string(x.size()));
    Matrix m(p.rows, p.cols);
    for (const auto& e : p.specified) m(e.pos.i, e.pos.j) = e.value;
    for (std::size_t c = 0; c < p.classes.size(); ++c)
        for (const auto& pos : p.classes[c]) m(pos.i, pos.j) = x[c];
    return m;
}

NormalizedRect normalize_rect(const PartialMatrix& pm) {
    NormalizedRect out;
    if (pm.mode == Mode::rectangular && pm.pattern.rows > pm.pattern.cols) {
        Pattern t;
        t.rows = pm.pattern.cols;
        t.cols = pm.pattern.rows;
        t.specified.reserve(pm.pattern.specified.size());
        for (const auto& e : pm.pattern.specified)
            t.specified.push_back({{e.pos.j, e.pos.i}, e.value});
        t.classes.reserve(pm.pattern.classes.size());
        for (const auto& cls : pm.pattern.classes) {
            std::vector<Position> tc;
            tc.reserve(cls.size());
            for (const auto& pos : cls) tc.push_back({pos.j, pos.i});
            t.classes.push_back(std::move(tc));
        }
        out.pm = PartialMatrix{std::move(t), Mode::rectangular};
        out.transposed = true;
    } else {
        out.pm = pm;
        out.transposed = false;
    }
    return out;
}

std::optional<Evaluation> try_evaluate(const PartialMatrix& pm,
                                       const std::vector<double>& x) {
    for (double v : x)
        if (!std::isfinite(v)) return std::nullopt;

    Evaluation ev;
    ev.sigma = assemble(pm, x);
    if (!ev.sigma.all_finite()) return std::nullopt;

    const Pattern& p = pm.pattern;

    if (pm.mode == Mode::square) {
        const LuFactorization f = lu_factor(ev.sigma);
        if (f.singular) return std::nullopt;
        const double d = f.det();
        if (!std::isfinite(d) || d == 0.0) return std::nullopt;
        const double bound = hadamard_bound(ev.sigma);
        ev.inv = f.solve(Matrix::identity(p.rows));
        if (!ev.inv.all_finite()) return std::nullopt;
        ev.objective = std::log(std::fabs(d));
        ev.scale_det = d;
        ev.feas_ratio = std::isfinite(bound) && bound > 0.0 ? std::fabs(d) / bound : 0.0;
    } else {
        const NormalizedRect nr = normalize_rect(pm);
        const Matrix so = (nr.transposed) ? ev.sigma.transpose()
                                          : ev.sigma;  // rows <= cols orientation
        const Matrix gram = so * so.transpose();
        if (!gram.all_finite()) return std::nullopt;
        const SymEig e = sym_eig(gram);
        const double lam_max = e.values.back();
        const double lam_min = e.values.front();
        if (!(lam_min > 0.0) || !std::isfinite(lam_max)) return std::nullopt;

        const LuFactorization f = lu_factor(gram);
        if (f.singular) return std::nullopt;
        const Matrix pinv_oriented = f.solve(so).transpose();
        if (!pinv_oriented.all_finite()) return std::nullopt;
        ev.inv = nr.transposed ? pinv_oriented.transpose() : pinv_oriented;

        double logdet = 0.0, detg = 1.0;
        for (double lam : e.values) {
            logdet += std::log(lam);
            detg *= lam;
        }
        ev.objective = 0.5 * logdet;
        ev.scale_det = detg;  // det(sigma sigma^T); may overflow -> rejected above by callers
        ev.feas_ratio = lam_min / lam_max;
    }

    ev.gradient.resize(p.k());
    ev.grad_inf = 0.0;
    for (std::size_t c = 0; c < p.k(); ++c) {
        double g = 0.0;
        for (const auto& pos : p.classes[c]) g += ev.inv(pos.j, pos.i);
        ev.gradient[c] = g;
        ev.grad_inf = std::max(ev.grad_inf, std::fabs(g));
    }
    if (!std::isfinite(ev.grad_inf) || !std::isfinite(ev.objective) ||
        !std::isfinite(ev.scale_det))
        return std::nullopt;
    return ev;
}

namespace {

Evaluation evaluate_or_throw(const PartialMatrix& pm, const std::vector<double>& x) {
    auto ev = try_evaluate(pm, x);
    if (!ev) {
        if (pm.mode == Mode::square)
            throw SingularError("evaluation: assembled matrix is singular", 0);
        throw RankError("evaluation: assembled matrix is rank deficient", 0.0);
    }
    return std::move(*ev);
}

}  // namespace

double objective(const PartialMatrix& pm, const std::vector<double>& x) {
    return evaluate_or_throw(pm, x).objective;
}

std::vector<double> gradient(const PartialMatrix& pm, const std::vector<double>& x) {
    return evaluate_or_throw(pm, x).gradient;
}

ResidualReport residual_report(const PartialMatrix& pm, const std::vector<double>& x) {
    const Evaluation ev = evaluate_or_throw(pm, x);
    ResidualReport rep;
    rep.zero_threshold = kZeroRel * (1.0 + ev.inv.max_abs());
    for (const auto& cls : pm.pattern.classes)
        for (const auto& pos : cls)
            rep.entries.push_back({pos, ev.inv(pos.j, pos.i)});
    for (double v : ev.inv.data())
        if (std::fabs(v) < rep.zero_threshold) ++rep.zero_count;
    return rep;
}

Matrix newton_matrix_with(const PartialMatrix& pm, const std::vector<double>& x,
                          const Evaluation& ev) {
    const Pattern& p = pm.pattern;
    const std::size_t k = p.k();

    if (pm.mode == Mode::square) {
        Matrix h(k, k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t c2 = 0; c2 < k; ++c2) {
                double sum = 0.0;
                for (const auto& a : p.classes[c])
                    for (const auto& b : p.classes[c2])
                        sum += ev.inv(a.j, b.i) * ev.inv(b.j, a.i);
                h(c, c2) = -sum;
            }
        return h;
    }

    // Central differences of the analytic gradient, one probe pair per column.
    Matrix h(k, k);
    std::vector<double> xp = x;
    for (std::size_t c = 0; c < k; ++c) {
        const double step = kFdStep * (1.0 + std::fabs(x[c]));
        xp[c] = x[c] + step;
        const std::vector<double> gp = gradient(pm, xp);
        xp[c] = x[c] - step;
        const std::vector<double> gm = gradient(pm, xp);
        xp[c] = x[c];
        for (std::size_t r = 0; r < k; ++r) h(r, c) = (gp[r] - gm[r]) / (2.0 * step);
    }
    return h;
}

Matrix newton_matrix(const PartialMatrix& pm, const std::vector<double>& x) {
    return newton_matrix_with(pm, x, evaluate_or_throw(pm, x));
}

PrecheckResult structural_precheck(const PartialMatrix& pm) {
    PrecheckResult res;
    if (pm.mode != Mode::square) return res;
    const Pattern& p = pm.pattern;
    if (p.k() == 0) return res;

    std::vector<Position> unknowns;
    for (const auto& cls : p.classes)
        for (const auto& pos : cls) unknowns.push_back(pos);

    res.single_row = std::all_of(unknowns.begin(), unknowns.end(),
                                 [&](const Position& q) { return q.i == unknowns[0].i; });
    res.single_col = std::all_of(unknowns.begin(), unknowns.end(),
                                 [&](const Position& q) { return q.j == unknowns[0].j; });

    // Singleton classes whose cofactor minor holds no unknowns: det is affine
    // in that variable with a constant slope equal to the cofactor.
    const std::size_t n = p.rows;
    const Matrix base = assemble(pm, std::vector<double>(p.k(), 0.0));
    for (std::size_t c = 0; c < p.k(); ++c) {
        if (p.classes[c].size() != 1) continue;
        const Position pos = p.classes[c][0];
        bool other_unknown_in_minor = false;
        for (std::size_t c2 = 0; c2 < p.k() && !other_unknown_in_minor; ++c2) {
            if (c2 == c) continue;
            for (const auto& q : p.classes[c2])
                if (q.i != pos.i && q.j != pos.j) {
                    other_unknown_in_minor = true;
                    break;
                }
        }
        if (other_unknown_in_minor) continue;

        Matrix minor(n - 1, n - 1);
        for (std::size_t i = 0, mi = 0; i < n; ++i) {
            if (i == pos.i) continue;
            for (std::size_t j = 0, mj = 0; j < n; ++j) {
                if (j == pos.j) continue;
                minor(mi, mj) = base(i, j);
                ++mj;
            }
            ++mi;
        }
        const double slope = (n == 1) ? 1.0 : det(minor);
        const double scale = (n == 1) ? 1.0 : std::max(hadamard_bound(minor), 1.0);
        if (std::fabs(slope) > kSlopeRel * scale)
            res.constant_slope_classes.push_back(c);
    }
    return res;
}

}  // namespace pmc
