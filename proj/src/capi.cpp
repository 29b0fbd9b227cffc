#include "parsimony.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "core/crosscheck.hpp"
#include "core/partial_matrix.hpp"
#include "core/solver.hpp"

namespace {

thread_local std::string t_error;

void set_error(const std::string& msg) { t_error = msg; }

pmc_status fail(pmc_status st, const std::string& msg) {
    set_error(msg);
    return st;
}

pmc_status from_exception() {
    try {
        throw;
    } catch (const pmc::PatternError& e) {
        return fail(PMC_ERR_PATTERN, e.what());
    } catch (const pmc::DimensionError& e) {
        return fail(PMC_ERR_DIMENSION, e.what());
    } catch (const pmc::SingularError& e) {
        return fail(PMC_ERR_SINGULAR, e.what());
    } catch (const pmc::RankError& e) {
        return fail(PMC_ERR_RANK, e.what());
    } catch (const pmc::DomainError& e) {
        return fail(PMC_ERR_DOMAIN, e.what());
    } catch (const std::exception& e) {
        return fail(PMC_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PMC_ERR_INTERNAL, "unknown error");
    }
}

pmc_status from_failure(pmc::FailureReason r) {
    const std::string msg = std::string("solver failed: ") + pmc::failure_name(r);
    switch (r) {
        case pmc::FailureReason::singular_start:
            return fail(PMC_ERR_SINGULAR_START, msg);
        case pmc::FailureReason::singular_newton_matrix:
            return fail(PMC_ERR_SINGULAR_NEWTON_MATRIX, msg);
        case pmc::FailureReason::max_iters:
            return fail(PMC_ERR_MAX_ITERS, msg);
        case pmc::FailureReason::step_underflow:
            return fail(PMC_ERR_STEP_UNDERFLOW, msg);
    }
    return fail(PMC_ERR_INTERNAL, msg);
}

pmc::SolverConfig to_core(const pmc_config& c) {
    pmc::SolverConfig cfg;
    cfg.grad_tol = c.grad_tol;
    cfg.dedup_tol = c.dedup_tol;
    cfg.max_iters = static_cast<std::size_t>(c.max_iters);
    cfg.starts = static_cast<std::size_t>(c.starts);
    cfg.start_range = c.start_range;
    cfg.seed = c.seed;
    cfg.singular_guard = c.singular_guard;
    return cfg;
}

}  // namespace

struct pmc_pattern {
    pmc::Pattern pat;
    std::optional<pmc::PartialMatrix> pm;  // set by finalize
};

struct pmc_solution {
    pmc::Solution sol;
    int64_t start_index = -1;  // -1: not from multistart
};

struct pmc_solution_set {
    pmc::SolutionSet set;
    std::vector<pmc_solution> wrapped;  // stable storage behind pmc_set_solution
};

extern "C" {

void pmc_config_init(pmc_config* cfg) {
    if (!cfg) return;
    const pmc::SolverConfig d;
    cfg->grad_tol = d.grad_tol;
    cfg->dedup_tol = d.dedup_tol;
    cfg->max_iters = d.max_iters;
    cfg->starts = d.starts;
    cfg->start_range = d.start_range;
    cfg->seed = d.seed;
    cfg->singular_guard = d.singular_guard;
}

const char* pmc_version(void) { return "0.1.0"; }

const char* pmc_last_error(void) { return t_error.c_str(); }

const char* pmc_failure_name(int reason) {
    if (reason < 0 || reason > 3) return "unknown";
    return pmc::failure_name(static_cast<pmc::FailureReason>(reason));
}

pmc_pattern* pmc_pattern_new(int64_t rows, int64_t cols) {
    if (rows <= 0 || cols <= 0) {
        set_error("pattern dimensions must be positive");
        return nullptr;
    }
    auto* p = new (std::nothrow) pmc_pattern;
    if (!p) {
        set_error("out of memory");
        return nullptr;
    }
    p->pat.rows = static_cast<std::size_t>(rows);
    p->pat.cols = static_cast<std::size_t>(cols);
    return p;
}

void pmc_pattern_free(pmc_pattern* p) { delete p; }

pmc_status pmc_pattern_specify(pmc_pattern* p, int64_t i, int64_t j, double value) {
    if (!p) return fail(PMC_ERR_INVALID_ARGUMENT, "pattern is null");
    if (p->pm) return fail(PMC_ERR_INVALID_ARGUMENT, "pattern already finalized");
    if (i < 1 || j < 1 || i > static_cast<int64_t>(p->pat.rows) ||
        j > static_cast<int64_t>(p->pat.cols))
        return fail(PMC_ERR_PATTERN,
                    "specified position (" + std::to_string(i) + "," +
                        std::to_string(j) + ") out of range");
    if (!std::isfinite(value))
        return fail(PMC_ERR_PATTERN,
                    "specified value at (" + std::to_string(i) + "," +
                        std::to_string(j) + ") is not finite");
    p->pat.specified.push_back(
        {{static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)}, value});
    return PMC_OK;
}

pmc_status pmc_pattern_tie(pmc_pattern* p, const int64_t* ij, size_t n) {
    if (!p) return fail(PMC_ERR_INVALID_ARGUMENT, "pattern is null");
    if (p->pm) return fail(PMC_ERR_INVALID_ARGUMENT, "pattern already finalized");
    if (!ij || n == 0) return fail(PMC_ERR_INVALID_ARGUMENT, "empty class");
    std::vector<pmc::Position> cls;
    cls.reserve(n);
    for (size_t q = 0; q < n; ++q) {
        const int64_t i = ij[2 * q], j = ij[2 * q + 1];
        if (i < 1 || j < 1 || i > static_cast<int64_t>(p->pat.rows) ||
            j > static_cast<int64_t>(p->pat.cols))
            return fail(PMC_ERR_PATTERN,
                        "class position (" + std::to_string(i) + "," +
                            std::to_string(j) + ") out of range");
        cls.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)});
    }
    p->pat.classes.push_back(std::move(cls));
    return PMC_OK;
}

pmc_status pmc_pattern_finalize(pmc_pattern* p, int mode) {
    if (!p) return fail(PMC_ERR_INVALID_ARGUMENT, "pattern is null");
    if (p->pm) return fail(PMC_ERR_INVALID_ARGUMENT, "pattern already finalized");
    if (mode < PMC_MODE_AUTO || mode > PMC_MODE_RECTANGULAR)
        return fail(PMC_ERR_INVALID_ARGUMENT, "unknown mode");
    try {
        // Cells not yet covered become singleton classes, row-major.
        std::vector<char> covered(p->pat.rows * p->pat.cols, 0);
        auto cover = [&](const pmc::Position& pos) {
            if (pos.i < p->pat.rows && pos.j < p->pat.cols)
                covered[pos.i * p->pat.cols + pos.j] = 1;
        };
        for (const auto& e : p->pat.specified) cover(e.pos);
        for (const auto& cls : p->pat.classes)
            for (const auto& pos : cls) cover(pos);
        pmc::Pattern filled = p->pat;
        for (std::size_t i = 0; i < p->pat.rows; ++i)
            for (std::size_t j = 0; j < p->pat.cols; ++j)
                if (!covered[i * p->pat.cols + j])
                    filled.classes.push_back({pmc::Position{i, j}});

        std::optional<pmc::Mode> m;
        if (mode == PMC_MODE_SQUARE) m = pmc::Mode::square;
        if (mode == PMC_MODE_RECTANGULAR) m = pmc::Mode::rectangular;
        p->pm = pmc::make_partial(filled, m);
        p->pat = std::move(filled);
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

int64_t pmc_pattern_rows(const pmc_pattern* p) {
    return p ? static_cast<int64_t>(p->pat.rows) : -1;
}

int64_t pmc_pattern_cols(const pmc_pattern* p) {
    return p ? static_cast<int64_t>(p->pat.cols) : -1;
}

int64_t pmc_pattern_k(const pmc_pattern* p) {
    if (!p || !p->pm) return -1;
    return static_cast<int64_t>(p->pm->pattern.k());
}

int pmc_pattern_rectangular(const pmc_pattern* p) {
    if (!p || !p->pm) return -1;
    return p->pm->mode == pmc::Mode::rectangular ? 1 : 0;
}

pmc_status pmc_precheck(const pmc_pattern* p, uint32_t* flags,
                        int64_t* slope_classes, size_t capacity, size_t* n_slope) {
    if (!p || !p->pm || !flags)
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or flags null");
    try {
        const pmc::PrecheckResult r = pmc::structural_precheck(*p->pm);
        *flags = 0;
        if (r.single_row) *flags |= PMC_WARN_SINGLE_ROW;
        if (r.single_col) *flags |= PMC_WARN_SINGLE_COL;
        if (!r.constant_slope_classes.empty()) *flags |= PMC_WARN_CONSTANT_SLOPE;
        if (n_slope) *n_slope = r.constant_slope_classes.size();
        if (slope_classes)
            for (size_t q = 0; q < r.constant_slope_classes.size() && q < capacity; ++q)
                slope_classes[q] = static_cast<int64_t>(r.constant_slope_classes[q]) + 1;
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_complete(const pmc_pattern* p, const pmc_config* cfg,
                        pmc_solution_set** out) {
    if (!p || !p->pm || !cfg || !out)
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or null argument");
    try {
        auto* ss = new pmc_solution_set;
        ss->set = pmc::multistart(*p->pm, to_core(*cfg));
        ss->wrapped.reserve(ss->set.solutions.size());
        for (const auto& s : ss->set.solutions)
            ss->wrapped.push_back({s, static_cast<int64_t>(s.start_index)});
        *out = ss;
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_refine(const pmc_pattern* p, const pmc_config* cfg,
                      const double* x0, size_t k, pmc_solution** out) {
    if (!p || !p->pm || !cfg || !out || (!x0 && k > 0))
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or null argument");
    if (k != p->pm->pattern.k())
        return fail(PMC_ERR_DIMENSION, "x0 length does not match the unknown count");
    try {
        const std::vector<double> start(x0, x0 + k);
        pmc::NewtonResult r = pmc::newton(*p->pm, start, to_core(*cfg));
        if (!r.ok()) return from_failure(r.failure);
        *out = new pmc_solution{std::move(*r.solution), -1};
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_probe(const pmc_pattern* p, const double* x, size_t k,
                     pmc_solution** out) {
    if (!p || !p->pm || !out || (!x && k > 0))
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or null argument");
    if (k != p->pm->pattern.k())
        return fail(PMC_ERR_DIMENSION, "x length does not match the unknown count");
    try {
        const std::vector<double> xv(x, x + k);
        pmc::Solution s;
        s.x = xv;
        s.sigma = pmc::assemble(*p->pm, xv);
        s.objective = pmc::objective(*p->pm, xv);
        s.gradient = pmc::gradient(*p->pm, xv);
        s.grad_norm = 0.0;
        for (double g : s.gradient) s.grad_norm = std::max(s.grad_norm, std::fabs(g));
        s.residuals = pmc::residual_report(*p->pm, xv);
        if (p->pm->mode == pmc::Mode::square) {
            s.inv = pmc::inverse(s.sigma);
        } else {
            const pmc::NormalizedRect nr = pmc::normalize_rect(*p->pm);
            pmc::Matrix pv = pmc::pinv_frr(nr.transposed ? s.sigma.transpose() : s.sigma);
            s.inv = nr.transposed ? pv.transpose() : std::move(pv);
        }
        s.flags = pmc::classify(s.sigma, s.inv);
        *out = new pmc_solution{std::move(s), -1};
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_dempster(const pmc_pattern* p, const pmc_config* cfg,
                        pmc_solution** out) {
    if (!p || !p->pm || !cfg || !out)
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or null argument");
    try {
        pmc::Solution s = pmc::dempster_spd(*p->pm, to_core(*cfg));
        *out = new pmc_solution{std::move(s), -1};
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_dual(const pmc_pattern* p, const pmc_config* cfg,
                    const double* lambda_init, pmc_solution** out) {
    if (!p || !p->pm || !cfg || !out)
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or null argument");
    try {
        std::optional<std::vector<double>> init;
        if (lambda_init)
            init.emplace(lambda_init, lambda_init + p->pm->pattern.specified.size());
        pmc::NewtonResult r =
            pmc::dual_solve(*p->pm, to_core(*cfg), init ? &*init : nullptr);
        if (!r.ok()) return from_failure(r.failure);
        *out = new pmc_solution{std::move(*r.solution), -1};
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_gradcheck(const pmc_pattern* p, uint64_t samples, uint64_t seed,
                         double range, double* worst_rel, int64_t* worst_class,
                         uint64_t* samples_used) {
    if (!p || !p->pm || !worst_rel)
        return fail(PMC_ERR_INVALID_ARGUMENT, "pattern not finalized or null argument");
    try {
        const pmc::PartialMatrix& pm = *p->pm;
        const std::size_t k = pm.pattern.k();
        const double r =
            (range > 0.0) ? range : 2.0 * (1.0 + pm.pattern.max_abs_specified());
        constexpr double kSingularMargin = 1e-3;  // redraw closer than this

        pmc::SplitMix64 rng{seed};
        double worst = 0.0;
        int64_t worst_c = -1;
        uint64_t used = 0;

        for (uint64_t s = 0; s < samples; ++s) {
            bool got = false;
            for (int attempt = 0; attempt < 400 && !got; ++attempt) {
                std::vector<double> x(k);
                for (std::size_t c = 0; c < k; ++c) x[c] = rng.uniform(-r, r);
                const auto ev = pmc::try_evaluate(pm, x);
                if (!ev || !(ev->feas_ratio > kSingularMargin)) continue;
                std::vector<double> fd;
                try {
                    fd = pmc::fd_gradient(pm, x, 1e-6);
                } catch (const pmc::Error&) {
                    continue;
                }
                for (std::size_t c = 0; c < k; ++c) {
                    const double rel = std::fabs(fd[c] - ev->gradient[c]) /
                                       std::max(1.0, std::fabs(ev->gradient[c]));
                    if (rel > worst) {
                        worst = rel;
                        worst_c = static_cast<int64_t>(c) + 1;
                    }
                }
                got = true;
                ++used;
            }
        }
        if (used == 0 && samples > 0)
            return fail(PMC_ERR_DOMAIN, "gradcheck: every probe point was singular");
        *worst_rel = worst;
        if (worst_class) *worst_class = worst_c;
        if (samples_used) *samples_used = used;
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_entropy(const double* sigma, int64_t n, double* out) {
    if (!sigma || n <= 0 || !out)
        return fail(PMC_ERR_INVALID_ARGUMENT, "null argument or nonpositive order");
    try {
        pmc::Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        std::memcpy(m.data().data(), sigma,
                    sizeof(double) * static_cast<std::size_t>(n * n));
        *out = pmc::entropy(m);
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

pmc_status pmc_apply(const pmc_solution* s, const double* b, int64_t b_rows,
                     int64_t b_cols, int side_right, double* out,
                     uint64_t* zeros_exploited) {
    if (!s || !b || !out || b_rows <= 0 || b_cols <= 0)
        return fail(PMC_ERR_INVALID_ARGUMENT, "null argument or empty B");
    try {
        pmc::Matrix bm(static_cast<std::size_t>(b_rows),
                       static_cast<std::size_t>(b_cols));
        std::memcpy(bm.data().data(), b,
                    sizeof(double) * static_cast<std::size_t>(b_rows * b_cols));
        const pmc::ApplyResult r = pmc::apply_completion(s->sol, bm, side_right != 0);
        std::memcpy(out, r.result.data().data(),
                    sizeof(double) * r.result.rows() * r.result.cols());
        if (zeros_exploited) *zeros_exploited = r.zeros_exploited;
        return PMC_OK;
    } catch (...) {
        return from_exception();
    }
}

size_t pmc_set_count(const pmc_solution_set* ss) {
    return ss ? ss->wrapped.size() : 0;
}

const pmc_solution* pmc_set_solution(const pmc_solution_set* ss, size_t idx) {
    if (!ss || idx >= ss->wrapped.size()) return nullptr;
    return &ss->wrapped[idx];
}

uint64_t pmc_set_attempts(const pmc_solution_set* ss) {
    return ss ? ss->set.attempts : 0;
}

uint64_t pmc_set_failures(const pmc_solution_set* ss, int reason) {
    if (!ss || reason < 0 || reason > 3) return 0;
    return ss->set.failure_counts[static_cast<std::size_t>(reason)];
}

void pmc_set_free(pmc_solution_set* ss) { delete ss; }

size_t pmc_solution_k(const pmc_solution* s) { return s ? s->sol.x.size() : 0; }

int64_t pmc_solution_rows(const pmc_solution* s) {
    return s ? static_cast<int64_t>(s->sol.sigma.rows()) : -1;
}

int64_t pmc_solution_cols(const pmc_solution* s) {
    return s ? static_cast<int64_t>(s->sol.sigma.cols()) : -1;
}

pmc_status pmc_solution_x(const pmc_solution* s, double* out) {
    if (!s || !out) return fail(PMC_ERR_INVALID_ARGUMENT, "null argument");
    std::copy(s->sol.x.begin(), s->sol.x.end(), out);
    return PMC_OK;
}

pmc_status pmc_solution_sigma(const pmc_solution* s, double* out) {
    if (!s || !out) return fail(PMC_ERR_INVALID_ARGUMENT, "null argument");
    const auto& d = s->sol.sigma.data();
    std::copy(d.begin(), d.end(), out);
    return PMC_OK;
}

pmc_status pmc_solution_inv(const pmc_solution* s, double* out) {
    if (!s || !out) return fail(PMC_ERR_INVALID_ARGUMENT, "null argument");
    const auto& d = s->sol.inv.data();
    std::copy(d.begin(), d.end(), out);
    return PMC_OK;
}

double pmc_solution_objective(const pmc_solution* s) {
    return s ? s->sol.objective : 0.0;
}

pmc_status pmc_solution_gradient(const pmc_solution* s, double* out) {
    if (!s || !out) return fail(PMC_ERR_INVALID_ARGUMENT, "null argument");
    std::copy(s->sol.gradient.begin(), s->sol.gradient.end(), out);
    return PMC_OK;
}

double pmc_solution_grad_norm(const pmc_solution* s) {
    return s ? s->sol.grad_norm : 0.0;
}

size_t pmc_solution_residual_count(const pmc_solution* s) {
    return s ? s->sol.residuals.entries.size() : 0;
}

pmc_status pmc_solution_residual(const pmc_solution* s, size_t idx, int64_t* i,
                                 int64_t* j, double* value) {
    if (!s || idx >= s->sol.residuals.entries.size())
        return fail(PMC_ERR_INVALID_ARGUMENT, "residual index out of range");
    const auto& e = s->sol.residuals.entries[idx];
    if (i) *i = static_cast<int64_t>(e.pos.i) + 1;
    if (j) *j = static_cast<int64_t>(e.pos.j) + 1;
    if (value) *value = e.value;
    return PMC_OK;
}

double pmc_solution_zero_threshold(const pmc_solution* s) {
    return s ? s->sol.residuals.zero_threshold : 0.0;
}

pmc_status pmc_solution_flags(const pmc_solution* s, int* symmetric, int* toeplitz,
                              int* positive_definite, uint64_t* zero_count) {
    if (!s) return fail(PMC_ERR_INVALID_ARGUMENT, "null argument");
    if (symmetric) *symmetric = s->sol.flags.symmetric ? 1 : 0;
    if (toeplitz) *toeplitz = s->sol.flags.toeplitz ? 1 : 0;
    if (positive_definite) *positive_definite = s->sol.flags.positive_definite ? 1 : 0;
    if (zero_count) *zero_count = s->sol.flags.zero_count;
    return PMC_OK;
}

int64_t pmc_solution_start_index(const pmc_solution* s) {
    return s ? s->start_index : -1;
}

int64_t pmc_solution_iterations(const pmc_solution* s) {
    return s ? static_cast<int64_t>(s->sol.iterations) : -1;
}

pmc_status pmc_solution_entropy(const pmc_solution* s, double* out) {
    if (!s || !out) return fail(PMC_ERR_INVALID_ARGUMENT, "null argument");
    if (!s->sol.entropy)
        return fail(PMC_ERR_UNSET, "solution carries no entropy value");
    *out = *s->sol.entropy;
    return PMC_OK;
}

void pmc_solution_free(pmc_solution* s) { delete s; }

}  // extern "C"
