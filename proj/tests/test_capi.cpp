#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"

#include "parsimony.h"

namespace {

struct PatternGuard {
    pmc_pattern* p = nullptr;
    ~PatternGuard() { pmc_pattern_free(p); }
};

struct SolutionGuard {
    pmc_solution* s = nullptr;
    ~SolutionGuard() { pmc_solution_free(s); }
};

struct SetGuard {
    pmc_solution_set* ss = nullptr;
    ~SetGuard() { pmc_set_free(ss); }
};

// Corner pattern: 4x4 symmetric band, corners tied to one unknown.
pmc_pattern* make_corner_tied() {
    pmc_pattern* p = pmc_pattern_new(4, 4);
    const double x12 = 4.0 / 929.0, x13 = -15.0 / 929.0;
    const double x23 = -1.0 / 1858.0, x24 = -63.0 / 1858.0, x34 = 2.0 / 929.0;
    pmc_pattern_specify(p, 1, 1, 120.0 / 929.0);
    pmc_pattern_specify(p, 1, 2, x12);
    pmc_pattern_specify(p, 1, 3, x13);
    pmc_pattern_specify(p, 2, 1, x12);
    pmc_pattern_specify(p, 2, 2, 124.0 / 929.0);
    pmc_pattern_specify(p, 2, 3, x23);
    pmc_pattern_specify(p, 2, 4, x24);
    pmc_pattern_specify(p, 3, 1, x13);
    pmc_pattern_specify(p, 3, 2, x23);
    pmc_pattern_specify(p, 3, 3, 118.0 / 929.0);
    pmc_pattern_specify(p, 3, 4, x34);
    pmc_pattern_specify(p, 4, 2, x24);
    pmc_pattern_specify(p, 4, 3, x34);
    pmc_pattern_specify(p, 4, 4, 126.0 / 929.0);
    const int64_t tie[4] = {1, 4, 4, 1};
    pmc_pattern_tie(p, tie, 2);
    return p;
}

// Ring pattern: unknowns at (1,3),(2,4),(3,1),(4,2), left for auto-completion.
pmc_pattern* make_ring() {
    pmc_pattern* p = pmc_pattern_new(4, 4);
    const double v[4][4] = {{5, 2, 0, 1}, {2, 5, 2, 0}, {0, 2, 5, 2}, {1, 0, 2, 5}};
    for (int64_t i = 1; i <= 4; ++i)
        for (int64_t j = 1; j <= 4; ++j) {
            bool unknown = (i == 1 && j == 3) || (i == 2 && j == 4) ||
                           (i == 3 && j == 1) || (i == 4 && j == 2);
            if (!unknown) pmc_pattern_specify(p, i, j, v[i - 1][j - 1]);
        }
    return p;
}

constexpr double kCornerRoot = -79.0 / 58527.0;
constexpr double kCornerProbe = -16.0 / 929.0;

}  // namespace

TEST_CASE("version and config defaults") {
    CHECK(pmc_version() != nullptr);
    CHECK(std::strlen(pmc_version()) > 0);

    pmc_config cfg;
    pmc_config_init(&cfg);
    CHECK(cfg.grad_tol == 1e-10);
    CHECK(cfg.dedup_tol == 1e-6);
    CHECK(cfg.max_iters == 100);
    CHECK(cfg.starts == 200);
    CHECK(cfg.start_range <= 0.0);
    CHECK(cfg.seed == 0);
    CHECK(cfg.singular_guard == 1e-12);
}

TEST_CASE("failure names are stable") {
    CHECK(std::string(pmc_failure_name(0)) == "singular_start");
    CHECK(std::string(pmc_failure_name(1)) == "singular_newton_matrix");
    CHECK(std::string(pmc_failure_name(2)) == "max_iters");
    CHECK(std::string(pmc_failure_name(3)) == "step_underflow");
}

TEST_CASE("pattern lifecycle") {
    CHECK(pmc_pattern_new(0, 3) == nullptr);
    CHECK(pmc_pattern_new(-1, 3) == nullptr);

    PatternGuard g{pmc_pattern_new(2, 3)};
    REQUIRE(g.p != nullptr);
    CHECK(pmc_pattern_rows(g.p) == 2);
    CHECK(pmc_pattern_cols(g.p) == 3);
    CHECK(pmc_pattern_k(g.p) == -1);
    CHECK(pmc_pattern_rectangular(g.p) == -1);

    CHECK(pmc_pattern_specify(g.p, 1, 1, 2.0) == PMC_OK);
    CHECK(pmc_pattern_specify(g.p, 1, 2, 1.0) == PMC_OK);
    CHECK(pmc_pattern_specify(g.p, 1, 3, 0.5) == PMC_OK);
    CHECK(pmc_pattern_specify(g.p, 2, 1, -1.0) == PMC_OK);
    CHECK(pmc_pattern_specify(g.p, 2, 2, 3.0) == PMC_OK);

    CHECK(pmc_pattern_specify(g.p, 0, 1, 1.0) == PMC_ERR_PATTERN);
    CHECK(pmc_pattern_specify(g.p, 3, 1, 1.0) == PMC_ERR_PATTERN);
    CHECK(pmc_last_error()[0] != '\0');

    // (2,3) left uncovered: finalize appends it as a singleton class.
    CHECK(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    CHECK(pmc_pattern_k(g.p) == 1);
    CHECK(pmc_pattern_rectangular(g.p) == 1);

    // Mutation after finalize is rejected.
    CHECK(pmc_pattern_specify(g.p, 2, 3, 1.0) == PMC_ERR_INVALID_ARGUMENT);
    const int64_t tie[2] = {2, 3};
    CHECK(pmc_pattern_tie(g.p, tie, 1) == PMC_ERR_INVALID_ARGUMENT);
    CHECK(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("finalize failures") {
    SUBCASE("duplicate coverage") {
        PatternGuard g{pmc_pattern_new(2, 2)};
        pmc_pattern_specify(g.p, 1, 1, 1.0);
        const int64_t tie[2] = {1, 1};
        CHECK(pmc_pattern_tie(g.p, tie, 1) == PMC_OK);
        CHECK(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_ERR_PATTERN);
        CHECK(std::string(pmc_last_error()).find("(1,1)") != std::string::npos);
    }
    SUBCASE("square mode forced on a rectangular shape") {
        PatternGuard g{pmc_pattern_new(2, 3)};
        CHECK(pmc_pattern_finalize(g.p, PMC_MODE_SQUARE) == PMC_ERR_PATTERN);
    }
    SUBCASE("bad mode constant") {
        PatternGuard g{pmc_pattern_new(2, 2)};
        CHECK(pmc_pattern_finalize(g.p, 9) == PMC_ERR_INVALID_ARGUMENT);
    }
}

TEST_CASE("auto-completed singleton classes follow row-major order") {
    // Unknowns at (1,2) and (2,1); tie nothing, finalize, probe with x fixing
    // distinct values, and read sigma back to confirm the coordinate order.
    PatternGuard g{pmc_pattern_new(2, 2)};
    pmc_pattern_specify(g.p, 1, 1, 2.0);
    pmc_pattern_specify(g.p, 2, 2, 3.0);
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    REQUIRE(pmc_pattern_k(g.p) == 2);

    const double x[2] = {0.25, -0.5};  // (1,2) first, then (2,1)
    SolutionGuard s;
    REQUIRE(pmc_probe(g.p, x, 2, &s.s) == PMC_OK);
    double sigma[4];
    REQUIRE(pmc_solution_sigma(s.s, sigma) == PMC_OK);
    CHECK(sigma[1] == 0.25);
    CHECK(sigma[2] == -0.5);
}

TEST_CASE("precheck flags") {
    // Both unknowns in column 2 of [[1,x],[3,y]].
    PatternGuard g{pmc_pattern_new(2, 2)};
    pmc_pattern_specify(g.p, 1, 1, 1.0);
    pmc_pattern_specify(g.p, 2, 1, 3.0);
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);

    uint32_t flags = 0;
    int64_t slope[4] = {0, 0, 0, 0};
    size_t n_slope = 0;
    REQUIRE(pmc_precheck(g.p, &flags, slope, 4, &n_slope) == PMC_OK);
    CHECK((flags & PMC_WARN_SINGLE_COL) != 0);
    CHECK((flags & PMC_WARN_SINGLE_ROW) == 0);
    CHECK((flags & PMC_WARN_CONSTANT_SLOPE) != 0);
    CHECK(n_slope == 2);
    CHECK(slope[0] == 1);  // 1-based class indices
    CHECK(slope[1] == 2);

    // The ring pattern is clear.
    PatternGuard r{make_ring()};
    REQUIRE(pmc_pattern_finalize(r.p, PMC_MODE_AUTO) == PMC_OK);
    flags = 99;
    REQUIRE(pmc_precheck(r.p, &flags, nullptr, 0, &n_slope) == PMC_OK);
    CHECK(flags == 0);
    CHECK(n_slope == 0);

    // Unfinalized pattern is rejected.
    PatternGuard u{pmc_pattern_new(2, 2)};
    CHECK(pmc_precheck(u.p, &flags, nullptr, 0, &n_slope) ==
          PMC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("complete on the ring pattern") {
    PatternGuard g{make_ring()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);

    pmc_config cfg;
    pmc_config_init(&cfg);
    cfg.starts = 400;
    cfg.seed = 42;
    cfg.start_range = 10.0;

    SetGuard set;
    REQUIRE(pmc_complete(g.p, &cfg, &set.ss) == PMC_OK);
    CHECK(pmc_set_count(set.ss) == 7);
    CHECK(pmc_set_attempts(set.ss) == 400);
    uint64_t total_failures = 0;
    for (int r = 0; r < 4; ++r) total_failures += pmc_set_failures(set.ss, r);
    CHECK(total_failures < 400);
    CHECK(pmc_set_solution(set.ss, 99) == nullptr);

    const pmc_solution* best = pmc_set_solution(set.ss, 0);
    REQUIRE(best != nullptr);
    CHECK(pmc_solution_k(best) == 4);
    CHECK(pmc_solution_rows(best) == 4);
    CHECK(pmc_solution_cols(best) == 4);

    double x[4], grad[4], sigma[16], inv[16];
    REQUIRE(pmc_solution_x(best, x) == PMC_OK);
    for (int c = 0; c < 4; ++c) CHECK(x[c] == doctest::Approx(-6.0).epsilon(1e-7));
    REQUIRE(pmc_solution_gradient(best, grad) == PMC_OK);
    for (int c = 0; c < 4; ++c) CHECK(std::fabs(grad[c]) < cfg.grad_tol);
    CHECK(pmc_solution_grad_norm(best) < cfg.grad_tol);
    REQUIRE(pmc_solution_sigma(best, sigma) == PMC_OK);
    CHECK(sigma[2] == doctest::Approx(-6.0).epsilon(1e-7));
    REQUIRE(pmc_solution_inv(best, inv) == PMC_OK);
    CHECK(std::fabs(pmc_solution_objective(best) - std::log(1352.0)) < 1e-9);

    // Residual map covers the four unknown cells and reports near-zeros.
    REQUIRE(pmc_solution_residual_count(best) == 4);
    int64_t ri, rj;
    double rv;
    REQUIRE(pmc_solution_residual(best, 0, &ri, &rj, &rv) == PMC_OK);
    CHECK(ri == 1);
    CHECK(rj == 3);
    CHECK(std::fabs(rv) < pmc_solution_zero_threshold(best));
    CHECK(pmc_solution_residual(best, 4, &ri, &rj, &rv) ==
          PMC_ERR_INVALID_ARGUMENT);

    int sym = 0, toep = 0, pd = 0;
    uint64_t zeros = 0;
    REQUIRE(pmc_solution_flags(best, &sym, &toep, &pd, &zeros) == PMC_OK);
    CHECK(sym == 1);
    CHECK(toep == 1);
    CHECK(pd == 0);
    CHECK(pmc_solution_start_index(best) >= 0);
    CHECK(pmc_solution_iterations(best) > 0);

    double h = 0.0;
    CHECK(pmc_solution_entropy(best, &h) == PMC_ERR_UNSET);
}

TEST_CASE("complete is deterministic across calls") {
    PatternGuard g{make_ring()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    pmc_config cfg;
    pmc_config_init(&cfg);
    cfg.starts = 120;
    cfg.seed = 5;

    SetGuard a, b;
    REQUIRE(pmc_complete(g.p, &cfg, &a.ss) == PMC_OK);
    REQUIRE(pmc_complete(g.p, &cfg, &b.ss) == PMC_OK);
    REQUIRE(pmc_set_count(a.ss) == pmc_set_count(b.ss));
    for (size_t s = 0; s < pmc_set_count(a.ss); ++s) {
        double xa[4], xb[4];
        REQUIRE(pmc_solution_x(pmc_set_solution(a.ss, s), xa) == PMC_OK);
        REQUIRE(pmc_solution_x(pmc_set_solution(b.ss, s), xb) == PMC_OK);
        for (int c = 0; c < 4; ++c) CHECK(xa[c] == xb[c]);
    }
}

TEST_CASE("refine and probe") {
    PatternGuard g{make_corner_tied()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    pmc_config cfg;
    pmc_config_init(&cfg);

    SUBCASE("refine from zero converges to the root") {
        const double x0 = 0.0;
        SolutionGuard s;
        REQUIRE(pmc_refine(g.p, &cfg, &x0, 1, &s.s) == PMC_OK);
        double x = 0.0;
        REQUIRE(pmc_solution_x(s.s, &x) == PMC_OK);
        CHECK(x == doctest::Approx(kCornerRoot).epsilon(1e-9));
        CHECK(pmc_solution_start_index(s.s) == -1);
    }

    SUBCASE("refine length mismatch") {
        const double x0[2] = {0.0, 0.0};
        SolutionGuard s;
        CHECK(pmc_refine(g.p, &cfg, x0, 2, &s.s) == PMC_ERR_DIMENSION);
    }

    SUBCASE("probe at the integer-inverse point") {
        const double xp = kCornerProbe;
        SolutionGuard s;
        REQUIRE(pmc_probe(g.p, &xp, 1, &s.s) == PMC_OK);
        double grad = 0.0;
        REQUIRE(pmc_solution_gradient(s.s, &grad) == PMC_OK);
        CHECK(grad == doctest::Approx(2.0).epsilon(1e-10));
        double inv[16];
        REQUIRE(pmc_solution_inv(s.s, inv) == PMC_OK);
        CHECK(inv[0] == doctest::Approx(8.0).epsilon(1e-10));
        int sym, toep, pd;
        uint64_t zeros;
        REQUIRE(pmc_solution_flags(s.s, &sym, &toep, &pd, &zeros) == PMC_OK);
        CHECK(zeros == 6);
    }

    SUBCASE("probe at a singular point fails cleanly") {
        // 2x2 all-ones is singular.
        PatternGuard h{pmc_pattern_new(2, 2)};
        pmc_pattern_specify(h.p, 1, 1, 1.0);
        pmc_pattern_specify(h.p, 1, 2, 1.0);
        pmc_pattern_specify(h.p, 2, 1, 1.0);
        pmc_pattern_specify(h.p, 2, 2, 1.0);
        REQUIRE(pmc_pattern_finalize(h.p, PMC_MODE_AUTO) == PMC_OK);
        SolutionGuard s;
        CHECK(pmc_probe(h.p, nullptr, 0, &s.s) == PMC_ERR_SINGULAR);
        CHECK(s.s == nullptr);
    }
}

TEST_CASE("refine failure statuses") {
    // [[1,x],[3,y]] has no stationary completion.
    PatternGuard g{pmc_pattern_new(2, 2)};
    pmc_pattern_specify(g.p, 1, 1, 1.0);
    pmc_pattern_specify(g.p, 2, 1, 3.0);
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    pmc_config cfg;
    pmc_config_init(&cfg);
    const double x0[2] = {0.5, 0.5};
    SolutionGuard s;
    pmc_status st = pmc_refine(g.p, &cfg, x0, 2, &s.s);
    CHECK((st == PMC_ERR_STEP_UNDERFLOW || st == PMC_ERR_MAX_ITERS));
    CHECK(s.s == nullptr);
    CHECK(std::string(pmc_last_error()).find("solver failed") != std::string::npos);
}

TEST_CASE("dempster through the C boundary") {
    PatternGuard g{make_corner_tied()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    pmc_config cfg;
    pmc_config_init(&cfg);

    SolutionGuard s;
    REQUIRE(pmc_dempster(g.p, &cfg, &s.s) == PMC_OK);
    double x = 0.0;
    REQUIRE(pmc_solution_x(s.s, &x) == PMC_OK);
    CHECK(x == doctest::Approx(kCornerRoot).epsilon(1e-9));

    double h = 0.0;
    REQUIRE(pmc_solution_entropy(s.s, &h) == PMC_OK);
    double sigma[16];
    REQUIRE(pmc_solution_sigma(s.s, sigma) == PMC_OK);
    double h2 = 0.0;
    REQUIRE(pmc_entropy(sigma, 4, &h2) == PMC_OK);
    CHECK(h == doctest::Approx(h2).epsilon(1e-12));

    // Asymmetric pattern: PMC_ERR_PATTERN.
    PatternGuard a{pmc_pattern_new(2, 2)};
    pmc_pattern_specify(a.p, 1, 1, 2.0);
    pmc_pattern_specify(a.p, 1, 2, 1.0);
    pmc_pattern_specify(a.p, 2, 1, -1.0);
    pmc_pattern_specify(a.p, 2, 2, 2.0);
    REQUIRE(pmc_pattern_finalize(a.p, PMC_MODE_AUTO) == PMC_OK);
    SolutionGuard s2;
    CHECK(pmc_dempster(a.p, &cfg, &s2.s) == PMC_ERR_PATTERN);
}

TEST_CASE("dual through the C boundary") {
    PatternGuard g{make_ring()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    pmc_config cfg;
    pmc_config_init(&cfg);

    SolutionGuard s;
    REQUIRE(pmc_dual(g.p, &cfg, nullptr, &s.s) == PMC_OK);
    CHECK(pmc_solution_grad_norm(s.s) < cfg.grad_tol);

    // Tied pattern: PMC_ERR_PATTERN.
    PatternGuard t{make_corner_tied()};
    REQUIRE(pmc_pattern_finalize(t.p, PMC_MODE_AUTO) == PMC_OK);
    SolutionGuard s2;
    CHECK(pmc_dual(t.p, &cfg, nullptr, &s2.s) == PMC_ERR_PATTERN);
}

TEST_CASE("gradcheck through the C boundary") {
    PatternGuard g{make_ring()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);

    double worst = 1.0;
    int64_t worst_class = 0;
    uint64_t used = 0;
    REQUIRE(pmc_gradcheck(g.p, 20, 7, 0.0, &worst, &worst_class, &used) == PMC_OK);
    CHECK(used == 20);
    CHECK(worst < 1e-5);
    CHECK(worst_class >= 1);
    CHECK(worst_class <= 4);
}

TEST_CASE("entropy through the C boundary") {
    const double eye4[16] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    double h = 0.0;
    REQUIRE(pmc_entropy(eye4, 4, &h) == PMC_OK);
    const double expect = 2.0 * (1.0 + std::log(2.0 * 3.14159265358979323846));
    CHECK(h == doctest::Approx(expect).epsilon(1e-14));

    const double bad[4] = {1, 0.5, 0, 1};
    CHECK(pmc_entropy(bad, 2, &h) == PMC_ERR_DOMAIN);
    CHECK(pmc_entropy(eye4, 0, &h) == PMC_ERR_INVALID_ARGUMENT);
    CHECK(pmc_entropy(nullptr, 2, &h) == PMC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("apply through the C boundary") {
    PatternGuard g{make_corner_tied()};
    REQUIRE(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_OK);
    pmc_config cfg;
    pmc_config_init(&cfg);
    const double x0 = 0.0;
    SolutionGuard s;
    REQUIRE(pmc_refine(g.p, &cfg, &x0, 1, &s.s) == PMC_OK);

    // sigma X = e1: the first column of the inverse.
    const double e1[4] = {1, 0, 0, 0};
    double col[4];
    uint64_t zeros = 0;
    REQUIRE(pmc_apply(s.s, e1, 4, 1, 0, col, &zeros) == PMC_OK);
    double inv[16];
    REQUIRE(pmc_solution_inv(s.s, inv) == PMC_OK);
    for (int i = 0; i < 4; ++i)
        CHECK(col[i] == doctest::Approx(inv[i * 4 + 0]).epsilon(1e-10));
    CHECK(zeros == 2);

    // Dimension mismatch.
    CHECK(pmc_apply(s.s, e1, 3, 1, 0, col, nullptr) == PMC_ERR_DIMENSION);
    CHECK(pmc_apply(nullptr, e1, 4, 1, 0, col, nullptr) ==
          PMC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("last error reporting") {
    PatternGuard g{pmc_pattern_new(2, 2)};
    pmc_pattern_specify(g.p, 1, 1, 1.0);
    const int64_t tie[2] = {1, 1};
    pmc_pattern_tie(g.p, tie, 1);
    CHECK(pmc_pattern_finalize(g.p, PMC_MODE_AUTO) == PMC_ERR_PATTERN);
    std::string msg = pmc_last_error();
    CHECK(!msg.empty());
    CHECK(msg.find("pattern") != std::string::npos);
}
