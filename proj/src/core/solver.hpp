#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "partial_matrix.hpp"

namespace pmc {

struct SolverConfig {
    double grad_tol = 1e-10;        // convergence: ||gradient||_inf below this
    double dedup_tol = 1e-6;        // relative x-distance treated as the same solution
    std::size_t max_iters = 100;    // per Newton/LM attempt
    std::size_t starts = 200;       // multistart attempts
    double start_range = 0.0;       // <= 0: auto 2*(1+max|sigma_ij|); draws uniform on [-r,r]^k
    std::uint64_t seed = 0;
    double singular_guard = 1e-12;  // feasibility: |det|/hadamard (square),
                                    // lambda_min/lambda_max of Sigma Sigma^T (rectangular)
    // Backtracking line search: contraction 0.5, minimum step 1e-12 (fixed).
};

// splitmix64: tiny, bit-exact everywhere, which the determinism contract
// needs (library distributions are not bit-stable across implementations).
struct SplitMix64 {
    std::uint64_t state = 0;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
};

enum class FailureReason : int {
    singular_start = 0,
    singular_newton_matrix = 1,
    max_iters = 2,
    step_underflow = 3,
};

const char* failure_name(FailureReason r);

struct Flags {
    bool symmetric = false;
    bool toeplitz = false;
    bool positive_definite = false;
    std::size_t zero_count = 0;  // (pseudo)inverse entries below the zero threshold
};

Flags classify(const Matrix& sigma, const Matrix& inv);

struct Solution {
    std::vector<double> x;
    Matrix sigma;
    Matrix inv;  // inverse (square) or pseudoinverse (rectangular)
    double objective = 0.0;
    std::vector<double> gradient;
    double grad_norm = 0.0;  // inf norm
    ResidualReport residuals;
    Flags flags;
    std::size_t start_index = 0;
    std::size_t iterations = 0;
    std::optional<double> entropy;  // only on the SPD maximum-entropy path
};

struct NewtonResult {
    std::optional<Solution> solution;
    FailureReason failure = FailureReason::max_iters;
    std::size_t iterations = 0;
    bool ok() const { return solution.has_value(); }
};

// Damped Newton on the stationarity system gradient(x) = 0. Step from the
// analytic Newton matrix (Tikhonov-regularized fallback when LU flags it
// singular), backtracking on the merit ||gradient||^2 with the feasibility
// guard. Convergence requires ||g||_inf < grad_tol AND a nonsingular Newton
// matrix whose full step satisfies ||d||_inf <= 1e-8*(1+||x||_inf); the step
// condition rejects drift toward roots at infinity where the gradient also
// vanishes.
NewtonResult newton(const PartialMatrix& pm, const std::vector<double>& x0,
                    const SolverConfig& cfg);

struct SolutionSet {
    std::vector<Solution> solutions;  // deduplicated, objective descending
    std::array<std::uint64_t, 4> failure_counts{};  // indexed by FailureReason
    std::uint64_t attempts = 0;
};

// Seeded multistart. Start i draws x0 from a splitmix64 stream seeded with
// the i-th output of the master stream seeded at cfg.seed, so starts are
// independent and order-insensitive. Each start runs a Levenberg-Marquardt
// globalization of the same stationarity system (residual det * gradient,
// whose minima coincide with the stationary points; the plain merit
// ||gradient||^2 has false minima at infinity that swallow most of the start
// box) and must pass the exact convergence certificate used by newton().
// Results are merged in start order, deduplicated by relative x-distance,
// then sorted by objective descending (near-ties lexicographic in x).
SolutionSet multistart(const PartialMatrix& pm, const SolverConfig& cfg);

// Maximum-entropy SPD completion: Newton ascent on log det over the positive
// definite region, line search rejecting non-PD iterates (Armijo slope
// 1e-4). Requires a symmetric pattern: specified entries symmetric, classes
// either diagonal singletons or symmetric pairs. Start: zeros completion if
// PD, else up to 1000 seeded draws. Throws PatternError (asymmetric),
// DomainError (no PD start / no convergence). The returned Solution carries
// the entropy value.
Solution dempster_spd(const PartialMatrix& pm, const SolverConfig& cfg);

// H = 1/2 log det(sigma) + n/2 (1 + log 2 pi); sigma must be symmetric
// positive definite (DomainError otherwise).
double entropy(const Matrix& sigma);

// Dual parametrization for square untied patterns: solve for Lambda supported
// on the transposed specified set with [Lambda^{-1}]_{ij} = sigma_ij on the
// specified set; the inverse of the solution is the completion. Variables are
// ordered like pattern.specified; lambda_init (same order) overrides the
// default initialization (masked inverse of the best primal solution, random
// fallback). The result is polished through newton() so it satisfies the
// Solution invariants. Throws PatternError when the pattern is tied or not
// square-mode.
NewtonResult dual_solve(const PartialMatrix& pm, const SolverConfig& cfg,
                        const std::vector<double>* lambda_init = nullptr);

struct ApplyResult {
    Matrix result;
    std::size_t zeros_exploited = 0;
};

// side_right = false: X = Sigma^{-1} B (square only). side_right = true:
// X = B * pinv. zeros_exploited counts (pseudo)inverse entries below the
// zero threshold.
ApplyResult apply_completion(const Solution& sol, const Matrix& b, bool side_right);

}  // namespace pmc
