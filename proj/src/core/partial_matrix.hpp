#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "matrix.hpp"

namespace pmc {

struct Position {
    std::size_t i = 0;
    std::size_t j = 0;
    bool operator==(const Position&) const = default;
};

struct SpecifiedEntry {
    Position pos;
    double value = 0.0;
};

// A partial matrix pattern: fixed entries plus variable classes. Every cell
// is either specified or belongs to exactly one class; a class ties all of
// its positions to a single scalar unknown. Indices are 0-based here; the
// 1-based convention exists only at the file/C boundary.
struct Pattern {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<SpecifiedEntry> specified;
    std::vector<std::vector<Position>> classes;

    std::size_t k() const { return classes.size(); }
    bool untied() const;  // every class a singleton
    double max_abs_specified() const;
};

// Throws PatternError unless dimensions are positive, positions are in range,
// specified/class positions are disjoint, and together they cover every cell.
void validate_pattern(const Pattern& p);

enum class Mode { square, rectangular };

struct PartialMatrix {
    Pattern pattern;
    Mode mode = Mode::square;
};

// mode: nullopt infers square iff rows == cols. Forcing square on a
// non-square pattern throws; forcing rectangular is always allowed (a square
// matrix then goes through the pseudoinverse path).
PartialMatrix make_partial(Pattern pattern, std::optional<Mode> mode = std::nullopt);

Matrix assemble(const PartialMatrix& pm, const std::vector<double>& x);

// log|det| (square) or log det of the positive polar factor (rectangular).
// Throws SingularError/RankError at infeasible points.
double objective(const PartialMatrix& pm, const std::vector<double>& x);

// Component per class c: sum over (i,j) in c of [inv]_{j,i}, where inv is the
// inverse (square) or the full-row-rank pseudoinverse (rectangular).
std::vector<double> gradient(const PartialMatrix& pm, const std::vector<double>& x);

struct ResidualEntry {
    Position pos;   // unknown position (i,j), original orientation
    double value;   // (pseudo)inverse entry at the transposed position (j,i)
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    std::size_t zero_count = 0;   // entries of the (pseudo)inverse below threshold
    double zero_threshold = 0.0;  // 1e-9 x (1 + max|inv entry|)
};

ResidualReport residual_report(const PartialMatrix& pm, const std::vector<double>& x);

// k x k Jacobian of the gradient. Square mode: analytic
// H(c,c') = -sum_{(i,j) in c} sum_{(l,m) in c'} inv(j,l) inv(m,i).
// Rectangular mode: central finite differences of the analytic gradient with
// per-coordinate step 1e-6 x (1+|x_c|).
Matrix newton_matrix(const PartialMatrix& pm, const std::vector<double>& x);

struct Evaluation;

// newton_matrix reusing an existing evaluation's inverse (square mode); the
// rectangular path still probes by finite differences around x.
Matrix newton_matrix_with(const PartialMatrix& pm, const std::vector<double>& x,
                          const Evaluation& ev);

struct PrecheckResult {
    bool single_row = false;  // all unknowns in one row
    bool single_col = false;  // all unknowns in one column
    // Singleton classes whose determinant slope (their cofactor) contains no
    // other unknowns and is nonzero: the determinant is affine in that
    // variable with constant nonzero slope, so no stationary point exists
    // along it.
    std::vector<std::size_t> constant_slope_classes;
    bool clear() const {
        return !single_row && !single_col && constant_slope_classes.empty();
    }
};

// Square mode only; rectangular and fully specified patterns come back clear.
PrecheckResult structural_precheck(const PartialMatrix& pm);

struct NormalizedRect {
    PartialMatrix pm;
    bool transposed = false;
};

// Rectangular patterns with rows > cols are transposed (positions swapped,
// class structure preserved) so evaluation can assume rows <= cols. The
// unknown vector x is orientation-independent.
NormalizedRect normalize_rect(const PartialMatrix& pm);

// One-stop evaluation used by the solvers; nullopt at any infeasible or
// non-finite point instead of throwing.
struct Evaluation {
    Matrix sigma;                  // original orientation
    Matrix inv;                    // inverse or pseudoinverse, original orientation
    double objective = 0.0;
    std::vector<double> gradient;
    double grad_inf = 0.0;
    // Scale factor turning the gradient into the polynomial residual
    // p = scale_det * gradient: det(sigma) when square, det(sigma sigma^T)
    // when rectangular.
    double scale_det = 0.0;
    // Distance-from-singularity ratio the solvers test against the
    // singular_guard: |det|/prod(row norms) when square,
    // lambda_min/lambda_max of sigma sigma^T when rectangular.
    double feas_ratio = 0.0;
};

std::optional<Evaluation> try_evaluate(const PartialMatrix& pm,
                                       const std::vector<double>& x);

}  // namespace pmc
