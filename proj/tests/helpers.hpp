#pragma once

// Shared fixtures: the two 4x4 regression patterns and their known data.

#include <cmath>
#include <vector>

#include "core/partial_matrix.hpp"

namespace fixtures {

// 4x4 symmetric band with the two corner entries tied to one unknown.
inline pmc::Pattern corner_pattern_tied() {
    const double x12 = 4.0 / 929.0, x13 = -15.0 / 929.0;
    const double x23 = -1.0 / 1858.0, x24 = -63.0 / 1858.0, x34 = 2.0 / 929.0;
    pmc::Pattern p;
    p.rows = p.cols = 4;
    auto add = [&](std::size_t i, std::size_t j, double v) {
        p.specified.push_back({{i, j}, v});
    };
    add(0, 0, 120.0 / 929.0);
    add(0, 1, x12);
    add(0, 2, x13);
    add(1, 0, x12);
    add(1, 1, 124.0 / 929.0);
    add(1, 2, x23);
    add(1, 3, x24);
    add(2, 0, x13);
    add(2, 1, x23);
    add(2, 2, 118.0 / 929.0);
    add(2, 3, x34);
    add(3, 1, x24);
    add(3, 2, x34);
    add(3, 3, 126.0 / 929.0);
    p.classes = {{{0, 3}, {3, 0}}};
    return p;
}

inline pmc::Pattern corner_pattern_untied() {
    pmc::Pattern p = corner_pattern_tied();
    p.classes = {{{0, 3}}, {{3, 0}}};
    return p;
}

// Stationary completion of the corner pattern and its inverse.
constexpr double kCornerRoot = -79.0 / 58527.0;
constexpr double kCornerDet = 16.0 / 58527.0;

inline const double* corner_root_inverse() {
    static const double inv[16] = {63.0 / 8,  -0.25,        1,            0,
                                   -0.25,     1009.0 / 126, -2.0 / 63,    2,
                                   1,         -2.0 / 63,    4033.0 / 504, -0.125,
                                   0,         2,            -0.125,       63.0 / 8};
    return inv;
}

// The non-stationary probe value whose inverse is integer with six zeros and
// whose tied gradient is exactly 2.
constexpr double kCornerProbe = -16.0 / 929.0;

inline const double* corner_probe_inverse() {
    static const double inv[16] = {8, 0, 1, 1, 0, 8, 0, 2, 1, 0, 8, 0, 1, 2, 0, 8};
    return inv;
}

// 4x4 with a ring of unknowns at (1,3),(2,4),(3,1),(4,2) (1-based).
inline pmc::Pattern ring_pattern() {
    pmc::Pattern p;
    p.rows = p.cols = 4;
    auto add = [&](std::size_t i, std::size_t j, double v) {
        p.specified.push_back({{i, j}, v});
    };
    add(0, 0, 5);
    add(0, 1, 2);
    add(0, 3, 1);
    add(1, 0, 2);
    add(1, 1, 5);
    add(1, 2, 2);
    add(2, 1, 2);
    add(2, 2, 5);
    add(2, 3, 2);
    add(3, 0, 1);
    add(3, 2, 2);
    add(3, 3, 5);
    p.classes = {{{0, 2}}, {{1, 3}}, {{2, 0}}, {{3, 1}}};
    return p;
}

inline pmc::Pattern ring_pattern_symmetric() {
    pmc::Pattern p = ring_pattern();
    p.classes = {{{0, 2}, {2, 0}}, {{1, 3}, {3, 1}}};
    return p;
}

inline pmc::Pattern ring_pattern_toeplitz() {
    pmc::Pattern p = ring_pattern();
    p.classes = {{{0, 2}, {1, 3}}, {{2, 0}, {3, 1}}};
    return p;
}

inline double ring_a() { return -1.5 * (std::sqrt(13.0) - 5.0); }
inline double ring_b() { return 1.5 * (5.0 + std::sqrt(13.0)); }

// All stationary completions of the ring pattern, x ordered
// ((1,3),(2,4),(3,1),(4,2)).
inline std::vector<std::vector<double>> ring_roots() {
    const double a = ring_a(), b = ring_b();
    return {{-6, -6, -6, -6}, {-3.8, 5, -3.8, 5}, {1, 1, 1, 1},
            {5, -3.8, 5, -3.8}, {5, 5, 5, 5},     {a, a, b, b},
            {b, b, a, a}};
}

inline std::vector<std::vector<double>> ring_roots_symmetric() {
    return {{-6, -6}, {-3.8, 5}, {1, 1}, {5, -3.8}, {5, 5}};
}

inline std::vector<std::vector<double>> ring_roots_toeplitz() {
    const double a = ring_a(), b = ring_b();
    return {{-6, -6}, {1, 1}, {5, 5}, {a, b}, {b, a}};
}

// det of the all-ones ring completion, by cofactor expansion done offline.
constexpr double kRingOnesDet = 363.0;

inline double max_abs_diff(const pmc::Matrix& a, const pmc::Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            m = std::max(m, std::fabs(a(i, j) - b(i, j)));
    return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// Does xs match some member of the list within tol (inf norm)?
inline bool member_of(const std::vector<double>& xs,
                      const std::vector<std::vector<double>>& list, double tol) {
    for (const auto& r : list) {
        if (r.size() != xs.size()) continue;
        double d = 0.0;
        for (std::size_t c = 0; c < r.size(); ++c)
            d = std::max(d, std::fabs(r[c] - xs[c]));
        if (d < tol) return true;
    }
    return false;
}

}  // namespace fixtures
