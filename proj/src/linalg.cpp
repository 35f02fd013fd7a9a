#include "swq/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace swq::linalg {

bool lu_solve(std::vector<double>& A, std::vector<double>& b, size_t n, double tol) {
    if (A.size() != n * n || b.size() != n) throw std::invalid_argument("lu_solve: bad shapes");
    double amax = 0.0;
    for (double v : A) amax = std::max(amax, std::fabs(v));
    if (amax == 0.0) return false;
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;

    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        double best = std::fabs(A[perm[col] * n + col]);
        for (size_t r = col + 1; r < n; ++r) {
            double v = std::fabs(A[perm[r] * n + col]);
            if (v > best) { best = v; piv = r; }
        }
        if (best <= tol * amax) return false;
        std::swap(perm[col], perm[piv]);
        const size_t pr = perm[col];
        const double pivot = A[pr * n + col];
        for (size_t r = col + 1; r < n; ++r) {
            const size_t rr = perm[r];
            const double f = A[rr * n + col] / pivot;
            if (f == 0.0) continue;
            A[rr * n + col] = f;  // store multiplier
            for (size_t c = col + 1; c < n; ++c) A[rr * n + c] -= f * A[pr * n + c];
            b[rr] -= f * b[pr];
        }
    }
    // back substitution
    std::vector<double> x(n);
    for (size_t i = n; i-- > 0;) {
        const size_t ri = perm[i];
        double acc = b[ri];
        for (size_t c = i + 1; c < n; ++c) acc -= A[ri * n + c] * x[c];
        x[i] = acc / A[ri * n + i];
    }
    b = std::move(x);
    return true;
}

namespace {

// Dense two-phase simplex with Bland's rule.
//   max c.x  s.t.  T x = rhs (rhs >= 0), x >= 0
// Returns the optimum; +inf if unbounded.  Small problems only.
double simplex_max(std::vector<std::vector<double>> T, std::vector<double> rhs,
                   std::vector<double> obj) {
    const size_t m = T.size();
    const size_t n0 = obj.size();
    constexpr double eps = 1e-9;

    // phase 1: add artificials, minimize their sum
    const size_t n = n0 + m;
    for (size_t i = 0; i < m; ++i) {
        T[i].resize(n, 0.0);
        T[i][n0 + i] = 1.0;
    }
    std::vector<size_t> basis(m);
    for (size_t i = 0; i < m; ++i) basis[i] = n0 + i;

    auto pivot_at = [&](size_t row, size_t col) {
        double p = T[row][col];
        for (size_t c = 0; c < n; ++c) T[row][c] /= p;
        rhs[row] /= p;
        for (size_t r = 0; r < m; ++r) {
            if (r == row) continue;
            double f = T[r][col];
            if (f == 0.0) continue;
            for (size_t c = 0; c < n; ++c) T[r][c] -= f * T[row][c];
            rhs[r] -= f * rhs[row];
        }
        basis[row] = col;
    };

    auto run = [&](const std::vector<double>& cost, size_t ncols) -> bool {
        // returns false if unbounded; Bland's rule: smallest eligible indices
        for (;;) {
            // compute z_j - c_j for each column directly (small problems)
            size_t enter = SIZE_MAX;
            for (size_t j = 0; j < ncols; ++j) {
                double zj = 0.0;
                for (size_t r = 0; r < m; ++r) zj += cost[basis[r]] * T[r][j];
                if (cost[j] - zj > eps) { enter = j; break; }
            }
            if (enter == SIZE_MAX) return true;  // optimal
            size_t leave = SIZE_MAX;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (size_t r = 0; r < m; ++r) {
                if (T[r][enter] > eps) {
                    double ratio = rhs[r] / T[r][enter];
                    if (ratio < best_ratio - 1e-15 ||
                        (ratio < best_ratio + 1e-15 &&
                         (leave == SIZE_MAX || basis[r] < basis[leave]))) {
                        best_ratio = ratio;
                        leave = r;
                    }
                }
            }
            if (leave == SIZE_MAX) return false;  // unbounded
            pivot_at(leave, enter);
        }
    };

    std::vector<double> phase1(n, 0.0);
    for (size_t j = n0; j < n; ++j) phase1[j] = -1.0;  // max -(sum artificials)
    run(phase1, n);
    double art = 0.0;
    for (size_t r = 0; r < m; ++r)
        if (basis[r] >= n0) art += rhs[r];
    if (art > 1e-7) throw std::runtime_error("simplex: infeasible program");
    // drive leftover degenerate artificials out of the basis when possible
    for (size_t r = 0; r < m; ++r) {
        if (basis[r] >= n0) {
            for (size_t j = 0; j < n0; ++j) {
                if (std::fabs(T[r][j]) > eps) { pivot_at(r, j); break; }
            }
        }
    }

    std::vector<double> phase2(n, 0.0);
    for (size_t j = 0; j < n0; ++j) phase2[j] = obj[j];
    if (!run(phase2, n0)) return std::numeric_limits<double>::infinity();
    double val = 0.0;
    for (size_t r = 0; r < m; ++r)
        if (basis[r] < n0) val += obj[basis[r]] * rhs[r];
    return val;
}

}  // namespace

double hull_scale(const std::vector<std::vector<double>>& points,
                  const std::vector<double>& target) {
    if (points.empty()) throw std::invalid_argument("hull_scale: no points");
    const size_t J = target.size();
    double tmax = 0.0;
    for (double v : target) tmax = std::max(tmax, std::fabs(v));
    if (tmax == 0.0) return std::numeric_limits<double>::infinity();

    const size_t m = points.size();
    // variables: alpha_0..alpha_{m-1}, e, surplus_0..surplus_{J-1}
    const size_t ncols = m + 1 + J;
    std::vector<std::vector<double>> T;
    std::vector<double> rhs;
    // sum_i alpha_i p_ij - e t_j - surplus_j = 0
    for (size_t j = 0; j < J; ++j) {
        std::vector<double> row(ncols, 0.0);
        for (size_t i = 0; i < m; ++i) row[i] = points[i][j];
        row[m] = -target[j];
        row[m + 1 + j] = -1.0;
        T.push_back(std::move(row));
        rhs.push_back(0.0);
    }
    {
        std::vector<double> row(ncols, 0.0);
        for (size_t i = 0; i < m; ++i) row[i] = 1.0;
        T.push_back(std::move(row));
        rhs.push_back(1.0);
    }
    std::vector<double> obj(ncols, 0.0);
    obj[m] = 1.0;
    return simplex_max(std::move(T), std::move(rhs), std::move(obj));
}

}  // namespace swq::linalg
