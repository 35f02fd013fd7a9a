#pragma once
// Minimal dense linear algebra for the traffic equations and the hull-margin
// LP.  Matrix sizes here are tiny (<= a few hundred), so a partial-pivot LU
// and a two-phase tableau simplex are all that is needed.

#include <cstddef>
#include <vector>

namespace swq::linalg {

// Solves A x = b, A row-major n*n (overwritten).  Returns false when a pivot
// collapses below tol * max|A| (singular for our purposes).
bool lu_solve(std::vector<double>& A, std::vector<double>& b, size_t n, double tol = 1e-12);

// max e subject to: sum_i alpha_i * points[i][j] >= e * target[j] for all j,
// sum_i alpha_i = 1, alpha >= 0, e >= 0.  This is the largest uniform scale at
// which target stays inside the convex hull of a downward-closed point set.
// Returns +inf (cap) when target is the zero vector; throws on empty input.
double hull_scale(const std::vector<std::vector<double>>& points,
                  const std::vector<double>& target);

}  // namespace swq::linalg
