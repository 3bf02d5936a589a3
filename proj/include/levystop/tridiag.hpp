#pragma once

#include <span>
#include <vector>

namespace levystop {

/// Tridiagonal matrix stored by diagonals. lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }
};

/// Row index where the matrix fails to be a (weakly diagonally dominant)
/// M-matrix, or -1. Such a matrix has a nonnegative inverse, which is what
/// makes the implicit step monotone.
long first_non_m_row(const Tridiagonal& m);

/// Solves m·x = rhs in place by the Thomas algorithm. `scratch` is resized
/// as needed. Throws NumericalError on a vanishing pivot.
void thomas_solve(const Tridiagonal& m, std::span<double> rhs, std::vector<double>& scratch);

}  // namespace levystop
