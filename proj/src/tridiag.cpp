#include "levystop/tridiag.hpp"

#include <cmath>
#include <string>

#include "levystop/errors.hpp"

namespace levystop {

long first_non_m_row(const Tridiagonal& m) {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = i > 0 ? m.lower[i] : 0.0;
        const double up = i + 1 < n ? m.upper[i] : 0.0;
        if (!(m.diag[i] > 0.0) || lo > 0.0 || up > 0.0 || m.diag[i] + lo + up < 0.0) return static_cast<long>(i);
    }
    return -1;
}

void thomas_solve(const Tridiagonal& m, std::span<double> rhs, std::vector<double>& c) {
    const std::size_t n = m.size();
    if (rhs.size() != n) throw ParameterError("thomas_solve: size mismatch");
    if (n == 0) return;
    c.resize(n);
    double piv = m.diag[0];
    if (piv == 0.0 || !std::isfinite(piv)) throw NumericalError("thomas_solve: zero pivot at row 0");
    c[0] = m.upper[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = m.diag[i] - m.lower[i] * c[i - 1];
        if (piv == 0.0 || !std::isfinite(piv)) throw NumericalError("thomas_solve: zero pivot at row " + std::to_string(i));
        c[i] = i + 1 < n ? m.upper[i] / piv : 0.0;
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

}  // namespace levystop
