#pragma once

#include <stdexcept>

namespace wwr::detail {

/// Composite Simpson rule with n subintervals (n rounded up to even).
/// Fixed-grid on purpose: evaluation order and point count never depend on
/// the integrand, so results are bit-reproducible.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    if (b == a) return 0.0;
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < n; i += 2) odd += f(a + i * h);
    for (int i = 2; i < n; i += 2) even += f(a + i * h);
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

} // namespace wwr::detail
