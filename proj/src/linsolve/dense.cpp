#include "crimesim/krylov.hpp"

#include <cmath>
#include <utility>

namespace crimesim {

std::vector<double> solve_dense(std::vector<double> a, std::span<const double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw ParameterError("dense system dimension mismatch");
    std::vector<double> x(b.begin(), b.end());

    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (!(std::abs(a[piv * n + k]) > 1e-16 * scale))
            throw ParameterError("dense matrix is numerically singular");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            std::swap(x[k], x[piv]);
        }
        const double inv = 1.0 / a[k * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i * n + k] * inv;
            if (f == 0.0) continue;
            a[i * n + k] = f;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            x[i] -= f * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double sum = x[k];
        for (std::size_t j = k + 1; j < n; ++j) sum -= a[k * n + j] * x[j];
        x[k] = sum / a[k * n + k];
    }
    return x;
}

}  // namespace crimesim
