#include "crimesim/analysis.hpp"

#include "crimesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace crimesim::analysis {

namespace {

// Minimizes ||J x - r|| for a column-major m x k design by Householder QR.
// Throws FitError when a diagonal entry of R vanishes relative to the largest.
std::vector<double> least_squares(std::vector<double> j, std::size_t m, std::size_t k, std::vector<double> r) {
    std::vector<double> diag(k);
    for (std::size_t c = 0; c < k; ++c) {
        double* col = j.data() + c * m;
        double norm = 0.0;
        for (std::size_t i = c; i < m; ++i) norm += col[i] * col[i];
        norm = std::sqrt(norm);
        const double alpha = col[c] > 0.0 ? -norm : norm;
        diag[c] = alpha;
        if (norm == 0.0) continue;
        col[c] -= alpha;
        double vnorm = 0.0;
        for (std::size_t i = c; i < m; ++i) vnorm += col[i] * col[i];
        if (vnorm == 0.0) continue;
        auto reflect = [&](double* v) {
            double dot = 0.0;
            for (std::size_t i = c; i < m; ++i) dot += col[i] * v[i];
            const double f = 2.0 * dot / vnorm;
            for (std::size_t i = c; i < m; ++i) v[i] -= f * col[i];
        };
        for (std::size_t c2 = c + 1; c2 < k; ++c2) reflect(j.data() + c2 * m);
        reflect(r.data());
    }
    double largest = 0.0;
    for (double d : diag) largest = std::max(largest, std::abs(d));
    for (std::size_t c = 0; c < k; ++c)
        if (!(std::abs(diag[c]) > 1e-12 * largest)) throw FitError("rank-deficient least-squares design");
    std::vector<double> x(k);
    for (std::size_t c = k; c-- > 0;) {
        double s = r[c];
        for (std::size_t c2 = c + 1; c2 < k; ++c2) s -= j[c2 * m + c] * x[c2];
        x[c] = s / diag[c];
    }
    return x;
}

void require_points(std::span<const DataPoint> pts, std::size_t minimum, bool distinct) {
    std::set<double> xs;
    for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw FitError("data contain non-finite values");
        xs.insert(p.x);
    }
    if (pts.size() < minimum) throw FitError("need at least " + std::to_string(minimum) + " data points");
    if (distinct && xs.size() != pts.size()) throw FitError("abscissae must be distinct");
}

double exp_ssr(std::span<const DataPoint> pts, double a, double b, double c) {
    double s = 0.0;
    for (const auto& p : pts) {
        const double r = a * std::exp(b * p.x) + c - p.y;
        s += r * r;
    }
    return s;
}

}  // namespace

double FitResult::evaluate(double x) const {
    if (model == FitModel::Exponential) return coefficients[0] * std::exp(coefficients[1] * x) + coefficients[2];
    return coefficients[0] + coefficients[1] * x + coefficients[2] * x * x;
}

FitResult fit_hotspot_count(std::span<const DataPoint> pts) {
    require_points(pts, 4, true);
    const std::size_t m = pts.size();
    FitResult fit;
    fit.model = FitModel::Exponential;

    // Start: c at the smallest observation, (log a, b) by linear regression
    // over the points strictly above it.
    double c = pts[0].y;
    for (const auto& p : pts) c = std::min(c, p.y);
    std::vector<DataPoint> logs;
    for (const auto& p : pts)
        if (p.y - c > 0.0) logs.push_back({p.x, std::log(p.y - c)});
    std::set<double> log_xs;
    for (const auto& p : logs) log_xs.insert(p.x);
    if (log_xs.size() < 2) {
        double mean = 0.0;
        for (const auto& p : pts) mean += p.y;
        mean /= static_cast<double>(m);
        fit.coefficients = {0.0, 0.0, mean};
        fit.degenerate = true;
        fit.residual_norm = std::sqrt(exp_ssr(pts, 0.0, 0.0, mean));
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : logs) {
        sx += p.x;
        sy += p.y;
        sxx += p.x * p.x;
        sxy += p.x * p.y;
    }
    const double k = static_cast<double>(logs.size());
    double b = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    double a = std::exp((sy - b * sx) / k);

    constexpr int max_iters = 100;
    double ssr = exp_ssr(pts, a, b, c);
    bool converged = false;
    int it = 0;
    for (; it < max_iters && !converged; ++it) {
        std::vector<double> jac(3 * m), res(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double e = std::exp(b * pts[i].x);
            jac[i] = e;
            jac[m + i] = a * pts[i].x * e;
            jac[2 * m + i] = 1.0;
            res[i] = pts[i].y - (a * e + c);
        }
        std::vector<double> delta;
        try {
            delta = least_squares(std::move(jac), m, 3, std::move(res));
        } catch (const FitError&) {
            throw FitError("Gauss-Newton Jacobian became rank deficient (a = " + std::to_string(a) +
                           ", b = " + std::to_string(b) + ")");
        }
        double step = 1.0;
        bool improved = false;
        double na = a, nb = b, nc = c, nssr = ssr;
        for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
            na = a + step * delta[0];
            nb = b + step * delta[1];
            nc = c + step * delta[2];
            nssr = exp_ssr(pts, na, nb, nc);
            if (std::isfinite(nssr) && nssr <= ssr) {
                improved = true;
                break;
            }
        }
        const double rel = std::max({std::abs(step * delta[0]) / (std::abs(a) + 1e-300),
                                     std::abs(step * delta[1]) / (std::abs(b) + 1e-300),
                                     std::abs(step * delta[2]) / (std::abs(c) + 1e-300)});
        if (!improved) {
            converged = true;  // no descent left along the Gauss-Newton direction
            break;
        }
        a = na;
        b = nb;
        c = nc;
        const double drop = ssr - nssr;
        ssr = nssr;
        if (rel < 1e-13 || drop <= 1e-15 * ssr || ssr == 0.0) converged = true;
    }
    if (!converged) throw FitError("Gauss-Newton did not converge in " + std::to_string(max_iters) + " iterations");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) throw FitError("fit diverged");
    fit.coefficients = {a, b, c};
    fit.iterations = it;
    fit.residual_norm = std::sqrt(ssr);
    return fit;
}

FitResult fit_hotspot_diameter(std::span<const DataPoint> pts) {
    require_points(pts, 3, false);
    const std::size_t m = pts.size();
    std::vector<double> design(3 * m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        design[i] = 1.0;
        design[m + i] = pts[i].x;
        design[2 * m + i] = pts[i].x * pts[i].x;
        rhs[i] = pts[i].y;
    }
    FitResult fit;
    fit.model = FitModel::Quadratic;
    fit.coefficients = least_squares(std::move(design), m, 3, std::move(rhs));
    double ssr = 0.0;
    for (const auto& p : pts) {
        const double r = fit.evaluate(p.x) - p.y;
        ssr += r * r;
    }
    fit.residual_norm = std::sqrt(ssr);
    return fit;
}

}  // namespace crimesim::analysis
