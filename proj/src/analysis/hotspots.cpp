#include "crimesim/analysis.hpp"

#include "crimesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crimesim::analysis {

double HotspotReport::mean_diameter() const {
    if (diameters.empty()) return 0.0;
    double s = 0.0;
    for (double d : diameters) s += d;
    return s / static_cast<double>(diameters.size());
}

HotspotReport detect_hotspots(std::span<const double> field, const Mesh& mesh, double baseline, double min_rise) {
    if (field.size() != mesh.node_count()) throw ParameterError("field length does not match mesh");
    for (double v : field)
        if (!std::isfinite(v)) throw ParameterError("field contains non-finite values");
    if (!std::isfinite(baseline)) throw ParameterError("baseline must be finite");
    if (!(min_rise >= 0.0)) throw ParameterError("minimum rise must be nonnegative");

    HotspotReport report;
    const double peak = *std::max_element(field.begin(), field.end());
    report.threshold_used = baseline + 0.5 * (peak - baseline);
    if (!(peak - baseline > min_rise)) return report;

    const std::size_t n = mesh.node_count();
    std::vector<char> mask(n), seen(n, 0);
    for (std::size_t i = 0; i < n; ++i) mask[i] = field[i] > report.threshold_used;
    const auto areas = nodal_areas(mesh);

    std::vector<int> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (!mask[start] || seen[start]) continue;
        std::vector<int> comp;
        stack.assign(1, static_cast<int>(start));
        seen[start] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (int w : mesh.adjacency(v))
                if (mask[w] && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        if (comp.size() < 2) continue;
        std::sort(comp.begin(), comp.end());
        double area = 0.0;
        for (int v : comp) area += areas[v];
        report.areas.push_back(area);
        report.diameters.push_back(2.0 * std::sqrt(area / std::numbers::pi));
        report.components.push_back(std::move(comp));
    }
    report.count = static_cast<int>(report.components.size());
    return report;
}

bool EmergenceDetector::observe(int count) {
    if (count == last_) {
        ++run_;
    } else {
        last_ = count;
        run_ = 1;
    }
    if (run_ >= window_) emerged_ = true;
    return emerged_;
}

}  // namespace crimesim::analysis
