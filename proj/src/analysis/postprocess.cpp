#include "crimesim/analysis.hpp"

#include "crimesim/element.hpp"
#include "crimesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace crimesim::analysis {

std::vector<double> burglary_counts(const Mesh& mesh, std::span<const pde::Snapshot> snapshots,
                                    double theta_over_omega, double dt) {
    if (!(theta_over_omega >= 0.0)) throw ParameterError("theta/omega must be nonnegative");
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        if (snapshots[k].A.size() != mesh.node_count() || snapshots[k].rho.size() != mesh.node_count())
            throw ParameterError("snapshot " + std::to_string(k) + " does not match the mesh");
        if (k > 0 && snapshots[k].step != snapshots[k - 1].step + 1)
            throw ParameterError("burglary counts need a snapshot at every step (found step " +
                                 std::to_string(snapshots[k - 1].step) + " followed by " +
                                 std::to_string(snapshots[k].step) + "); rerun with output.every = 1");
    }

    const auto rule = fem::QuadratureRule::gauss(2);
    std::vector<double> counts(mesh.quad_count(), 0.0);
    if (snapshots.size() < 2 || theta_over_omega == 0.0) return counts;

    std::vector<fem::PointGeometry> geo;
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        geo.clear();
        for (const auto& pt : rule.points) geo.push_back(fem::map_reference_point(mesh, e, pt[0], pt[1]));
        const Quad& quad = mesh.quad(e);
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
            double int_a = 0.0, int_rho = 0.0, area = 0.0;
            for (std::size_t q = 0; q < geo.size(); ++q) {
                const double jxw = geo[q].det_j * rule.weights[q];
                double aq = 0.0, rq = 0.0;
                for (int i = 0; i < 4; ++i) {
                    aq += geo[q].phi[i] * snapshots[k].A[quad[i]];
                    rq += geo[q].phi[i] * snapshots[k].rho[quad[i]];
                }
                int_a += aq * jxw;
                int_rho += rq * jxw;
                area += jxw;
            }
            total += -std::expm1(-(int_a / area) * dt) * int_rho;
        }
        counts[e] = theta_over_omega * dt * total;
    }
    return counts;
}

std::vector<int> nearest_nodes(const Mesh& mesh, std::span<const Point> queries) {
    const auto box = mesh.bounding_box();
    const std::size_t n = mesh.node_count();
    const double wx = std::max(box[1].x - box[0].x, 1e-300);
    const double wy = std::max(box[1].y - box[0].y, 1e-300);
    const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
    const double cx = wx / g, cy = wy / g;
    auto cell_of = [&](Point p) {
        const int i = std::clamp(static_cast<int>((p.x - box[0].x) / cx), 0, g - 1);
        const int j = std::clamp(static_cast<int>((p.y - box[0].y) / cy), 0, g - 1);
        return std::pair{i, j};
    };
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(g) * g);
    for (std::size_t v = 0; v < n; ++v) {
        const auto [i, j] = cell_of(mesh.node(v));
        buckets[static_cast<std::size_t>(j) * g + i].push_back(static_cast<int>(v));
    }

    std::vector<int> out(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const Point p = queries[q];
        const auto [ci, cj] = cell_of(p);
        double best = std::numeric_limits<double>::infinity();
        int best_node = -1;
        for (int r = 0; r <= g; ++r) {
            for (int j = cj - r; j <= cj + r; ++j)
                for (int i = ci - r; i <= ci + r; ++i) {
                    if (i < 0 || j < 0 || i >= g || j >= g) continue;
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
                    for (int v : buckets[static_cast<std::size_t>(j) * g + i]) {
                        const double dx = mesh.node(v).x - p.x, dy = mesh.node(v).y - p.y;
                        const double d = dx * dx + dy * dy;
                        if (d < best || (d == best && v < best_node)) {
                            best = d;
                            best_node = v;
                        }
                    }
                }
            // Every unvisited bucket is at least r cells away from the query's cell.
            const double reach = r * std::min(cx, cy);
            if (best_node >= 0 && best <= reach * reach) break;
        }
        out[q] = best_node;
    }
    return out;
}

FieldComparison compare_fields(const Mesh& reference, std::span<const double> reference_field, const Mesh& other,
                               std::span<const double> other_field, double tolerance) {
    if (reference_field.size() != reference.node_count() || other_field.size() != other.node_count())
        throw ParameterError("field lengths do not match their meshes");
    const auto ba = reference.bounding_box();
    const auto bb = other.bounding_box();
    const double mismatch = std::max({std::abs(ba[0].x - bb[0].x), std::abs(ba[0].y - bb[0].y),
                                      std::abs(ba[1].x - bb[1].x), std::abs(ba[1].y - bb[1].y)});
    if (mismatch > tolerance)
        throw ParameterError("meshes cover different domains (bounding boxes differ by " + std::to_string(mismatch) +
                             ")");

    const auto map = nearest_nodes(other, reference.nodes());
    const auto areas = nodal_areas(reference);
    FieldComparison c;
    double l2 = 0.0;
    for (std::size_t i = 0; i < reference_field.size(); ++i) {
        const double d = reference_field[i] - other_field[map[i]];
        l2 += areas[i] * d * d;
        c.max_difference = std::max(c.max_difference, std::abs(d));
    }
    c.l2_difference = std::sqrt(l2);
    auto mean = [](std::span<const double> v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    c.hotspot_count_difference = detect_hotspots(reference_field, reference, mean(reference_field)).count -
                                 detect_hotspots(other_field, other, mean(other_field)).count;
    return c;
}

}  // namespace crimesim::analysis
