#pragma once

#include "crimesim/mesh.hpp"
#include "crimesim/pde.hpp"

#include <optional>
#include <span>
#include <vector>

namespace crimesim::analysis {

struct HotspotReport {
    int count = 0;
    std::vector<double> diameters;  ///< equivalent-circle diameters, 2 sqrt(area / pi)
    std::vector<double> areas;
    double threshold_used = 0.0;
    std::vector<std::vector<int>> components;  ///< node sets, ascending by smallest node

    double mean_diameter() const;
};

/// Nodes above baseline + (max - baseline) / 2, grouped into connected
/// components of the mesh node graph; components of one node are dropped.
/// A field whose maximum does not exceed baseline + min_rise has none.
HotspotReport detect_hotspots(std::span<const double> field, const Mesh& mesh, double baseline,
                              double min_rise = 0.0);

/// Declares the pattern emerged once the hotspot count has been the same for
/// `window` consecutive observations.
class EmergenceDetector {
public:
    explicit EmergenceDetector(int window = 10) : window_(window) {}
    /// Returns true once the stability window is met (and stays true).
    bool observe(int count);
    bool emerged() const noexcept { return emerged_; }

private:
    int window_;
    int last_ = -1;
    int run_ = 0;
    bool emerged_ = false;
};

struct DataPoint {
    double x = 0.0;
    double y = 0.0;
};

enum class FitModel { Exponential, Quadratic };

struct FitResult {
    FitModel model = FitModel::Exponential;
    /// Exponential: (a, b, c) of a exp(b x) + c. Quadratic: (c0, c1, c2) of c0 + c1 x + c2 x^2.
    std::vector<double> coefficients;
    double residual_norm = 0.0;
    int iterations = 0;
    bool degenerate = false;  ///< data carried no exponential trend; a = b = 0

    double evaluate(double x) const;
};

/// Least-squares a exp(b x) + c by damped Gauss-Newton. Needs at least four
/// points with distinct x. Throws FitError when the iteration fails.
FitResult fit_hotspot_count(std::span<const DataPoint> points);

/// Least-squares c0 + c1 x + c2 x^2 through Householder QR. Throws FitError on a
/// rank-deficient design.
FitResult fit_hotspot_diameter(std::span<const DataPoint> points);

/// Expected burglaries per element accumulated over consecutive snapshots:
/// theta/omega * dt * sum_n (1 - exp(-mean_Q(A^n) dt)) * int_Q rho^n, with n
/// running over every snapshot except the last.
std::vector<double> burglary_counts(const Mesh& mesh, std::span<const pde::Snapshot> snapshots, double theta_over_omega,
                                    double dt);

struct FieldComparison {
    double l2_difference = 0.0;
    double max_difference = 0.0;
    int hotspot_count_difference = 0;  ///< count(reference) - count(other), baselines at each field's mean
};

/// Compares a field on `reference` with a field on `other` mapped by nearest
/// node. The meshes' bounding boxes must agree within `tolerance`.
FieldComparison compare_fields(const Mesh& reference, std::span<const double> reference_field, const Mesh& other,
                               std::span<const double> other_field, double tolerance = 1e-6);

/// Index of the nearest node of `mesh` for each query point.
std::vector<int> nearest_nodes(const Mesh& mesh, std::span<const Point> queries);

}  // namespace crimesim::analysis
