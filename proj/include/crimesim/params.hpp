#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace crimesim {

/// Parameters of the lattice model, in the model's own (dimensional) units.
struct DimensionalParams {
    double theta = 0.0;     ///< attractiveness increment per burglary
    double omega = 0.0;     ///< decay rate of repeat victimization (1/time)
    double gamma = 0.0;     ///< criminal generation rate per site per time
    double eta = 0.0;       ///< neighborhood effect strength, in [0,1]
    double a_static = 0.0;  ///< static attractiveness (constant part)
    double lattice_h = 1.0;
    double dt = 1.0;

    /// Throws ParameterError when an invariant is violated.
    void validate() const;
};

/// A model coefficient that is either a constant, a nodal field (bilinearly
/// interpolated inside elements) or one value per element.
class Coefficient {
public:
    enum class Kind { Constant, Nodal, Cellwise };

    Coefficient() : Coefficient(0.0) {}
    Coefficient(double value) : kind_(Kind::Constant), constant_(value) {}  // NOLINT: implicit on purpose

    static Coefficient constant(double value) { return Coefficient(value); }
    static Coefficient nodal(std::vector<double> values);
    static Coefficient cellwise(std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    bool is_constant() const noexcept { return kind_ == Kind::Constant; }
    /// Only valid for Kind::Constant.
    double value() const;
    std::span<const double> values() const noexcept { return values_; }

    double min() const;
    double max() const;

private:
    Kind kind_;
    double constant_ = 0.0;
    std::vector<double> values_;
};

/// Parameters of the nondimensional continuum model.
struct NondimParams {
    Coefficient eta = 0.0;
    Coefficient a_st = 0.0;
    Coefficient source = 0.0;  ///< Gamma theta / omega^2
    double theta_over_omega = 0.0;

    // Derived scales of the continuum limit; documentation only.
    double diffusivity = 0.0;    ///< D = h^2 / dt
    double length_scale = 0.0;   ///< L = sqrt(D / omega)
    double epsilon = 0.0;        ///< theta * dt
    double gamma_density = 0.0;  ///< Gamma / h^2

    void validate() const;
};

struct NoiseSpec {
    double sigma_b = 0.0;
    double sigma_rho = 0.0;
    double delta_b = 0.0;
    double delta_rho = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Homogeneous steady state of the continuum model.
struct EquilibriumState {
    double A_bar = 0.0;
    double rho_bar = 0.0;
    double B_bar = 0.0;
};

NondimParams nondimensionalize(const DimensionalParams& p);

EquilibriumState equilibrium(double a_st, double source);
/// Requires constant a_st and source.
EquilibriumState equilibrium(const NondimParams& params);

/// Sufficient condition for hotspot-forming instability of the homogeneous
/// state: B > A_st / 2 and eta < (3 rho + 1 - sqrt(12 rho)) / A.
bool instability_predicate(const NondimParams& params);

}  // namespace crimesim
