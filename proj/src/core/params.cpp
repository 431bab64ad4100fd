#include "crimesim/params.hpp"

#include "crimesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crimesim {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void DimensionalParams::validate() const {
    require(theta >= 0.0, "theta must be nonnegative");
    require(omega >= 0.0, "omega must be nonnegative");
    require(gamma >= 0.0, "Gamma must be nonnegative");
    require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0,1]");
    require(a_static >= 0.0, "static attractiveness must be nonnegative");
    require(lattice_h > 0.0, "lattice spacing must be positive");
    require(dt > 0.0, "time step must be positive");
}

Coefficient Coefficient::nodal(std::vector<double> values) {
    require(all_finite(values), "coefficient values must be finite");
    Coefficient c;
    c.kind_ = Kind::Nodal;
    c.values_ = std::move(values);
    return c;
}

Coefficient Coefficient::cellwise(std::vector<double> values) {
    require(all_finite(values), "coefficient values must be finite");
    Coefficient c;
    c.kind_ = Kind::Cellwise;
    c.values_ = std::move(values);
    return c;
}

double Coefficient::value() const {
    if (kind_ != Kind::Constant) throw ParameterError("coefficient is not spatially constant");
    return constant_;
}

double Coefficient::min() const {
    if (kind_ == Kind::Constant) return constant_;
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double Coefficient::max() const {
    if (kind_ == Kind::Constant) return constant_;
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

void NondimParams::validate() const {
    require(eta.min() >= 0.0 && eta.max() <= 1.0, "eta values must lie in [0,1]");
    require(a_st.min() >= 0.0, "A_st must be nonnegative");
    require(source.min() >= 0.0, "source must be nonnegative");
    require(theta_over_omega >= 0.0, "theta/omega must be nonnegative");
}

void NoiseSpec::validate() const {
    require(sigma_b >= 0.0 && sigma_rho >= 0.0, "noise standard deviations must be nonnegative");
    require(delta_b >= 0.0 && delta_b <= 1.0, "delta_B must lie in [0,1]");
    require(delta_rho >= 0.0 && delta_rho <= 1.0, "delta_rho must lie in [0,1]");
}

NondimParams nondimensionalize(const DimensionalParams& p) {
    if (!(p.omega > 0.0)) throw ParameterError("omega must be positive to nondimensionalize");
    p.validate();

    NondimParams out;
    out.eta = p.eta;
    out.a_st = p.a_static / p.omega;
    out.source = p.gamma * p.theta / (p.omega * p.omega);
    out.theta_over_omega = p.theta / p.omega;
    out.diffusivity = p.lattice_h * p.lattice_h / p.dt;
    out.length_scale = std::sqrt(out.diffusivity / p.omega);
    out.epsilon = p.theta * p.dt;
    out.gamma_density = p.gamma / (p.lattice_h * p.lattice_h);
    return out;
}

EquilibriumState equilibrium(double a_st, double source) {
    EquilibriumState eq;
    eq.B_bar = source;
    eq.A_bar = a_st + source;
    if (eq.A_bar == 0.0) throw ParameterError("equilibrium attractiveness is zero");
    eq.rho_bar = eq.B_bar / eq.A_bar;
    return eq;
}

EquilibriumState equilibrium(const NondimParams& params) {
    if (!params.a_st.is_constant() || !params.source.is_constant())
        throw ParameterError("equilibrium requires spatially constant A_st and source");
    return equilibrium(params.a_st.value(), params.source.value());
}

bool instability_predicate(const NondimParams& params) {
    const EquilibriumState eq = equilibrium(params);
    const double a_st = params.a_st.value();
    const double eta = params.eta.value();
    const double bound = (3.0 * eq.rho_bar + 1.0 - std::sqrt(12.0 * eq.rho_bar)) / eq.A_bar;
    return eq.B_bar > 0.5 * a_st && eta < bound;
}

}  // namespace crimesim
