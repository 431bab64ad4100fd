#pragma once

#include "crimesim/mesh.hpp"
#include "crimesim/params.hpp"

#include <cstdint>
#include <vector>

namespace crimesim::profiles {

/// One value per element, chosen by the element centroid's vertical
/// coordinate: 0.9 below 4, 0.3 below 8, 0.12 below 12, 0.03 above.
Coefficient piecewise_eta(const Mesh& mesh);

/// Per-node indicator equal to 1 with probability delta, from a stream
/// seeded by (seed, salt).
std::vector<double> random_indicator(const Mesh& mesh, double delta, std::uint64_t seed, std::uint64_t salt);

/// Static attractiveness and source (which doubles as the initial B) of a
/// highway scenario, both nodal.
struct HighwayFields {
    Coefficient a_st;
    Coefficient source;
};

/// Square [0,l]^2 with a ridge exp(-20 (x0 + x1 - l)^2) restricted to
/// x0 > l/2, x1 < l/2:
///   A_st = ridge / 30 + 1/30,  source = ridge + chi_0.1.
HighwayFields highway_square(const Mesh& mesh, double l, std::uint64_t seed);

/// Highway through the embedded city geometry in [0,24]^2: the ridge runs
/// along x1 = 20.8 for x0 < 9.5 and along x1 = 32.4923 - (16/13) x0 beyond.
HighwayFields highway_city(const Mesh& mesh, std::uint64_t seed);

/// Irregular all-quad mesh of a city-shaped region inside [0,24]^2: a
/// masked Cartesian grid restricted to a fixed outline, reduced to its
/// largest edge-connected piece, with interior nodes jittered by up to 20%
/// of the spacing. Node count is close to `target_nodes`.
Mesh city_mesh(int target_nodes, std::uint64_t seed);

/// Outline used by city_mesh, counter-clockwise.
const std::vector<Point>& city_outline();

}  // namespace crimesim::profiles
