#pragma once

// Standard data: smooth bumps built from the mollifier profile.

#include "carnot/grid.hpp"

namespace carnot {

// e xi(delta_{1/r} x): height 1 at the origin, support the ball of radius r.
double gauge_bump(const GroupSpec& spec, std::span<const double> x, double radius);

Field bump_field(const GridPtr& grid, const GroupSpec& spec, double radius, double height = 1.0);
// Bump normalized to unit grid mass.
Field probability_bump(const GridPtr& grid, const GroupSpec& spec, double radius);

}  // namespace carnot
