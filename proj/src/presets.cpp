#include "carnot/presets.hpp"

#include <cmath>
#include <stdexcept>

#include "carnot/mollifier.hpp"

namespace carnot {

double gauge_bump(const GroupSpec& spec, std::span<const double> x, double radius) {
  const auto u = dilate(spec, 1.0 / radius, GroupElement(std::vector<double>(x.begin(), x.end())));
  return std::exp(1.0) * mollifier_profile(spec, u.coords);
}

Field bump_field(const GridPtr& grid, const GroupSpec& spec, double radius, double height) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump_field: radius must be positive");
  return Field::from_function(grid, [&](auto x) { return height * gauge_bump(spec, x, radius); });
}

Field probability_bump(const GridPtr& grid, const GroupSpec& spec, double radius) {
  auto f = bump_field(grid, spec, radius);
  const double m = f.integral();
  if (!(m > 0.0)) throw std::invalid_argument("probability_bump: bump misses every node");
  return (1.0 / m) * f;
}

}  // namespace carnot
