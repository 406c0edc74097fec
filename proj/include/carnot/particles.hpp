#pragma once

// Euler-Maruyama particle system for
//   d xi = -sum_i b_i a_i(xi) dt + sqrt(2 sigma) sum_j a_j(xi) dB_j,
// whose law solves the Fokker-Planck equation. Particles leaving B_R (or the
// interior of the box) are removed. Every particle draws from its own
// generator seeded by (seed, index), so results do not depend on the number
// of worker threads.

#include <cstdint>
#include <vector>

#include "carnot/fokker_planck.hpp"

namespace carnot {

struct ParticleOptions {
  std::size_t count = 100000;
  std::uint64_t seed = 1;
  double sigma = 0.25;
  double horizon = 0.5;
  double dt = 0.0025;
  double radius = 1.8;
  int jobs = 1;
};

struct ParticleState {
  std::vector<double> positions;  // count * d
  std::vector<char> alive;
};

// Evolves given starting points (count * d, row-major).
ParticleState simulate_particles(const GroupSpec& spec, const GridSpec& box, std::vector<double> starts,
                                 const DriftField& b, const ParticleOptions& opt);

struct ParticleResult {
  Field density;  // cloud-in-cell histogram / (count * h^d)
  std::size_t alive = 0;
  std::size_t removed = 0;

  nlohmann::json to_json() const;
};

// Samples starts from the piecewise-multilinear density behind rho0, evolves
// them and bins the survivors on rho0's grid.
ParticleResult particle_oracle(const GroupSpec& spec, const Field& rho0, const DriftField& b,
                               const ParticleOptions& opt);

}  // namespace carnot
