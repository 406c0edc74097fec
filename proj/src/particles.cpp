#include "carnot/particles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace carnot {

namespace {

std::mt19937_64 particle_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return std::mt19937_64(seq);
}

struct Dynamics {
  int d, m;
  std::vector<CompiledPolynomial> a;  // m * d
  std::vector<double> lo, hi;         // box interior
  double radius;
  const GroupSpec& spec;

  Dynamics(const GroupSpec& s, const GridSpec& box, double R) : d(s.dim()), m(s.horizontal_dim()), radius(R), spec(s) {
    if (box.dim() != d) throw std::invalid_argument("particles: box/group dimension mismatch");
    const auto X = left_invariant_fields(s);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < d; ++k) a.emplace_back(X[i].coeffs[k]);
    for (int k = 0; k < d; ++k) {
      lo.push_back(box.lower()[k] + box.spacing(k));
      hi.push_back(box.upper()[k] - box.spacing(k));
    }
  }

  bool inside(std::span<const double> x) const {
    for (int k = 0; k < d; ++k)
      if (!(x[k] >= lo[k] && x[k] <= hi[k])) return false;
    return spec.hom_norm(x) < radius;
  }
};

template <class StartFn>
ParticleState run(const GroupSpec& spec, const GridSpec& box, std::size_t count, const StartFn& start,
                  const DriftField& b, const ParticleOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.horizon > 0.0)) throw std::invalid_argument("particles: dt and horizon must be positive");
  if (opt.sigma < 0.0) throw std::invalid_argument("particles: sigma must be nonnegative");
  if (b.components() != spec.horizontal_dim()) throw std::invalid_argument("particles: drift component mismatch");
  const Dynamics dyn(spec, box, opt.radius);
  const int d = dyn.d, m = dyn.m;
  const int steps = std::max(1, static_cast<int>(std::ceil(opt.horizon / opt.dt - 1e-9)));
  const double dt = opt.horizon / steps;
  const double noise = std::sqrt(2.0 * opt.sigma * dt);

  ParticleState st;
  st.positions.assign(count * d, 0.0);
  st.alive.assign(count, 1);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> coeff(m * d), bv(m), dB(m);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t p = begin; p < end; ++p) {
      auto rng = particle_rng(opt.seed, p);
      std::span<double> x(st.positions.data() + p * d, d);
      start(p, rng, x);
      if (!dyn.inside(x)) {
        st.alive[p] = 0;
        continue;
      }
      normal.reset();
      for (int s = 0; s < steps; ++s) {
        for (int j = 0; j < m * d; ++j) coeff[j] = dyn.a[j](x.data());
        b.eval_at(s * dt, x, bv);
        for (int i = 0; i < m; ++i) dB[i] = noise * normal(rng);
        for (int k = 0; k < d; ++k) {
          double v = 0.0;
          for (int i = 0; i < m; ++i) v += -bv[i] * coeff[i * d + k] * dt + coeff[i * d + k] * dB[i];
          x[k] += v;
        }
        if (!dyn.inside(x)) {
          st.alive[p] = 0;
          break;
        }
      }
    }
  };

  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1 || count < 2) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const std::size_t begin = std::min(count, w * chunk), end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return st;
}

}  // namespace

ParticleState simulate_particles(const GroupSpec& spec, const GridSpec& box, std::vector<double> starts,
                                 const DriftField& b, const ParticleOptions& opt) {
  const int d = spec.dim();
  if (starts.size() % d != 0) throw std::invalid_argument("simulate_particles: starts must hold d coordinates each");
  const std::size_t count = starts.size() / d;
  return run(spec, box, count,
             [&](std::size_t p, std::mt19937_64&, std::span<double> x) {
               std::copy_n(starts.begin() + p * d, d, x.begin());
             },
             b, opt);
}

ParticleResult particle_oracle(const GroupSpec& spec, const Field& rho0, const DriftField& b,
                               const ParticleOptions& opt) {
  const auto& g = *rho0.grid;
  const int d = g.dim();
  if (opt.count == 0) throw std::invalid_argument("particle_oracle: need at least one particle");
  std::vector<double> cdf(g.size());
  double total = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (rho0.values[n] < 0.0) throw std::invalid_argument("particle_oracle: negative initial density");
    total += rho0.values[n];
    cdf[n] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("particle_oracle: zero initial mass");

  auto start = [&](std::size_t, std::mt19937_64& rng, std::span<double> x) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double target = u(rng) * total;
    const std::size_t node =
        std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin(), g.size() - 1);
    g.node_coords(node, x);
    // tent-distributed offset: the sampled law is the multilinear interpolant of rho0
    for (int k = 0; k < d; ++k) x[k] += (u(rng) + u(rng) - 1.0) * g.spacing(k);
  };
  const auto st = run(spec, g, opt.count, start, b, opt);

  ParticleResult res;
  res.density = Field(rho0.grid, 1, opt.horizon);
  const double w = 1.0 / (static_cast<double>(opt.count) * g.cell_volume());
  for (std::size_t p = 0; p < opt.count; ++p) {
    if (!st.alive[p]) {
      ++res.removed;
      continue;
    }
    ++res.alive;
    deposit(g, std::span<const double>(st.positions.data() + p * d, d), w, res.density.values);
  }
  return res;
}

nlohmann::json ParticleResult::to_json() const { return {{"alive", alive}, {"removed", removed}}; }

}  // namespace carnot
