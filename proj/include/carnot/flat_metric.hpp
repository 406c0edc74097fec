#pragma once

// Flat (bounded-Lipschitz) distance between discrete measures,
//   d0(mu, nu) = sup { sum f (mu - nu) : ||f||_inf + Lip(f) <= 1 },
// with Lipschitz constants taken with respect to the quasi-distance.
//
// For a fixed split alpha = bound on |f|, beta = 1 - alpha, the inner problem
// is the dual of an uncapacitated min-cost flow: transport arcs from positive
// to negative atoms costing beta * d(x, y), plus a ground node reached at cost
// alpha. Its value V(alpha) is concave and piecewise linear, and d0 is its
// maximum over [0, 1], located with cutting planes. The optimizer f is rebuilt
// from the flow potentials by a double c-transform, which satisfies every
// pairwise constraint.

#include <filesystem>
#include <string>
#include <vector>

#include "carnot/grid.hpp"
#include "json.hpp"

namespace carnot {

struct DiscreteMeasure {
  int dim = 0;
  std::vector<double> points;   // size() * dim, row-major
  std::vector<double> weights;  // nonnegative
  double clipped = 0.0;         // negative node mass dropped when built from a field

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int d) : dim(d) {}

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, static_cast<std::size_t>(dim)}; }
  void add(std::span<const double> x, double w);
  double total() const;

  // Node masses value * h^d, dropping nodes with |mass| <= threshold.
  // Negative masses (stencil undershoot) are set to 0 and summed in `clipped`.
  static DiscreteMeasure from_field(const Field& rho, double threshold = 1e-12);
  // Aggregates the node masses of rho onto a coarser grid with multilinear
  // (tent) weights, then thresholds. Total mass is preserved before thresholding.
  static DiscreteMeasure coarsened(const Field& rho, const GridSpec& coarse, double threshold = 1e-12);

  void write_csv(const std::filesystem::path& path) const;
  static DiscreteMeasure read_csv(const std::filesystem::path& path);
};

// The 21^3-style measurement grid: every other node of g (n -> (n+1)/2).
GridSpec measurement_grid(const GridSpec& g);

struct FlatMetricOptions {
  double tolerance = 1e-10;    // stop when upper - lower <= tolerance * max(1, lower)
  int max_cuts = 200;
  std::size_t max_pairs = 40'000'000;  // transport arcs allowed in memory
  long long max_pivots = 0;            // 0 = automatic
};

struct FlatMetricResult {
  double value = 0.0;  // best lower bound V(alpha*)
  double upper = 0.0;  // cutting-plane upper bound
  double alpha = 0.0;
  double beta = 0.0;
  double gap = 0.0;  // (upper - value) + |value - sum f (mu - nu)|
  std::string status = "optimal";  // optimal | not_converged | too_large
  std::vector<double> support;  // combined support, size * dim
  std::vector<double> f;        // optimizer on the combined support
  int cuts = 0;
  long long pivots = 0;

  bool ok() const { return status == "optimal"; }
  nlohmann::json to_json() const;
};

FlatMetricResult flat_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroupSpec& spec,
                               const FlatMetricOptions& opt = {});

// Both fields measured on the measurement grid of their (common) grid.
FlatMetricResult flat_distance_fields(const Field& a, const Field& b, const GroupSpec& spec,
                                      const FlatMetricOptions& opt = {});

struct HolderFit {
  bool degenerate = false;  // all distances (numerically) zero
  double exponent = 0.0;
  double constant = 0.0;
  std::vector<double> lags;
  std::vector<double> distances;

  nlohmann::json to_json() const;
};

// d0 between the first snapshot and later ones, least-squares fit of
// log d0 against log |t - s|. Snapshots carry their time in Field::time.
HolderFit holder_in_time(const std::vector<Field>& trajectory, const GroupSpec& spec,
                         const FlatMetricOptions& opt = {});

}  // namespace carnot
