#pragma once

// Cartesian grids over boxes, sampled fields, the truncation ball B_R and
// solver parameters. Field dumps are CSV + JSON sidecar and round-trip exactly.

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "carnot/group.hpp"

namespace carnot {

class GridSpec {
 public:
  GridSpec(std::vector<double> lower, std::vector<double> upper, std::vector<int> nodes);
  // Cube [lo, hi]^d with n nodes per axis.
  static GridSpec cube(int d, double lo, double hi, int n);

  int dim() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<int>& nodes() const { return nodes_; }
  double spacing(int axis) const { return h_[axis]; }
  const std::vector<double>& spacings() const { return h_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  double cell_volume() const { return cell_volume_; }

  // Node coordinate along an axis. Computed symmetrically about the box centre
  // so that reflections of a centred box map nodes to nodes exactly.
  double coord(int axis, int i) const { return centre_[axis] + (i - half_[axis]) * h_[axis]; }
  void index_to_multi(std::size_t idx, std::span<int> multi) const;
  std::size_t multi_to_index(std::span<const int> multi) const;
  void node_coords(std::size_t idx, std::span<double> x) const;
  bool on_boundary(std::size_t idx) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_ && a.nodes_ == b.nodes_;
  }

 private:
  std::vector<double> lower_, upper_, h_, centre_, half_;
  std::vector<int> nodes_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
  double cell_volume_ = 1.0;
};

using GridPtr = std::shared_ptr<const GridSpec>;
GridPtr make_grid(GridSpec spec);

// Scalar (components == 1) or m-vector field sampled at grid nodes, node-major.
struct Field {
  GridPtr grid;
  int components = 1;
  std::vector<double> values;
  double time = 0.0;

  Field() = default;
  Field(GridPtr g, int comps = 1, double t = 0.0);
  static Field from_function(GridPtr g, const std::function<double(std::span<const double>)>& f, double t = 0.0);

  std::size_t size() const { return grid->size(); }
  double& at(std::size_t node, int c = 0) { return values[node * components + c]; }
  double at(std::size_t node, int c = 0) const { return values[node * components + c]; }

  double sup_norm() const;
  double max_value() const;
  double min_value() const;
  // sum of values * h^d (scalar fields)
  double integral() const;
  double l2_squared() const;
  bool all_finite() const;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
double max_abs_difference(const Field& a, const Field& b);

// (R f)(x) = f(R^{-1} x) for the quarter turn R(x1, x2, ...) = (-x2, x1, ...),
// an automorphism of H^1. Needs a square box centred on the x3-axis in the
// first two coordinates. Vector fields (m = 2) have their components rotated too.
Field rotate_quarter(const Field& f);

// Cell containing x: lower corner index per axis and fractional offset in [0,1].
// Returns false when x is outside the box.
bool locate(const GridSpec& g, std::span<const double> x, std::span<int> base, std::span<double> frac);
// Multilinear interpolation of one component; 0 outside the box.
double interpolate(const Field& f, std::span<const double> x, int comp = 0);
// Adds `mass` to the 2^d nodes around x with multilinear (cloud-in-cell)
// weights. Returns false (and adds nothing) outside the box.
bool deposit(const GridSpec& g, std::span<const double> x, double mass, std::span<double> target);

struct BallMask {
  double radius = 0.0;
  std::vector<char> inside;         // per node
  std::vector<char> boundary_layer;  // inside nodes with an outside neighbour
  std::size_t count = 0;
};

// Node is inside iff ||x||_G < R and it is not on the box boundary.
BallMask make_ball_mask(const GridSpec& grid, const GroupSpec& spec, double radius);

struct Tolerances {
  double absolute = 1e-10;
  double relative = 1e-8;
};

struct SolverParams {
  double sigma = 0.25;
  double gamma = 2.0;
  double dt = 0.0;  // 0 = derive from the stability bound
  double cfl_safety = 0.5;
  double radius = 1.8;
  double horizon = 0.5;
  Tolerances tol;
  int max_iterations = 50;

  void validate() const;
};

// Writes <stem>.csv (x1..xd,value[_c]) and <stem>.json (grid, time, components).
void write_field(const Field& f, const std::filesystem::path& stem);
Field read_field(const std::filesystem::path& stem);

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

// Bit-exact decimal representation of a double.
std::string format_double(double v);

}  // namespace carnot
