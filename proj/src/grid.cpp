#include "carnot/grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace carnot {

GridSpec::GridSpec(std::vector<double> lower, std::vector<double> upper, std::vector<int> nodes)
    : lower_(std::move(lower)), upper_(std::move(upper)), nodes_(std::move(nodes)) {
  const int d = dim();
  if (d == 0 || static_cast<int>(lower_.size()) != d || static_cast<int>(upper_.size()) != d)
    throw std::invalid_argument("GridSpec: corner/node arity mismatch");
  h_.resize(d);
  centre_.resize(d);
  half_.resize(d);
  stride_.resize(d);
  size_ = 1;
  for (int a = 0; a < d; ++a) {
    if (nodes_[a] < 3) throw std::invalid_argument("GridSpec: at least 3 nodes per axis required");
    if (!(upper_[a] > lower_[a])) throw std::invalid_argument("GridSpec: empty box");
    h_[a] = (upper_[a] - lower_[a]) / (nodes_[a] - 1);
    centre_[a] = 0.5 * (lower_[a] + upper_[a]);
    half_[a] = 0.5 * (nodes_[a] - 1);
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(nodes_[a]);
    cell_volume_ *= h_[a];
  }
}

GridSpec GridSpec::cube(int d, double lo, double hi, int n) {
  return GridSpec(std::vector<double>(d, lo), std::vector<double>(d, hi), std::vector<int>(d, n));
}

void GridSpec::index_to_multi(std::size_t idx, std::span<int> multi) const {
  for (int a = 0; a < dim(); ++a) {
    multi[a] = static_cast<int>(idx % nodes_[a]);
    idx /= nodes_[a];
  }
}

std::size_t GridSpec::multi_to_index(std::span<const int> multi) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim(); ++a) idx += stride_[a] * static_cast<std::size_t>(multi[a]);
  return idx;
}

void GridSpec::node_coords(std::size_t idx, std::span<double> x) const {
  for (int a = 0; a < dim(); ++a) {
    const int i = static_cast<int>(idx % nodes_[a]);
    idx /= nodes_[a];
    x[a] = coord(a, i);
  }
}

bool GridSpec::on_boundary(std::size_t idx) const {
  for (int a = 0; a < dim(); ++a) {
    const int i = static_cast<int>(idx % nodes_[a]);
    idx /= nodes_[a];
    if (i == 0 || i == nodes_[a] - 1) return true;
  }
  return false;
}

GridPtr make_grid(GridSpec spec) { return std::make_shared<const GridSpec>(std::move(spec)); }

Field::Field(GridPtr g, int comps, double t)
    : grid(std::move(g)), components(comps), values(grid->size() * comps, 0.0), time(t) {}

Field Field::from_function(GridPtr g, const std::function<double(std::span<const double>)>& f, double t) {
  Field out(g, 1, t);
  std::vector<double> x(g->dim());
  for (std::size_t n = 0; n < g->size(); ++n) {
    g->node_coords(n, x);
    out.values[n] = f(x);
  }
  return out;
}

double Field::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

double Field::max_value() const {
  double s = -INFINITY;
  for (double v : values) s = std::max(s, v);
  return s;
}

double Field::min_value() const {
  double s = INFINITY;
  for (double v : values) s = std::min(s, v);
  return s;
}

double Field::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid->cell_volume();
}

double Field::l2_squared() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s * grid->cell_volume();
}

bool Field::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {
void require_compatible(const Field& a, const Field& b) {
  if (a.grid != b.grid && !(*a.grid == *b.grid)) throw std::invalid_argument("fields live on different grids");
  if (a.components != b.components) throw std::invalid_argument("fields have different component counts");
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
  require_compatible(a, b);
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

Field operator-(const Field& a, const Field& b) {
  require_compatible(a, b);
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

Field operator*(double s, const Field& a) {
  Field out = a;
  for (double& v : out.values) v *= s;
  return out;
}

Field rotate_quarter(const Field& f) {
  const auto& g = *f.grid;
  if (g.dim() < 2 || g.nodes()[0] != g.nodes()[1] || g.lower()[0] != g.lower()[1] || g.upper()[0] != g.upper()[1] ||
      g.lower()[0] != -g.upper()[0])
    throw std::invalid_argument("rotate_quarter: needs a square box centred in (x1, x2)");
  if (f.components != 1 && f.components != 2) throw std::invalid_argument("rotate_quarter: 1 or 2 components");
  const int n = g.nodes()[0];
  Field out(f.grid, f.components, f.time);
  std::vector<int> src(g.dim()), dst(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.index_to_multi(i, src);
    dst = src;
    // x at index (i1, i2) maps to R x = (-x2, x1), index (n-1-i2, i1)
    dst[0] = n - 1 - src[1];
    dst[1] = src[0];
    const std::size_t j = g.multi_to_index(dst);
    if (f.components == 1) {
      out.values[j] = f.values[i];
    } else {
      out.at(j, 0) = -f.at(i, 1);
      out.at(j, 1) = f.at(i, 0);
    }
  }
  return out;
}

double max_abs_difference(const Field& a, const Field& b) {
  require_compatible(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

bool locate(const GridSpec& g, std::span<const double> x, std::span<int> base, std::span<double> frac) {
  for (int a = 0; a < g.dim(); ++a) {
    const double s = (x[a] - g.lower()[a]) / g.spacing(a);
    const int N = g.nodes()[a];
    if (!(s >= 0.0 && s <= N - 1)) return false;
    const int i = std::min(static_cast<int>(s), N - 2);
    base[a] = i;
    frac[a] = s - i;
  }
  return true;
}

namespace {
// Visits the 2^d corners of the cell at `base` with their multilinear weights.
template <class Fn>
void for_each_corner(const GridSpec& g, std::span<const int> base, std::span<const double> frac, Fn&& fn) {
  const int d = g.dim();
  std::size_t origin = 0;
  for (int a = 0; a < d; ++a) origin += g.stride(a) * static_cast<std::size_t>(base[a]);
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::size_t idx = origin;
    for (int a = 0; a < d; ++a) {
      if (corner >> a & 1) {
        w *= frac[a];
        idx += g.stride(a);
      } else {
        w *= 1.0 - frac[a];
      }
    }
    fn(idx, w);
  }
}
}  // namespace

double interpolate(const Field& f, std::span<const double> x, int comp) {
  const auto& g = *f.grid;
  std::array<int, 8> base{};
  std::array<double, 8> frac{};
  if (g.dim() > 8) throw std::invalid_argument("interpolate: dimension above 8");
  if (!locate(g, x, std::span(base.data(), g.dim()), std::span(frac.data(), g.dim()))) return 0.0;
  double s = 0.0;
  for_each_corner(g, std::span<const int>(base.data(), g.dim()), std::span<const double>(frac.data(), g.dim()),
                  [&](std::size_t idx, double w) { s += w * f.at(idx, comp); });
  return s;
}

bool deposit(const GridSpec& g, std::span<const double> x, double mass, std::span<double> target) {
  std::array<int, 8> base{};
  std::array<double, 8> frac{};
  if (g.dim() > 8) throw std::invalid_argument("deposit: dimension above 8");
  if (!locate(g, x, std::span(base.data(), g.dim()), std::span(frac.data(), g.dim()))) return false;
  for_each_corner(g, std::span<const int>(base.data(), g.dim()), std::span<const double>(frac.data(), g.dim()),
                  [&](std::size_t idx, double w) { target[idx] += w * mass; });
  return true;
}

BallMask make_ball_mask(const GridSpec& grid, const GroupSpec& spec, double radius) {
  if (!(radius > 0.0)) throw std::domain_error("make_ball_mask: radius must be positive");
  if (grid.dim() != spec.dim()) throw std::invalid_argument("make_ball_mask: grid/group dimension mismatch");
  BallMask mask;
  mask.radius = radius;
  mask.inside.assign(grid.size(), 0);
  mask.boundary_layer.assign(grid.size(), 0);
  std::vector<double> x(grid.dim());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (grid.on_boundary(n)) continue;
    grid.node_coords(n, x);
    if (spec.hom_norm(x) < radius) {
      mask.inside[n] = 1;
      ++mask.count;
    }
  }
  if (mask.count == 0) throw std::domain_error("make_ball_mask: no grid node inside B_R");
  std::vector<int> multi(grid.dim());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!mask.inside[n]) continue;
    grid.index_to_multi(n, multi);
    for (int a = 0; a < grid.dim() && !mask.boundary_layer[n]; ++a) {
      // inside nodes are never on the box boundary, so both neighbours exist
      if (!mask.inside[n - grid.stride(a)] || !mask.inside[n + grid.stride(a)]) mask.boundary_layer[n] = 1;
    }
  }
  return mask;
}

void SolverParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(gamma >= 2.0)) throw std::invalid_argument("gamma must be >= 2");
  if (dt < 0.0) throw std::invalid_argument("dt must be positive (or 0 for automatic)");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("cfl_safety must lie in (0,1]");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {
double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw std::runtime_error("cannot parse number '" + std::string(s) + "'");
  return v;
}
}  // namespace

nlohmann::json to_json(const GridSpec& g) {
  return {{"lower", g.lower()}, {"upper", g.upper()}, {"nodes", g.nodes()}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  return GridSpec(j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>(),
                  j.at("nodes").get<std::vector<int>>());
}

void write_field(const Field& f, const std::filesystem::path& stem) {
  const auto& g = *f.grid;
  std::ofstream csv(stem.string() + ".csv");
  if (!csv) throw std::runtime_error("cannot write " + stem.string() + ".csv");
  for (int a = 0; a < g.dim(); ++a) csv << "x" << (a + 1) << ",";
  if (f.components == 1) {
    csv << "value\n";
  } else {
    for (int c = 0; c < f.components; ++c) csv << "value_" << (c + 1) << (c + 1 < f.components ? "," : "\n");
  }
  std::vector<double> x(g.dim());
  for (std::size_t n = 0; n < g.size(); ++n) {
    g.node_coords(n, x);
    for (double xi : x) csv << format_double(xi) << ",";
    for (int c = 0; c < f.components; ++c) csv << format_double(f.at(n, c)) << (c + 1 < f.components ? "," : "\n");
  }
  nlohmann::json side = {{"grid", to_json(g)},
                         {"time", f.time},
                         {"time_repr", format_double(f.time)},
                         {"components", f.components}};
  std::ofstream js(stem.string() + ".json");
  js << side.dump(2) << "\n";
}

Field read_field(const std::filesystem::path& stem) {
  std::ifstream js(stem.string() + ".json");
  if (!js) throw std::runtime_error("cannot read " + stem.string() + ".json");
  nlohmann::json side = nlohmann::json::parse(js);
  auto grid = make_grid(grid_from_json(side.at("grid")));
  Field f(grid, side.at("components").get<int>(), parse_double(side.at("time_repr").get<std::string>()));
  std::ifstream csv(stem.string() + ".csv");
  std::string line;
  std::getline(csv, line);  // header
  const int d = grid->dim();
  for (std::size_t n = 0; n < grid->size(); ++n) {
    if (!std::getline(csv, line)) throw std::runtime_error("field CSV truncated");
    std::string_view rest(line);
    for (int col = 0; col < d + f.components; ++col) {
      const auto comma = rest.find(',');
      const auto token = rest.substr(0, comma);
      if (col >= d) f.at(n, col - d) = parse_double(token);
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    }
  }
  return f;
}

}  // namespace carnot
