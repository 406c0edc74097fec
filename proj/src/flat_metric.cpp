#include "carnot/flat_metric.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace carnot {

void DiscreteMeasure::add(std::span<const double> x, double w) {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("DiscreteMeasure: point dimension mismatch");
  if (!(w >= 0.0)) throw std::invalid_argument("DiscreteMeasure: weights must be nonnegative");
  points.insert(points.end(), x.begin(), x.end());
  weights.push_back(w);
}

double DiscreteMeasure::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

DiscreteMeasure DiscreteMeasure::from_field(const Field& rho, double threshold) {
  const auto& g = *rho.grid;
  DiscreteMeasure m(g.dim());
  std::vector<double> x(g.dim());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double w = rho.values[n] * g.cell_volume();
    if (w < 0.0) m.clipped -= w;
    if (w <= threshold) continue;
    g.node_coords(n, x);
    m.add(x, w);
  }
  return m;
}

DiscreteMeasure DiscreteMeasure::coarsened(const Field& rho, const GridSpec& coarse, double threshold) {
  const auto& g = *rho.grid;
  if (coarse.dim() != g.dim()) throw std::invalid_argument("coarsened: dimension mismatch");
  std::vector<double> mass(coarse.size(), 0.0), x(g.dim());
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (rho.values[n] == 0.0) continue;
    g.node_coords(n, x);
    if (!deposit(coarse, x, rho.values[n] * g.cell_volume(), mass))
      throw std::invalid_argument("coarsened: fine node outside the coarse box");
  }
  DiscreteMeasure m(g.dim());
  for (std::size_t n = 0; n < coarse.size(); ++n) {
    if (mass[n] < 0.0) m.clipped -= mass[n];
    if (mass[n] <= threshold) continue;
    coarse.node_coords(n, x);
    m.add(x, mass[n]);
  }
  return m;
}

void DiscreteMeasure::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (int k = 0; k < dim; ++k) out << 'x' << (k + 1) << ',';
  out << "weight\n";
  for (std::size_t i = 0; i < size(); ++i) {
    for (int k = 0; k < dim; ++k) out << format_double(points[i * dim + k]) << ',';
    out << format_double(weights[i]) << '\n';
  }
}

DiscreteMeasure DiscreteMeasure::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty measure file " + path.string());
  const int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 2) throw std::runtime_error("measure file needs coordinates and a weight column");
  DiscreteMeasure m(cols - 1);
  std::vector<double> row(cols);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= cols) throw std::runtime_error("measure file: too many columns");
      row[c++] = std::stod(cell);
    }
    if (c != cols) throw std::runtime_error("measure file: too few columns");
    m.add(std::span<const double>(row.data(), cols - 1), row[cols - 1]);
  }
  return m;
}

GridSpec measurement_grid(const GridSpec& g) {
  std::vector<int> n(g.dim());
  for (int k = 0; k < g.dim(); ++k) n[k] = (g.nodes()[k] + 1) / 2;
  return GridSpec(g.lower(), g.upper(), n);
}

namespace {

// Primal network simplex on the bipartite-plus-ground network. Node layout:
// 0..P-1 positive atoms, P..P+N-1 negative atoms, P+N the ground (root).
// Transport arcs of row i are stored by increasing distance: arc i*N + r goes
// to the r-th nearest negative atom. Ground arcs: PN + i (i -> ground) and
// PN + P + j (ground -> j). Non-tree arcs carry no flow, so the flow lives on
// the tree arc above each node. Strongly feasible bases (Cunningham's leaving
// rule) prevent cycling.
//
// Potentials stay within [-alpha, alpha] of the ground, so a transport arc
// with beta * d >= 2 alpha never has negative reduced cost; pricing only scans
// the prefix of each row below that cutoff.
class NetworkSimplex {
 public:
  NetworkSimplex(std::size_t P, std::size_t N, const std::vector<double>& dist, std::vector<double> supply)
      : P_(P), N_(N), n_(P + N + 1), root_(P + N), PN_(P * N), supply_(std::move(supply)) {
    sd_.resize(PN_);
    col_.resize(PN_);
    std::vector<std::uint32_t> idx(N_);
    for (std::size_t i = 0; i < P_; ++i) {
      for (std::size_t j = 0; j < N_; ++j) idx[j] = static_cast<std::uint32_t>(j);
      const double* row = dist.data() + i * N_;
      std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t x, std::uint32_t y) { return row[x] < row[y]; });
      for (std::size_t r = 0; r < N_; ++r) {
        col_[i * N_ + r] = idx[r];
        sd_[i * N_ + r] = row[idx[r]];
      }
    }
    active_.assign(P_, N_);
    parent_.assign(n_, -1);
    arc_.assign(n_, 0);
    up_.assign(n_, 0);
    flow_.assign(n_, 0.0);
    depth_.assign(n_, 0);
    pi_.assign(n_, 0.0);
    children_.assign(n_, {});
    pos_.assign(n_, 0);
    for (std::size_t v = 0; v < P_ + N_; ++v) {
      parent_[v] = static_cast<long>(root_);
      depth_[v] = 1;
      if (v < P_) {
        arc_[v] = PN_ + v;
        up_[v] = 1;
        flow_[v] = supply_[v];
      } else {
        arc_[v] = PN_ + P_ + (v - P_);
        up_[v] = 0;
        flow_[v] = -supply_[v];
      }
      pos_[v] = children_[root_].size();
      children_[root_].push_back(static_cast<long>(v));
    }
    double scale = 1.0;
    for (double d : sd_) scale = std::max(scale, d);
    eps_ = 1e-12 * scale;
  }

  // Optimizes for costs beta * d (transport) and alpha (ground arcs).
  // Returns false when the pivot limit is hit.
  bool solve(double alpha, long long max_pivots) {
    alpha_ = alpha;
    beta_ = 1.0 - alpha;
    std::size_t total = P_ + N_;
    for (std::size_t i = 0; i < P_; ++i) {
      const double* row = sd_.data() + i * N_;
      if (beta_ <= 0.0) {
        active_[i] = N_;
      } else {
        const double cut = 2.0 * alpha_ / beta_ + eps_;
        active_[i] = static_cast<std::size_t>(std::lower_bound(row, row + N_, cut) - row);
      }
      total += active_[i];
    }
    block_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
    row_ = rank_ = 0;
    recompute_potentials(static_cast<long>(root_));
    long long count = 0;
    while (true) {
      const long long e = find_entering(total);
      if (e < 0) return true;
      if (++count > max_pivots) return false;
      pivot(static_cast<std::size_t>(e));
      ++pivots_;
    }
  }

  double value() const {
    double v = 0.0;
    for (std::size_t x = 0; x < P_ + N_; ++x) v += cost(arc_[x]) * flow_[x];
    return v;
  }
  // dV/dalpha at the current optimal flow: ground flow minus transport length.
  double slope() const {
    double s = 0.0;
    for (std::size_t x = 0; x < P_ + N_; ++x) s += (arc_[x] >= PN_ ? 1.0 : -sd_[arc_[x]]) * flow_[x];
    return s;
  }
  const std::vector<double>& potentials() const { return pi_; }
  long long pivots() const { return pivots_; }

 private:
  std::size_t tail(std::size_t a) const {
    if (a < PN_) return a / N_;
    if (a < PN_ + P_) return a - PN_;
    return root_;
  }
  std::size_t head(std::size_t a) const {
    if (a < PN_) return P_ + col_[a];
    if (a < PN_ + P_) return root_;
    return P_ + (a - PN_ - P_);
  }
  double cost(std::size_t a) const { return a < PN_ ? beta_ * sd_[a] : alpha_; }

  // Block search over the active arcs: rows (row_ < P_) then the ground arcs
  // (row_ == P_, rank_ indexing the P + N ground arcs).
  long long find_entering(std::size_t total) {
    double best = -eps_;
    long long pick = -1;
    std::size_t scanned = 0, in_block = 0;
    while (scanned < total) {
      if (row_ < P_) {
        const std::size_t i = row_, base = i * N_;
        const double pt = pi_[i];
        const std::size_t end = active_[i];
        while (rank_ < end) {
          const std::size_t a = base + rank_++;
          const double rc = beta_ * sd_[a] + pt - pi_[P_ + col_[a]];
          if (rc < best) {
            best = rc;
            pick = static_cast<long long>(a);
          }
          ++scanned;
          if (++in_block == block_) {
            if (pick >= 0) return pick;
            in_block = 0;
          }
        }
        ++row_;
        rank_ = 0;
      } else {
        while (rank_ < P_ + N_) {
          const std::size_t a = PN_ + rank_++;
          const double rc = alpha_ + pi_[tail(a)] - pi_[head(a)];
          if (rc < best) {
            best = rc;
            pick = static_cast<long long>(a);
          }
          ++scanned;
          if (++in_block == block_) {
            if (pick >= 0) return pick;
            in_block = 0;
          }
        }
        row_ = 0;
        rank_ = 0;
      }
    }
    return pick;
  }

  void pivot(std::size_t e) {
    const long u = static_cast<long>(tail(e)), v = static_cast<long>(head(e));
    long a = u, b = v;
    while (a != b) {
      if (depth_[a] >= depth_[b])
        a = parent_[a];
      else
        b = parent_[b];
    }
    const long join = a;
    // Cycle orientation: join -> ... -> u -> v -> ... -> join. Among blocking
    // arcs the last one in this order leaves.
    double delta = std::numeric_limits<double>::infinity();
    long leave = -1;
    bool leave_on_v = false;
    for (long x = u; x != join; x = parent_[x])
      if (up_[x] && flow_[x] < delta) {
        delta = flow_[x];
        leave = x;
      }
    for (long x = v; x != join; x = parent_[x])
      if (!up_[x] && flow_[x] <= delta) {
        delta = flow_[x];
        leave = x;
        leave_on_v = true;
      }
    if (leave < 0) throw std::logic_error("flat_distance: unbounded pivot");
    for (long x = u; x != join; x = parent_[x]) flow_[x] += up_[x] ? -delta : delta;
    for (long x = v; x != join; x = parent_[x]) flow_[x] += up_[x] ? delta : -delta;

    // Re-hang the subtree below the leaving arc from the entering arc.
    const long w = leave_on_v ? v : u;
    const long other = leave_on_v ? u : v;
    long x = w;
    long prev = other;
    std::size_t carry_arc = e;
    char carry_up = leave_on_v ? 0 : 1;
    double carry_flow = delta;
    while (true) {
      const long old_parent = parent_[x];
      const std::size_t old_arc = arc_[x];
      const char old_up = up_[x];
      const double old_flow = flow_[x];
      detach(old_parent, x);
      parent_[x] = prev;
      pos_[x] = children_[prev].size();
      children_[prev].push_back(x);
      arc_[x] = carry_arc;
      up_[x] = carry_up;
      flow_[x] = carry_flow;
      if (x == leave) break;
      carry_arc = old_arc;
      carry_up = static_cast<char>(!old_up);
      carry_flow = old_flow;
      prev = x;
      x = old_parent;
    }
    recompute_potentials(w);
  }

  void detach(long p, long c) {
    auto& ch = children_[p];
    const std::size_t k = pos_[c];
    ch[k] = ch.back();
    pos_[ch[k]] = k;
    ch.pop_back();
  }

  void recompute_potentials(long top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const long x = stack_.back();
      stack_.pop_back();
      if (x != static_cast<long>(root_)) {
        const long p = parent_[x];
        depth_[x] = depth_[p] + 1;
        pi_[x] = up_[x] ? pi_[p] - cost(arc_[x]) : pi_[p] + cost(arc_[x]);
      }
      for (long c : children_[x]) stack_.push_back(c);
    }
  }

  std::size_t P_, N_, n_, root_, PN_;
  std::vector<double> sd_;
  std::vector<std::uint32_t> col_;
  std::vector<std::size_t> active_;
  std::vector<double> supply_;
  std::vector<long> parent_;
  std::vector<std::size_t> arc_;
  std::vector<char> up_;
  std::vector<double> flow_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<long>> children_;
  std::vector<std::size_t> pos_;
  std::vector<long> stack_;
  std::size_t block_ = 16, row_ = 0, rank_ = 0;
  double eps_ = 1e-12;
  double alpha_ = 0.5, beta_ = 0.5;
  long long pivots_ = 0;
};

struct Cut {
  double alpha, value, slope;
};

// argmax over [0, 1] of min_k (value_k + slope_k (a - alpha_k))
std::pair<double, double> cutting_plane_max(const std::vector<Cut>& cuts) {
  auto model = [&](double a) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : cuts) m = std::min(m, c.value + c.slope * (a - c.alpha));
    return m;
  };
  std::vector<double> cand{0.0, 1.0};
  for (std::size_t i = 0; i < cuts.size(); ++i)
    for (std::size_t j = i + 1; j < cuts.size(); ++j) {
      const double ds = cuts[i].slope - cuts[j].slope;
      if (ds == 0.0) continue;
      const double a = (cuts[j].value - cuts[j].slope * cuts[j].alpha - cuts[i].value + cuts[i].slope * cuts[i].alpha) / ds;
      if (a > 0.0 && a < 1.0) cand.push_back(a);
    }
  std::sort(cand.begin(), cand.end());
  double best_a = 0.0, best = -std::numeric_limits<double>::infinity();
  for (double a : cand) {
    const double m = model(a);
    if (m > best) {
      best = m;
      best_a = a;
    }
  }
  return {best_a, best};
}

}  // namespace

FlatMetricResult flat_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroupSpec& spec,
                               const FlatMetricOptions& opt) {
  const int d = spec.dim();
  if (mu.dim != d || nu.dim != d) throw std::invalid_argument("flat_distance: measure dimension mismatch");
  for (const auto* m : {&mu, &nu})
    for (double w : m->weights)
      if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("flat_distance: invalid weight");

  // Net signed measure on the merged support (points compared exactly).
  std::map<std::vector<double>, double> net;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto p = mu.point(i);
    net[std::vector<double>(p.begin(), p.end())] += mu.weights[i];
  }
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const auto p = nu.point(i);
    net[std::vector<double>(p.begin(), p.end())] -= nu.weights[i];
  }
  std::vector<std::vector<double>> pos, neg;
  std::vector<double> wp, wn;
  FlatMetricResult res;
  std::vector<double> wall;
  for (const auto& [x, w] : net) {
    res.support.insert(res.support.end(), x.begin(), x.end());
    wall.push_back(w);
    if (w > 0.0) {
      pos.push_back(x);
      wp.push_back(w);
    } else if (w < 0.0) {
      neg.push_back(x);
      wn.push_back(w);
    }
  }
  res.f.assign(wall.size(), 0.0);
  const std::size_t P = pos.size(), N = neg.size();
  if (P == 0 && N == 0) return res;
  if (P * N > opt.max_pairs) {
    res.status = "too_large";
    res.value = res.upper = std::numeric_limits<double>::quiet_NaN();
    res.gap = std::numeric_limits<double>::infinity();
    return res;
  }

  std::vector<double> dist(P * N);
  {
    std::vector<double> prod(d);
    for (std::size_t j = 0; j < N; ++j) {
      const auto yinv = inverse(spec, GroupElement(neg[j]));
      for (std::size_t i = 0; i < P; ++i) {
        spec.multiply_into(yinv.coords, pos[i], prod);
        dist[i * N + j] = spec.hom_norm(prod);
      }
    }
  }
  std::vector<double> supply(wp);
  supply.insert(supply.end(), wn.begin(), wn.end());
  NetworkSimplex ns(P, N, dist, supply);
  const long long max_pivots = opt.max_pivots > 0 ? opt.max_pivots : 50LL * static_cast<long long>(P + N + 10) * 100;

  std::vector<Cut> cuts;
  double best_alpha = 0.5, best_value = -std::numeric_limits<double>::infinity(), upper = 0.0;
  std::vector<double> best_pi;
  double alpha = 0.5;
  bool converged = false;
  for (int k = 0; k < opt.max_cuts; ++k) {
    if (!ns.solve(alpha, max_pivots)) break;
    const double v = ns.value();
    cuts.push_back({alpha, v, ns.slope()});
    if (v > best_value) {
      best_value = v;
      best_alpha = alpha;
      best_pi = ns.potentials();
    }
    const auto [a_next, u] = cutting_plane_max(cuts);
    upper = u;
    if (upper - best_value <= opt.tolerance * std::max(1.0, best_value)) {
      converged = true;
      break;
    }
    bool seen = false;
    for (const auto& c : cuts) seen = seen || c.alpha == a_next;
    if (seen) {
      converged = true;
      break;
    }
    alpha = a_next;
  }
  res.cuts = static_cast<int>(cuts.size());
  res.pivots = ns.pivots();
  if (best_pi.empty()) {
    res.status = "not_converged";
    res.value = res.upper = std::numeric_limits<double>::quiet_NaN();
    res.gap = std::numeric_limits<double>::infinity();
    return res;
  }
  res.value = std::max(0.0, best_value);
  res.upper = std::max(upper, best_value);
  res.alpha = best_alpha;
  res.beta = 1.0 - best_alpha;

  // f = -potential, then the double c-transform: raise f on positive atoms,
  // lower it on negative atoms, both within [-alpha, alpha].
  const double a = best_alpha, b = 1.0 - best_alpha;
  std::vector<double> fp(P), fn(N);
  for (std::size_t j = 0; j < N; ++j) fn[j] = -best_pi[P + j];
  for (std::size_t i = 0; i < P; ++i) {
    double v = a;
    for (std::size_t j = 0; j < N; ++j) v = std::min(v, fn[j] + b * dist[i * N + j]);
    fp[i] = v;
  }
  for (std::size_t j = 0; j < N; ++j) {
    double v = -a;
    for (std::size_t i = 0; i < P; ++i) v = std::max(v, fp[i] - b * dist[i * N + j]);
    fn[j] = v;
  }
  double primal = 0.0;
  std::size_t ip = 0, in = 0;
  for (std::size_t s = 0; s < wall.size(); ++s) {
    if (wall[s] > 0.0)
      res.f[s] = fp[ip++];
    else if (wall[s] < 0.0)
      res.f[s] = fn[in++];
    primal += res.f[s] * wall[s];
  }
  // zero-weight support points take any value in range; use the McShane bound
  for (std::size_t s = 0; s < wall.size(); ++s) {
    if (wall[s] != 0.0) continue;
    double v = a;
    std::vector<double> prod(d);
    for (std::size_t j = 0; j < N; ++j) {
      const auto yinv = inverse(spec, GroupElement(neg[j]));
      spec.multiply_into(yinv.coords, std::span<const double>(res.support.data() + s * d, d), prod);
      v = std::min(v, fn[j] + b * spec.hom_norm(prod));
    }
    res.f[s] = std::max(-a, v);
  }
  res.gap = (res.upper - res.value) + std::abs(res.value - primal);
  res.status = converged && res.gap <= 1e-8 ? "optimal" : "not_converged";
  return res;
}

FlatMetricResult flat_distance_fields(const Field& a, const Field& b, const GroupSpec& spec,
                                      const FlatMetricOptions& opt) {
  if (!(*a.grid == *b.grid)) throw std::invalid_argument("flat_distance_fields: grids differ");
  const GridSpec coarse = measurement_grid(*a.grid);
  return flat_distance(DiscreteMeasure::coarsened(a, coarse), DiscreteMeasure::coarsened(b, coarse), spec, opt);
}

nlohmann::json FlatMetricResult::to_json() const {
  return {{"value", value}, {"status", status}, {"gap", gap},     {"upper", upper},
          {"alpha", alpha}, {"beta", beta},     {"cuts", cuts},   {"pivots", pivots}};
}

HolderFit holder_in_time(const std::vector<Field>& trajectory, const GroupSpec& spec, const FlatMetricOptions& opt) {
  if (trajectory.size() < 3) throw std::invalid_argument("holder_in_time: need at least three snapshots");
  HolderFit fit;
  const Field& first = trajectory.front();
  double scale = 0.0;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    const double lag = trajectory[k].time - first.time;
    if (!(lag > 0.0)) throw std::invalid_argument("holder_in_time: snapshot times must increase");
    const auto r = flat_distance_fields(first, trajectory[k], spec, opt);
    if (!r.ok()) throw std::runtime_error("holder_in_time: LP status " + r.status);
    fit.lags.push_back(lag);
    fit.distances.push_back(r.value);
    scale = std::max(scale, r.value);
  }
  if (scale <= 1e-12) {
    fit.degenerate = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < fit.lags.size(); ++k) {
    if (fit.distances[k] <= 1e-12) continue;
    const double x = std::log(fit.lags[k]), y = std::log(fit.distances[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) {
    fit.degenerate = true;
    return fit;
  }
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.constant = std::exp((sy - fit.exponent * sx) / n);
  return fit;
}

nlohmann::json HolderFit::to_json() const {
  nlohmann::json j{{"degenerate", degenerate}, {"lags", lags}, {"distances", distances}};
  if (!degenerate) {
    j["exponent"] = exponent;
    j["constant"] = constant;
  }
  return j;
}

}  // namespace carnot
