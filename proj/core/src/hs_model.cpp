#include "hsm/hs_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hsm {

namespace {

// nu_d by the recursion nu_d = nu_{d-2} * 2 pi / d (same values as pi^(d/2)/Gamma(d/2+1)).
long double ball_volume_ld(int d) {
  long double v = (d % 2 == 0) ? 1.0L : 2.0L;
  for (int k = (d % 2 == 0) ? 2 : 3; k <= d; k += 2) v *= 2.0L * std::numbers::pi_v<long double> / k;
  return v;
}

long double radius_ld(int d) { return std::pow(ball_volume_ld(d), -1.0L / d); }

void check_dim(int d) {
  if (d < 1 || d > kMaxDimension)
    throw ValidationError("dimension must be in [1," + std::to_string(kMaxDimension) + "], got " + std::to_string(d));
}

void check_unit_interval(double x, const char* name) {
  if (!(x > 0.0 && x <= 1.0)) throw ValidationError(std::string(name) + " must lie in (0,1]");
}

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
      throw CapExceeded("grid size does not fit in 64 bits");
    r *= base;
  }
  return r;
}

void collect_offsets(const Discretization& disc, int axis, std::int64_t reach, std::int64_t partial,
                     GridPoint& cur, std::vector<GridPoint>& out) {
  if (axis == disc.dim()) {
    if (disc.is_edge_distance(partial)) out.push_back(cur);
    return;
  }
  for (std::int64_t o = -reach; o <= reach; ++o) {
    const std::int64_t next = partial + o * o;
    if ((long double)next > disc.threshold_squared()) continue;
    cur.coords[axis] = o;
    collect_offsets(disc, axis + 1, reach, next, cur, out);
  }
  cur.coords[axis] = 0;
}

std::uint64_t count_ball(int dims, long double rem) {
  if (dims == 0) return 1;
  auto m = std::int64_t(std::floor(std::sqrt(rem)));
  while ((long double)(m + 1) * (m + 1) <= rem) ++m;
  while (m > 0 && (long double)m * m > rem) --m;
  std::uint64_t total = 0;
  for (std::int64_t x = -m; x <= m; ++x) total += count_ball(dims - 1, rem - (long double)x * x);
  return total;
}

}  // namespace

double unit_ball_volume(int d) {
  check_dim(d);
  return double(ball_volume_ld(d));
}

double sphere_radius(int d) {
  check_dim(d);
  return double(radius_ld(d));
}

void HardSphereInstance::validate() const {
  check_dim(d);
  if (!(ell >= 1.0) || !std::isfinite(ell)) throw ValidationError("side length ell must be a finite number >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("fugacity lambda must be positive and finite");
}

double HardSphereInstance::volume() const { return std::pow(ell, d); }

Discretization::Discretization(HardSphereInstance parent, double rho, EdgeRule rule) {
  parent.validate();
  const long double n = (long double)rho * parent.ell;
  const long double rounded = std::round(n);
  if (!(rho > 0.0) || std::abs(n - rounded) > 1e-9L * std::max(1.0L, n) || rounded < 1.0L) {
    std::ostringstream os;
    os << "resolution rho=" << rho << " does not make rho*ell a positive integer";
    throw ValidationError(os.str());
  }
  *this = Discretization(parent, std::int64_t(rounded), rule, true);
}

Discretization Discretization::from_grid_side(HardSphereInstance parent, std::int64_t side, EdgeRule rule) {
  parent.validate();
  return Discretization(parent, side, rule, true);
}

Discretization::Discretization(HardSphereInstance parent, std::int64_t side, EdgeRule rule, bool)
    : parent_(parent), side_(side), rule_(rule) {
  if (side < 1) throw ValidationError("grid side must be positive");
  if (side > kMaxGridSide) throw CapExceeded("grid side " + std::to_string(side) + " exceeds supported maximum");
  const long double rho = (long double)side / parent.ell;
  rho_ = double(rho);
  lambda_rho_ = parent.lambda / std::pow(rho_, parent.d);
  conflict_radius_ = 2.0L * rho * radius_ld(parent.d);
  threshold_sq_ = conflict_radius_ * conflict_radius_;
}

std::uint64_t Discretization::vertex_count() const { return checked_pow(std::uint64_t(side_), dim()); }

bool Discretization::in_bounds(const GridPoint& x) const {
  for (int k = 0; k < dim(); ++k)
    if (x.coords[k] < 0 || x.coords[k] >= side_) return false;
  return true;
}

std::int64_t Discretization::squared_distance(const GridPoint& x, const GridPoint& y) const {
  std::int64_t s = 0;
  for (int k = 0; k < dim(); ++k) {
    const std::int64_t diff = x.coords[k] - y.coords[k];
    s += diff * diff;
  }
  return s;
}

bool Discretization::conflicts(const GridPoint& x, const GridPoint& y) const {
  return is_edge_distance(squared_distance(x, y));
}

std::uint64_t Discretization::index_of(const GridPoint& x) const {
  std::uint64_t idx = 0;
  for (int k = 0; k < dim(); ++k) idx = idx * std::uint64_t(side_) + std::uint64_t(x.coords[k]);
  return idx;
}

GridPoint Discretization::point_at(std::uint64_t index) const {
  GridPoint p;
  for (int k = dim() - 1; k >= 0; --k) {
    p.coords[k] = std::int64_t(index % std::uint64_t(side_));
    index /= std::uint64_t(side_);
  }
  return p;
}

std::vector<GridPoint> Discretization::conflict_offsets() const {
  const auto reach = std::int64_t(std::ceil(conflict_radius_));
  std::vector<GridPoint> out;
  GridPoint cur;
  collect_offsets(*this, 0, reach, 0, cur, out);
  return out;
}

std::vector<GridPoint> neighbors(const Discretization& disc, const GridPoint& x) {
  if (!disc.in_bounds(x)) throw ValidationError("grid point out of bounds");
  std::vector<GridPoint> out;
  for (const auto& o : disc.conflict_offsets()) {
    GridPoint y;
    for (int k = 0; k < disc.dim(); ++k) y.coords[k] = x.coords[k] + o.coords[k];
    if (disc.in_bounds(y)) out.push_back(y);
  }
  return out;
}

HardCoreInstance explicit_graph(const Discretization& disc, std::size_t cap) {
  const std::uint64_t n = disc.vertex_count();
  if (n > cap)
    throw CapExceeded("explicit grid of " + std::to_string(n) + " vertices exceeds cap " + std::to_string(cap));
  const auto offsets = disc.conflict_offsets();
  std::vector<VertexSet> adj(n);
  std::vector<std::string> labels(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const GridPoint x = disc.point_at(i);
    std::string label = "(";
    for (int k = 0; k < disc.dim(); ++k) label += (k ? "," : "") + std::to_string(x.coords[k]);
    labels[i] = label + ")";
    for (const auto& o : offsets) {
      GridPoint y;
      for (int k = 0; k < disc.dim(); ++k) y.coords[k] = x.coords[k] + o.coords[k];
      if (disc.in_bounds(y)) adj[i].push_back(Vertex(disc.index_of(y)));
    }
    std::sort(adj[i].begin(), adj[i].end());
  }
  Graph g = Graph::from_adjacency(std::move(adj));
  g.set_labels(std::move(labels));
  return HardCoreInstance::uniform(std::move(g), disc.lambda_rho());
}

std::uint64_t max_degree_exact(const Discretization& disc, std::uint64_t cap) {
  const std::uint64_t n = disc.vertex_count();
  if (n > cap) throw CapExceeded("grid too large for exact degree computation");
  const auto offsets = disc.conflict_offsets();
  std::uint64_t best = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const GridPoint x = disc.point_at(i);
    std::uint64_t deg = 0;
    for (const auto& o : offsets) {
      bool inside = true;
      for (int k = 0; k < disc.dim() && inside; ++k) {
        const std::int64_t c = x.coords[k] + o.coords[k];
        inside = c >= 0 && c < disc.grid_side();
      }
      deg += inside;
    }
    best = std::max(best, deg);
  }
  return best;
}

std::uint64_t integer_sphere_count(int d, double s, std::uint64_t box_cap) {
  check_dim(d);
  if (!(s >= 0.0)) throw ValidationError("radius must be nonnegative");
  const double side = 2.0 * std::floor(s) + 1.0;
  if (std::pow(side, d) > double(box_cap)) throw CapExceeded("radius too large for exact integer-point enumeration");
  return count_ball(d, (long double)s * s);
}

SphereBound integer_sphere_bound(int d, double s, double rho, double gamma) {
  check_dim(d);
  check_unit_interval(gamma, "gamma");
  SphereBound b;
  b.bound = (1.0 + gamma) * unit_ball_volume(d) * std::pow(rho * s, d);
  b.rho_threshold = std::pow(2.0 * std::sqrt(double(d)), d) / (gamma * s);
  b.precondition_met = rho >= b.rho_threshold;
  return b;
}

DegreeBound max_degree_bound(const Discretization& disc, double gamma) {
  check_unit_interval(gamma, "gamma");
  const int d = disc.dim();
  DegreeBound b;
  b.bound = (1.0 + gamma) * std::pow(2.0 * disc.rho(), d);
  b.rho_threshold = std::pow(2.0 * std::sqrt(double(d)), d) / (gamma * 2.0 * sphere_radius(d));
  b.precondition_met = disc.rho() >= b.rho_threshold;
  return b;
}

bool check_fugacity_regime(const HardSphereInstance& instance, double delta) {
  check_unit_interval(delta, "delta");
  return instance.lambda <= (1.0 - delta) * std::numbers::e / std::pow(2.0, instance.d);
}

bool discretized_weight_below_threshold(const Discretization& disc, double delta) {
  check_unit_interval(delta, "delta");
  const double half = delta / 2.0;
  const double bound = std::floor(max_degree_bound(disc, half).bound);
  if (bound < 3.0) return true;
  if (bound > 9.0e18) throw CapExceeded("degree bound too large");
  return disc.lambda_rho() <= (1.0 - half) * tree_threshold(std::uint64_t(bound));
}

CellCover::CellCover(const Discretization& disc)
    : d_(disc.dim()), side_(disc.grid_side()), lambda_rho_(disc.lambda_rho()) {
  a_ = std::int64_t(std::floor(2.0L * (long double)disc.rho() * radius_ld(d_) / std::sqrt((long double)d_)));
  if (a_ < 1) throw ValidationError("cell side a = 0: resolution too small for the cell cover");
  // A full cell has diameter^2 = d (a-1)^2; guard against rounding in the floor.
  while (a_ > 1 && !disc.is_edge_distance(std::int64_t(d_) * (a_ - 1) * (a_ - 1))) --a_;
  per_axis_ = (side_ + a_ - 1) / a_;
  m_ = checked_pow(std::uint64_t(per_axis_), d_);
}

std::uint64_t CellCover::cell_index(const GridPoint& c) const {
  std::uint64_t idx = 0;
  for (int k = 0; k < d_; ++k) idx = idx * std::uint64_t(per_axis_) + std::uint64_t(c.coords[k]);
  return idx;
}

std::uint64_t CellCover::cell_of(const GridPoint& x) const {
  GridPoint c;
  for (int k = 0; k < d_; ++k) c.coords[k] = x.coords[k] / a_;
  return cell_index(c);
}

GridPoint CellCover::cell_coords(std::uint64_t cell) const {
  GridPoint c;
  for (int k = d_ - 1; k >= 0; --k) {
    c.coords[k] = std::int64_t(cell % std::uint64_t(per_axis_));
    cell /= std::uint64_t(per_axis_);
  }
  return c;
}

GridPoint CellCover::lower_corner(std::uint64_t cell) const {
  GridPoint c = cell_coords(cell);
  for (int k = 0; k < d_; ++k) c.coords[k] *= a_;
  return c;
}

std::array<std::int64_t, kMaxDimension> CellCover::extents(std::uint64_t cell) const {
  const GridPoint lo = lower_corner(cell);
  std::array<std::int64_t, kMaxDimension> e{};
  for (int k = 0; k < d_; ++k) e[k] = std::min(a_, side_ - lo.coords[k]);
  return e;
}

std::uint64_t CellCover::cell_size(std::uint64_t cell) const {
  const auto e = extents(cell);
  std::uint64_t s = 1;
  for (int k = 0; k < d_; ++k) s *= std::uint64_t(e[k]);
  return s;
}

GridPoint CellCover::cell_point(std::uint64_t cell, std::uint64_t k) const {
  const auto e = extents(cell);
  GridPoint p = lower_corner(cell);
  for (int axis = d_ - 1; axis >= 0; --axis) {
    p.coords[axis] += std::int64_t(k % std::uint64_t(e[axis]));
    k /= std::uint64_t(e[axis]);
  }
  return p;
}

double CellCover::max_clique_z() const {
  // The first cell is never truncated below any other cell's size.
  return clique_z(0);
}

CliqueCover CellCover::to_clique_cover(const Discretization& disc) const {
  CliqueCover cover;
  for (std::uint64_t c = 0; c < m_; ++c) {
    VertexSet clique;
    const std::uint64_t size = cell_size(c);
    for (std::uint64_t k = 0; k < size; ++k) clique.push_back(Vertex(disc.index_of(cell_point(c, k))));
    cover.cliques.push_back(std::move(clique));
  }
  return cover;
}

double convergence_constant(const HardSphereInstance& instance) {
  instance.validate();
  const double d = instance.d;
  const double r = sphere_radius(instance.d);
  const double k = std::pow(instance.ell * std::sqrt(d) / (2.0 * r), d);
  const double c = 4.0 * k * k * std::pow(instance.ell, d * (k - 1.0)) * std::sqrt(d) * std::pow(2.0 * r + 1.0, d) *
                   std::exp(instance.lambda);
  if (!std::isfinite(c)) throw CapExceeded("discretization error constant overflows; region too large");
  return c;
}

Resolution choose_resolution(const HardSphereInstance& instance, double eps_prime, double gamma, EdgeRule rule) {
  check_unit_interval(eps_prime, "epsilon'");
  check_unit_interval(gamma, "gamma");
  instance.validate();
  const double d = instance.d;
  const double r = sphere_radius(instance.d);
  const double c_conv = convergence_constant(instance);
  const double rho_gamma = std::pow(2.0 * std::sqrt(d), d) / (gamma * 2.0 * r);
  const double rho_min = std::max({2.0 * std::sqrt(d), rho_gamma, c_conv / eps_prime});
  const long double need = (long double)rho_min * instance.ell;
  if (need > (long double)kMaxGridSide) throw CapExceeded("required resolution exceeds the supported grid side");
  auto side = std::int64_t(std::ceil(need));
  while ((long double)side / instance.ell < (long double)rho_min) ++side;
  Discretization disc = Discretization::from_grid_side(instance, side, rule);
  Resolution res{disc, std::pow(instance.ell * std::sqrt(d) / (2.0 * r), d), c_conv, c_conv / disc.rho(), rho_min};
  return res;
}

double tonks_gas_z(double ell, double lambda) {
  if (!(ell > 0.0)) throw ValidationError("ell must be positive");
  if (lambda < 0.0) throw ValidationError("lambda must be nonnegative");
  double z = 1.0;
  for (int k = 1; ell - (k - 1) > 0.0; ++k) {
    const double free_len = ell - (k - 1);
    double term = 1.0;
    for (int j = 1; j <= k; ++j) term *= lambda * free_len / j;
    z += term;
  }
  return z;
}

}  // namespace hsm
