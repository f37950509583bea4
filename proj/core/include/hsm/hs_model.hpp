#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hsm/hardcore.hpp"

namespace hsm {

inline constexpr int kMaxDimension = 6;
/// Largest admissible grid side; keeps squared distances inside 64-bit integers.
inline constexpr std::int64_t kMaxGridSide = std::int64_t{1} << 30;
inline constexpr std::size_t kDefaultExplicitGridCap = 4096;

double unit_ball_volume(int d);
/// Radius of a ball of unit volume, (1/nu_d)^(1/d).
double sphere_radius(int d);

struct HardSphereInstance {
  int d = 1;
  double ell = 1.0;
  double lambda = 1.0;

  /// Throws ValidationError unless 1 <= d <= kMaxDimension, ell >= 1 and lambda > 0.
  void validate() const;
  double radius() const { return sphere_radius(d); }
  double volume() const;
};

struct GridPoint {
  std::array<std::int64_t, kMaxDimension> coords{};

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

enum class EdgeRule {
  Strict,    ///< edge iff 0 < dist < 2 rho r
  Inclusive  ///< edge iff 0 < dist <= 2 rho r
};

/// Grid representation of a hard-sphere instance at resolution rho (rho * ell integral).
class Discretization {
 public:
  Discretization(HardSphereInstance parent, double rho, EdgeRule rule = EdgeRule::Strict);
  /// Resolution given through the grid side n = rho * ell.
  static Discretization from_grid_side(HardSphereInstance parent, std::int64_t side,
                                       EdgeRule rule = EdgeRule::Strict);

  const HardSphereInstance& parent() const { return parent_; }
  int dim() const { return parent_.d; }
  double rho() const { return rho_; }
  std::int64_t grid_side() const { return side_; }
  double lambda_rho() const { return lambda_rho_; }
  double conflict_radius() const { return double(conflict_radius_); }
  long double threshold_squared() const { return threshold_sq_; }
  EdgeRule rule() const { return rule_; }

  /// (rho*ell)^d, or CapExceeded if it does not fit in 64 bits.
  std::uint64_t vertex_count() const;
  bool in_bounds(const GridPoint& x) const;
  /// True iff squared distance d2 > 0 is an edge under the configured rule.
  bool is_edge_distance(std::int64_t d2) const {
    return d2 > 0 && (rule_ == EdgeRule::Strict ? (long double)d2 < threshold_sq_ : (long double)d2 <= threshold_sq_);
  }
  bool conflicts(const GridPoint& x, const GridPoint& y) const;
  std::int64_t squared_distance(const GridPoint& x, const GridPoint& y) const;

  /// Row-major index, first coordinate most significant.
  std::uint64_t index_of(const GridPoint& x) const;
  GridPoint point_at(std::uint64_t index) const;

  /// Offsets o != 0 with |o|^2 inside the conflict ball, lexicographic order.
  std::vector<GridPoint> conflict_offsets() const;

 private:
  Discretization(HardSphereInstance parent, std::int64_t side, EdgeRule rule, bool);

  HardSphereInstance parent_;
  std::int64_t side_ = 0;
  double rho_ = 0.0;
  double lambda_rho_ = 0.0;
  long double conflict_radius_ = 0.0L;
  long double threshold_sq_ = 0.0L;
  EdgeRule rule_ = EdgeRule::Strict;
};

std::vector<GridPoint> neighbors(const Discretization& disc, const GridPoint& x);

HardCoreInstance explicit_graph(const Discretization& disc, std::size_t cap = kDefaultExplicitGridCap);

/// Exact max degree of the grid graph, computed through the neighbor oracle.
std::uint64_t max_degree_exact(const Discretization& disc, std::uint64_t cap = 1u << 22);

/// Number of integer points x in Z^d with |x| <= s.
std::uint64_t integer_sphere_count(int d, double s, std::uint64_t box_cap = 100'000'000);

struct SphereBound {
  double bound = 0.0;          ///< (1+gamma) nu_d (rho s)^d
  double rho_threshold = 0.0;  ///< (2 sqrt d)^d / (gamma s)
  bool precondition_met = false;
};

/// Bound on the number of integer points within radius rho*s.
SphereBound integer_sphere_bound(int d, double s, double rho, double gamma);

struct DegreeBound {
  double bound = 0.0;          ///< (1+gamma)(2 rho)^d
  double rho_threshold = 0.0;  ///< (2 sqrt d)^d / (gamma 2r)
  bool precondition_met = false;
};

DegreeBound max_degree_bound(const Discretization& disc, double gamma);

/// lambda <= (1-delta) e / 2^d
bool check_fugacity_regime(const HardSphereInstance& instance, double delta);

/// lambda_rho <= (1 - delta/2) lambda_c(floor((1+delta/2)(2 rho)^d)). Degree bounds
/// below 3 have no finite threshold and always pass.
bool discretized_weight_below_threshold(const Discretization& disc, double delta);

/// Disjoint cover of the grid by cubes of side a, in row-major cell order.
class CellCover {
 public:
  explicit CellCover(const Discretization& disc);

  std::int64_t side() const { return a_; }
  std::int64_t cells_per_axis() const { return per_axis_; }
  std::uint64_t cell_count() const { return m_; }
  int dim() const { return d_; }

  std::uint64_t cell_of(const GridPoint& x) const;
  GridPoint cell_coords(std::uint64_t cell) const;
  std::uint64_t cell_index(const GridPoint& cell_coords) const;
  GridPoint lower_corner(std::uint64_t cell) const;
  /// Points per axis in this cell (boundary cells are truncated).
  std::array<std::int64_t, kMaxDimension> extents(std::uint64_t cell) const;
  std::uint64_t cell_size(std::uint64_t cell) const;
  /// k-th point of the cell in row-major order.
  GridPoint cell_point(std::uint64_t cell, std::uint64_t k) const;
  double clique_z(std::uint64_t cell) const { return 1.0 + double(cell_size(cell)) * lambda_rho_; }
  double max_clique_z() const;

  /// Explicit clique cover with vertex indices of explicit_graph.
  CliqueCover to_clique_cover(const Discretization& disc) const;

 private:
  int d_ = 1;
  std::int64_t side_ = 0;
  std::int64_t a_ = 0;
  std::int64_t per_axis_ = 0;
  std::uint64_t m_ = 0;
  double lambda_rho_ = 0.0;
};

struct Resolution {
  Discretization disc;
  double k_bound = 0.0;      ///< K = (ell sqrt d / (2r))^d
  double c_conv = 0.0;       ///< additive error constant, error <= c_conv / rho
  double error_bound = 0.0;  ///< c_conv / rho
  double rho_min = 0.0;      ///< max(2 sqrt d, rho_gamma, c_conv / eps')
};

/// 4 K^2 ell^(d(K-1)) sqrt(d) (2r+1)^d e^lambda
double convergence_constant(const HardSphereInstance& instance);

/// Smallest rho with rho*ell integral and rho >= max(2 sqrt d, rho_gamma, c_conv/eps').
Resolution choose_resolution(const HardSphereInstance& instance, double eps_prime, double gamma,
                             EdgeRule rule = EdgeRule::Strict);

/// Continuous 1-d hard-rod partition function for rods of length 1 on [0, ell).
double tonks_gas_z(double ell, double lambda);

}  // namespace hsm
