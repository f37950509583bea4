#pragma once
// Deliberately naive reference computations. Nothing here calls into the library's
// enumeration or dynamics code; only the Graph/Instance containers are shared.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hsm/generators.hpp"
#include "hsm/hardcore.hpp"
#include "hsm/rng.hpp"

namespace oracle {

using hsm::HardCoreInstance;
using hsm::Mask;
using hsm::Vertex;

inline bool independent_mask(const hsm::Graph& g, Mask m) {
  for (Vertex u = 0; u < g.vertex_count(); ++u)
    for (Vertex v = u + 1; v < g.vertex_count(); ++v)
      if ((m >> u & 1) && (m >> v & 1) && g.adjacent(u, v)) return false;
  return true;
}

inline double mask_weight(const HardCoreInstance& inst, Mask m) {
  double w = 1.0;
  for (Vertex v = 0; v < inst.size(); ++v)
    if (m >> v & 1) w *= inst.weight(v);
  return w;
}

/// All independent masks in increasing numeric order.
inline std::vector<Mask> independent_masks(const HardCoreInstance& inst, Mask within = ~Mask{0}) {
  std::vector<Mask> out;
  const Mask full = (Mask{1} << inst.size()) - 1;
  for (Mask m = 0; m <= full; ++m)
    if ((m & ~within) == 0 && independent_mask(inst.graph(), m)) out.push_back(m);
  return out;
}

/// Z of the subgraph induced by `within`.
inline double z(const HardCoreInstance& inst, Mask within = ~Mask{0}) {
  double s = 0.0;
  for (Mask m : independent_masks(inst, within)) s += mask_weight(inst, m);
  return s;
}

inline double occupation(const HardCoreInstance& inst, Vertex v) {
  double num = 0.0, den = 0.0;
  for (Mask m : independent_masks(inst)) {
    const double w = mask_weight(inst, m);
    den += w;
    if (m >> v & 1) num += w;
  }
  return num / den;
}

/// mu(1_w | 1_v) - mu(1_w | 0_v).
inline double influence(const HardCoreInstance& inst, Vertex v, Vertex w) {
  double a1 = 0, n1 = 0, a0 = 0, n0 = 0;
  for (Mask m : independent_masks(inst)) {
    const double x = mask_weight(inst, m);
    if (m >> v & 1) {
      n1 += x;
      if (m >> w & 1) a1 += x;
    } else {
      n0 += x;
      if (m >> w & 1) a0 += x;
    }
  }
  return a1 / n1 - a0 / n0;
}

inline std::size_t state_index(const std::vector<Mask>& states, Mask m) {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == m) return i;
  return states.size();
}

/// Clique dynamics as a matrix over `states`: pick a clique uniformly, draw empty
/// (weight 1) or one member v (weight lambda_v); empty clears the clique, v is added
/// only if the result stays independent, otherwise nothing changes.
inline Eigen::MatrixXd clique_matrix(const HardCoreInstance& inst, const hsm::CliqueCover& cover,
                                     const std::vector<Mask>& states) {
  const auto n = states.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const double pick = 1.0 / double(cover.size());
  for (std::size_t s = 0; s < n; ++s) {
    const Mask x = states[s];
    for (const auto& k : cover.cliques) {
      double zk = 1.0;
      Mask km = 0;
      for (Vertex v : k) zk += inst.weight(v), km |= Mask{1} << v;
      p(s, state_index(states, x & ~km)) += pick / zk;
      for (Vertex v : k) {
        const Mask y = x | (Mask{1} << v);
        const std::size_t t = independent_mask(inst.graph(), y) ? state_index(states, y) : s;
        p(s, t) += pick * inst.weight(v) / zk;
      }
    }
  }
  return p;
}

/// Heat-bath block dynamics: resample block B from the Gibbs law given X outside B.
inline Eigen::MatrixXd block_matrix(const HardCoreInstance& inst, const std::vector<std::vector<Vertex>>& blocks,
                                    const std::vector<Mask>& states) {
  const auto n = states.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (const auto& b : blocks) {
    Mask bm = 0;
    for (Vertex v : b) bm |= Mask{1} << v;
    for (std::size_t s = 0; s < n; ++s) {
      const Mask outside = states[s] & ~bm;
      double zc = 0.0;
      for (std::size_t t = 0; t < n; ++t)
        if ((states[t] & ~bm) == outside) zc += mask_weight(inst, states[t] & bm);
      for (std::size_t t = 0; t < n; ++t)
        if ((states[t] & ~bm) == outside)
          p(s, t) += mask_weight(inst, states[t] & bm) / zc / double(blocks.size());
    }
  }
  return p;
}

/// Z of the d = 1 grid {0..side-1} where chosen points must be at least `gap` apart,
/// each weighted lambda_rho: Z(k) = Z(k-1) + lambda_rho Z(k-gap), Z(<=0) = 1.
inline double grid_line_z(std::int64_t side, double lambda_rho, std::int64_t gap) {
  std::vector<double> zz(std::size_t(side) + 1, 1.0);
  for (std::int64_t k = 1; k <= side; ++k)
    zz[std::size_t(k)] = zz[std::size_t(k - 1)] + lambda_rho * (k - gap >= 0 ? zz[std::size_t(k - gap)] : 1.0);
  return zz[std::size_t(side)];
}

/// Hard rods of unit length with centers in [0, ell): sum_k lambda^k (ell-k+1)^k / k!.
inline double hard_rods_z(double ell, double lambda) {
  double s = 1.0, fact = 1.0;
  for (int k = 1; ell - k + 1 > 0; ++k) {
    fact *= k;
    s += std::pow(lambda, k) * std::pow(ell - k + 1, k) / fact;
  }
  return s;
}

inline HardCoreInstance random_instance(hsm::Rng& rng, std::size_t n, double p, double lo, double hi) {
  return HardCoreInstance(hsm::random_graph(n, p, rng), hsm::random_weights(n, lo, hi, rng));
}

}  // namespace oracle
