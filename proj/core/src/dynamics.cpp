#include "hsm/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

namespace hsm {

namespace {

Mask bit(Vertex v) { return Mask{1} << v; }

Mask to_mask(const VertexSet& s) {
  Mask m = 0;
  for (Vertex v : s) m |= bit(v);
  return m;
}

void require_valid(const HardCoreInstance& instance, const CliqueCover& cover) {
  auto report = validate_clique_cover(instance.graph(), cover);
  if (!report.valid) throw ValidationError("invalid clique cover: " + report.message);
}

void require_block_cover(const HardCoreInstance& instance, const BlockCover& cover) {
  std::vector<bool> seen(instance.size(), false);
  for (const auto& b : cover.blocks)
    for (Vertex v : b) {
      if (v >= instance.size()) throw ValidationError("block references vertex " + std::to_string(v) + " out of range");
      seen[v] = true;
    }
  for (std::size_t v = 0; v < seen.size(); ++v)
    if (!seen[v]) throw ValidationError("invalid block cover: vertex " + std::to_string(v) + " is not covered");
}

// Independent sets of G[block] as global masks with weights.
void block_sets(const HardCoreInstance& instance, const VertexSet& block, std::size_t cap, std::vector<Mask>& sets,
                std::vector<double>& weights) {
  if (block.size() > cap)
    throw CapExceeded("block of " + std::to_string(block.size()) + " vertices exceeds block cap " +
                      std::to_string(cap));
  auto sub = induced_subinstance(instance, block);
  for_each_independent_mask(
      sub.instance,
      [&](Mask local, double w) {
        Mask global = 0;
        for (Mask r = local; r; r &= r - 1) global |= bit(sub.original[std::countr_zero(r)]);
        sets.push_back(global);
        weights.push_back(w);
      },
      cap);
}

}  // namespace

ChainState::ChainState(std::size_t vertex_count, std::uint64_t seed) : occ_(vertex_count, 0), rng_(seed) {}

ChainState::ChainState(std::size_t vertex_count, std::uint64_t seed, const IndependentSet& start)
    : ChainState(vertex_count, seed) {
  for (Vertex v : start.members) {
    if (v >= vertex_count) throw ValidationError("start state references vertex out of range");
    occ_[v] = 1;
  }
}

IndependentSet ChainState::current() const {
  IndependentSet s;
  for (std::size_t v = 0; v < occ_.size(); ++v)
    if (occ_[v]) s.members.push_back(Vertex(v));
  return s;
}

CliqueDynamics::CliqueDynamics(const HardCoreInstance& instance, CliqueCover cover)
    : CliqueDynamics(instance, std::move(cover), true) {}

CliqueDynamics CliqueDynamics::unchecked(const HardCoreInstance& instance, CliqueCover cover) {
  return CliqueDynamics(instance, std::move(cover), false);
}

CliqueDynamics::CliqueDynamics(const HardCoreInstance& instance, CliqueCover cover, bool validate)
    : instance_(&instance), cover_(std::move(cover)) {
  if (validate) require_valid(instance, cover_);
  if (cover_.size() == 0 && instance.size() > 0) throw ValidationError("clique cover is empty");
  for (const auto& k : cover_.cliques) {
    double z = 1.0;
    for (Vertex v : k) z += instance.weight(v);
    std::vector<double> cum;
    cum.reserve(k.size() + 1);
    double acc = 1.0;
    cum.push_back(acc / z);
    for (Vertex v : k) {
      acc += instance.weight(v);
      cum.push_back(acc / z);
    }
    cum.back() = 1.0;
    cumulative_.push_back(std::move(cum));
    z_.push_back(z);
  }
}

std::int64_t CliqueDynamics::outcome(std::size_t clique, double u) const {
  const auto& cum = cumulative_[clique];
  auto pos = std::size_t(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
  if (pos == 0) return -1;
  pos = std::min(pos, cum.size() - 1);
  return std::int64_t(cover_.cliques[clique][pos - 1]);
}

void CliqueDynamics::step(ChainState& state) const {
  state.advance();
  if (cover_.size() == 0) return;
  const std::size_t i = std::size_t(state.rng().index(cover_.size()));
  const double u = state.rng().uniform();
  const std::int64_t picked = outcome(i, u);
  if (picked < 0) {
    for (Vertex v : cover_.cliques[i]) state.set(v, false);
    return;
  }
  const Vertex v = Vertex(picked);
  for (Vertex w : instance_->graph().neighbors(v))
    if (state.occupied(w)) return;  // X u {v} not independent: keep X
  state.set(v, true);
}

BlockDynamics::BlockDynamics(const HardCoreInstance& instance, BlockCover cover, std::size_t block_cap)
    : instance_(&instance) {
  require_block_cover(instance, cover);
  for (auto& verts : cover.blocks) {
    std::sort(verts.begin(), verts.end());
    Block b;
    b.vertices = verts;
    if (verts.size() > block_cap)
      throw CapExceeded("block of " + std::to_string(verts.size()) + " vertices exceeds block cap " +
                        std::to_string(block_cap));
    auto sub = induced_subinstance(instance, verts);
    for_each_independent_mask(
        sub.instance,
        [&](Mask local, double w) {
          b.sets.push_back(local);
          b.weights.push_back(w);
        },
        block_cap);
    for (Vertex v : verts) {
      VertexSet outside;
      for (Vertex u : instance.graph().neighbors(v))
        if (!std::binary_search(verts.begin(), verts.end(), u)) outside.push_back(u);
      b.outside_neighbors.push_back(std::move(outside));
    }
    blocks_.push_back(std::move(b));
  }
}

void BlockDynamics::step(ChainState& state) const {
  state.advance();
  if (blocks_.empty()) return;
  const Block& b = blocks_[std::size_t(state.rng().index(blocks_.size()))];
  const double u = state.rng().uniform();
  Mask forbidden = 0;
  for (std::size_t k = 0; k < b.vertices.size(); ++k)
    for (Vertex w : b.outside_neighbors[k])
      if (state.occupied(w)) {
        forbidden |= Mask{1} << k;
        break;
      }
  double total = 0.0;
  for (std::size_t j = 0; j < b.sets.size(); ++j)
    if ((b.sets[j] & forbidden) == 0) total += b.weights[j];
  const double target = u * total;
  double acc = 0.0;
  Mask chosen = 0;
  for (std::size_t j = 0; j < b.sets.size(); ++j) {
    if ((b.sets[j] & forbidden) != 0) continue;
    chosen = b.sets[j];
    acc += b.weights[j];
    if (target < acc) break;
  }
  for (std::size_t k = 0; k < b.vertices.size(); ++k) state.set(b.vertices[k], (chosen >> k & 1) != 0);
}

DynamicsKind DynamicsKind::clique(CliqueCover cover) {
  DynamicsKind k;
  k.type = Type::Clique;
  k.cliques = std::move(cover);
  return k;
}

DynamicsKind DynamicsKind::block(BlockCover cover) {
  DynamicsKind k;
  k.type = Type::Block;
  k.blocks = std::move(cover);
  return k;
}

DynamicsKind DynamicsKind::glauber() { return DynamicsKind{}; }

DynamicsKind DynamicsKind::as_lazy() const {
  DynamicsKind k = *this;
  k.lazy = true;
  return k;
}

Dynamics::Dynamics(const HardCoreInstance& instance, const DynamicsKind& kind) : lazy_(kind.lazy) {
  switch (kind.type) {
    case DynamicsKind::Type::Clique:
      clique_ = std::make_unique<CliqueDynamics>(instance, kind.cliques);
      break;
    case DynamicsKind::Type::Glauber:
      clique_ = std::make_unique<CliqueDynamics>(instance, CliqueCover::singletons(instance.size()));
      break;
    case DynamicsKind::Type::Block:
      block_ = std::make_unique<BlockDynamics>(instance, kind.blocks);
      break;
  }
}

void Dynamics::step(ChainState& state) const {
  if (lazy_ && state.rng().uniform() < 0.5) {
    state.advance();
    return;
  }
  if (clique_)
    clique_->step(state);
  else
    block_->step(state);
}

void clique_dynamics_step(const HardCoreInstance& instance, const CliqueCover& cover, ChainState& state) {
  CliqueDynamics(instance, cover).step(state);
}

void block_dynamics_step(const HardCoreInstance& instance, const BlockCover& cover, ChainState& state) {
  BlockDynamics(instance, cover).step(state);
}

ChainRun run_chain(const HardCoreInstance& instance, const DynamicsKind& kind, std::uint64_t steps,
                   std::uint64_t seed, std::uint64_t burn_in, std::uint64_t thin) {
  if (thin == 0) throw ValidationError("thin must be positive");
  Dynamics dyn(instance, kind);
  ChainState state(instance.size(), seed);
  ChainRun run;
  for (std::uint64_t t = 1; t <= steps; ++t) {
    dyn.step(state);
    if (t > burn_in && (t - burn_in) % thin == 0) {
      run.samples.push_back(state.current());
      run.times.push_back(t);
    }
  }
  run.final_state = state.current();
  return run;
}

void write_trajectory_jsonl(std::ostream& out, const ChainRun& run) {
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    out << "{\"t\":" << run.times[i] << ",\"set\":[";
    const auto& m = run.samples[i].members;
    for (std::size_t k = 0; k < m.size(); ++k) out << (k ? "," : "") << m[k];
    out << "]}\n";
  }
}

TransitionMatrix transition_matrix_exact(const HardCoreInstance& instance, const DynamicsKind& kind,
                                         std::size_t cap) {
  GibbsDistribution gibbs(instance, cap);
  const std::size_t ns = gibbs.size();
  const auto nbr = instance.graph().neighbor_masks();
  TransitionMatrix tm;
  tm.states = gibbs.states();
  tm.probabilities = Eigen::MatrixXd::Zero(Eigen::Index(ns), Eigen::Index(ns));
  auto& p = tm.probabilities;

  if (kind.type == DynamicsKind::Type::Block) {
    require_block_cover(instance, kind.blocks);
    const double pick = 1.0 / double(kind.blocks.size());
    for (const auto& block : kind.blocks.blocks) {
      std::vector<Mask> sets;
      std::vector<double> weights;
      block_sets(instance, block, kDefaultBlockCap, sets, weights);
      const Mask bmask = to_mask(block);
      for (std::size_t s = 0; s < ns; ++s) {
        const Mask outside = gibbs.masks()[s] & ~bmask;
        Mask forbidden = 0;
        for (Mask r = outside; r; r &= r - 1) forbidden |= nbr[std::countr_zero(r)];
        double total = 0.0;
        for (std::size_t j = 0; j < sets.size(); ++j)
          if ((sets[j] & forbidden) == 0) total += weights[j];
        for (std::size_t j = 0; j < sets.size(); ++j) {
          if ((sets[j] & forbidden) != 0) continue;
          p(Eigen::Index(s), Eigen::Index(gibbs.index_of(outside | sets[j]))) += pick * weights[j] / total;
        }
      }
    }
  } else {
    const CliqueCover cover =
        kind.type == DynamicsKind::Type::Glauber ? CliqueCover::singletons(instance.size()) : kind.cliques;
    require_valid(instance, cover);
    const double pick = 1.0 / double(cover.size());
    for (const auto& k : cover.cliques) {
      double z = 1.0;
      for (Vertex v : k) z += instance.weight(v);
      const Mask kmask = to_mask(k);
      for (std::size_t s = 0; s < ns; ++s) {
        const Mask cur = gibbs.masks()[s];
        p(Eigen::Index(s), Eigen::Index(gibbs.index_of(cur & ~kmask))) += pick / z;
        for (Vertex v : k) {
          const Mask next = (nbr[v] & cur) ? cur : (cur | bit(v));
          p(Eigen::Index(s), Eigen::Index(gibbs.index_of(next))) += pick * instance.weight(v) / z;
        }
      }
    }
  }
  if (kind.lazy) {
    p *= 0.5;
    p.diagonal().array() += 0.5;
  }
  return tm;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("distributions have mismatched support");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double stationarity_defect(const Eigen::MatrixXd& p, std::span<const double> pi) {
  Eigen::Map<const Eigen::RowVectorXd> row(pi.data(), Eigen::Index(pi.size()));
  Eigen::RowVectorXd next = row * p;
  return (next - row).cwiseAbs().maxCoeff();
}

double detailed_balance_defect(const Eigen::MatrixXd& p, std::span<const double> pi) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = i + 1; j < p.cols(); ++j)
      worst = std::max(worst, std::abs(pi[std::size_t(i)] * p(i, j) - pi[std::size_t(j)] * p(j, i)));
  return worst;
}

MixingTime mixing_time_exact(const Eigen::MatrixXd& p, std::span<const double> pi, std::size_t start,
                             double epsilon, std::uint64_t cap) {
  if (start >= pi.size()) throw ValidationError("start state out of range");
  Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(p.rows());
  dist(Eigen::Index(start)) = 1.0;
  MixingTime out;
  for (std::uint64_t t = 0;; ++t) {
    out.distance = tv_distance({dist.data(), std::size_t(dist.size())}, pi);
    out.steps = t;
    if (out.distance <= epsilon) {
      out.mixed = true;
      return out;
    }
    if (t == cap) return out;
    dist = dist * p;
  }
}

MixingTime mixing_time_exact(const HardCoreInstance& instance, const DynamicsKind& kind, double epsilon,
                             const IndependentSet& start, std::uint64_t cap) {
  GibbsDistribution gibbs(instance);
  auto tm = transition_matrix_exact(instance, kind);
  return mixing_time_exact(tm.probabilities, gibbs.probabilities(), gibbs.index_of(start), epsilon, cap);
}

SpectralGap spectral_gap(const Eigen::MatrixXd& p, std::span<const double> pi, double tolerance) {
  if (p.rows() != p.cols() || std::size_t(p.rows()) != pi.size())
    throw ValidationError("matrix and stationary vector dimensions disagree");
  if (p.rows() < 2) throw ValidationError("spectral gap needs at least two states");
  const double defect = detailed_balance_defect(p, pi);
  if (defect > tolerance)
    throw ValidationError("detailed balance violated (defect " + std::to_string(defect) + ")");
  Eigen::VectorXd s(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) s(i) = std::sqrt(pi[std::size_t(i)]);
  Eigen::MatrixXd a = s.asDiagonal() * p * s.cwiseInverse().asDiagonal();
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  SpectralGap g;
  g.lambda_min = ev(0);
  g.lambda2 = ev(ev.size() - 2);
  g.gap = 1.0 - std::max(g.lambda2, std::abs(g.lambda_min));
  return g;
}

double mixing_time_bound(const SpectralGap& gap, double pi_min, double epsilon) {
  if (gap.gap <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(1.0 / (pi_min * epsilon)) / gap.gap;
}

}  // namespace hsm
