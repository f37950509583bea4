#include "hsm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <json.hpp>

#include "hsm/dynamics.hpp"
#include "hsm/generators.hpp"
#include "hsm/hs_model.hpp"
#include "hsm/io.hpp"
#include "hsm/rng.hpp"
#include "hsm/spectral.hpp"
#include "parallel.hpp"

namespace hsm {

void LemmaResult::record(double observed, double allowed, double tolerance, const std::string& digest) {
  ++checks;
  const double slack = allowed - observed;
  if (slack < worst_slack) {
    worst_slack = slack;
    worst_instance = digest;
  }
  if (!(observed <= allowed + tolerance)) passed = false;
}

void LemmaResult::merge(const LemmaResult& other) {
  checks += other.checks;
  passed = passed && other.passed;
  if (other.worst_slack < worst_slack) {
    worst_slack = other.worst_slack;
    worst_instance = other.worst_instance;
  }
}

bool VerificationReport::passed() const {
  return std::all_of(lemmas.begin(), lemmas.end(), [](const LemmaResult& l) { return l.passed; });
}

namespace {

constexpr std::size_t kMaxStates = 2000;

struct Sink {
  std::vector<LemmaResult> lemmas;
  std::vector<std::string> notes;

  LemmaResult& at(const std::string& name) {
    for (auto& l : lemmas)
      if (l.name == name) return l;
    lemmas.emplace_back().name = name;
    return lemmas.back();
  }
};

void merge_into(VerificationReport& rep, const Sink& sink) {
  for (const auto& l : sink.lemmas) {
    auto it = std::find_if(rep.lemmas.begin(), rep.lemmas.end(), [&](const LemmaResult& x) { return x.name == l.name; });
    if (it == rep.lemmas.end())
      rep.lemmas.push_back(l);
    else
      it->merge(l);
  }
  rep.diagnostics.insert(rep.diagnostics.end(), sink.notes.begin(), sink.notes.end());
}

std::size_t state_count(const HardCoreInstance& inst) {
  std::size_t count = 0;
  for_each_independent_mask(inst, [&](Mask, double) {
    if (++count > kMaxStates) throw CapExceeded("too many independent sets for dense verification");
  });
  return count;
}

bool small_enough(const HardCoreInstance& inst, std::size_t max_n) {
  if (inst.size() > max_n) return false;
  try {
    state_count(inst);
  } catch (const CapExceeded&) {
    return false;
  }
  return true;
}

/// Copy of inst with weights lowered until the strict CDC holds for mu = 1 and alpha.
HardCoreInstance cdc_scaled(const HardCoreInstance& inst, double alpha) {
  const double delta = double(std::max<std::size_t>(1, inst.graph().max_degree()));
  const double t = (1.0 - alpha) / delta;  // lambda/(1+lambda) <= t
  const double cap = t / (1.0 - t);
  std::vector<double> w = inst.weights();
  for (double& x : w) x = std::min(x, cap);
  return HardCoreInstance(inst.graph(), std::move(w));
}

CliqueCover disjoint_cover_for(const HardCoreInstance& inst, Rng& rng) {
  CliqueCover cover = disjoint_nonempty(inst.graph(), random_clique_cover(inst.graph(), rng));
  if (cover.size() < 2) cover = CliqueCover::singletons(inst.size());
  return cover;
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return a.rows() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

void stationarity_suite(const HardCoreInstance& inst, Rng& rng, Sink& s, const std::string& id) {
  if (!small_enough(inst, 16)) {
    s.notes.push_back("stationarity: skipped " + id + " (too large for dense matrices)");
    return;
  }
  const GibbsDistribution gibbs(inst);
  const auto& pi = gibbs.probabilities();
  std::vector<DynamicsKind> kinds{DynamicsKind::glauber()};
  for (const auto& cover : {greedy_clique_cover(inst.graph()), random_clique_cover(inst.graph(), rng)}) {
    kinds.push_back(DynamicsKind::clique(cover));
    kinds.push_back(DynamicsKind::clique(cover).as_lazy());
    kinds.push_back(DynamicsKind::block(BlockCover::from_cliques(cover)));
  }
  for (const auto& kind : kinds) {
    const auto p = transition_matrix_exact(inst, kind);
    s.at("stationarity").record(stationarity_defect(p.probabilities, pi), 1e-10, 0.0, id);
    s.at("detailed_balance").record(detailed_balance_defect(p.probabilities, pi), 1e-10, 0.0, id);
    const double rows = (p.probabilities.rowwise().sum().array() - 1.0).abs().maxCoeff();
    s.at("stochastic_rows").record(rows, 1e-12, 0.0, id);
  }
}

void influence_suite(const HardCoreInstance& inst, Rng& rng, Sink& s, const std::string& id) {
  const std::size_t n = inst.size();
  if (n > 12 || n < 2) {
    s.notes.push_back("influence: skipped " + id + " (needs 2 <= n <= 12)");
    return;
  }
  const auto psi = pairwise_influence(inst);
  const auto marg = marginals(inst);
  double range = 0.0;
  for (Vertex v = 0; v < n; ++v)
    for (Vertex w = 0; w < n; ++w)
      range = std::max(range, v == w ? std::abs(psi(v, w)) : std::max(0.0, std::abs(psi(v, w)) - 1.0));
  s.at("influence_diagonal_and_range").record(range, 1e-15, 0.0, id);

  for (auto [v, w] : inst.graph().edges()) {
    s.at("probability_bound").record(marg[w].occupied, -psi(v, w), 1e-12, id);
    s.at("probability_bound").record(marg[v].occupied, -psi(w, v), 1e-12, id);
  }

  // Vacant conditioning on S equals influence in G[V \ S].
  VertexSet cond, rest;
  for (Vertex v = 0; v < n; ++v) (rng.uniform() < 0.3 && cond.size() + 2 < n ? cond : rest).push_back(v);
  if (!cond.empty()) {
    const auto conditioned = pairwise_influence(inst, PartialConfig::all_vacant(cond));
    const auto sub = induced_subinstance(inst, rest);
    const auto direct = pairwise_influence(sub.instance);
    double defect = 0.0;
    for (std::size_t i = 0; i < rest.size(); ++i)
      for (std::size_t j = 0; j < rest.size(); ++j)
        defect = std::max(defect, std::abs(conditioned(rest[i], rest[j]) - direct(Vertex(i), Vertex(j))));
    s.at("conditional_coherence").record(defect, 1e-12, 0.0, id);
  }

  if (n <= 10) {
    const double alpha = 0.3;
    const auto scaled = cdc_scaled(inst, alpha);
    const auto rep = cdc_implies_influence_bound_check(scaled, std::vector<double>(n, 1.0), alpha);
    s.at("cdc_implies_influence_condition").record(-rep.influence.worst_slack, 0.0, kBoundTolerance, id);
  }

  if (n <= 8) {
    const auto asym = sign_asymmetric_pairs(psi);
    if (!asym.empty())
      s.notes.push_back("influence sign asymmetry on " + id + ": " + std::to_string(asym.size()) + " pair(s)");
  }
}

void saw_suite(const HardCoreInstance& inst, Rng& rng, Sink& s, const std::string& id) {
  const std::size_t n = inst.size();
  if (n <= 9) {
    for (Vertex root = 0; root < n; ++root) {
      try {
        const auto rep = verify_saw_influence(inst, root);
        s.at("saw_influence").record(rep.max_discrepancy, 1e-10, 0.0, id);
        s.at("saw_surgery_agreement").record(rep.surgery_discrepancy, 1e-10, 0.0, id);
        const double alpha = 0.3;
        const auto decay = influence_decay_check(cdc_scaled(inst, alpha), root, std::vector<double>(n, 1.0), alpha);
        for (std::size_t k = 0; k < decay.layer_sums.size(); ++k)
          s.at("influence_decay").record(decay.layer_sums[k], decay.bounds[k], 1e-12, id);
      } catch (const CapExceeded& e) {
        s.notes.push_back("saw: skipped root " + std::to_string(root) + " of " + id + ": " + e.what());
      }
    }
  } else {
    s.notes.push_back("saw: skipped " + id + " (needs n <= 9)");
  }
  // A fresh random tree per instance for the multiplicativity identity.
  const std::size_t tn = 3 + rng.index(10);
  const HardCoreInstance tree(random_tree(tn, rng), random_weights(tn, 0.2, 2.0, rng));
  const auto mult = verify_tree_multiplicativity(tree);
  s.at("tree_multiplicativity").record(mult.max_defect, 1e-12, 0.0, instance_digest(tree));
}

void complex_suite(const HardCoreInstance& inst, Rng& rng, Sink& s, const std::string& id) {
  const std::size_t n = inst.size();
  if (n < 2 || !small_enough(inst, 12)) {
    s.notes.push_back("complex: skipped " + id + " (needs 2 <= n <= 12 and few independent sets)");
    return;
  }
  const CliqueCover cover = disjoint_cover_for(inst, rng);
  const ComplexRep rep(inst, cover);
  const std::size_t m = rep.dimension();

  double total = 0.0;
  for (double w : rep.face_weights()) total += w;
  s.at("face_weights_normalized").record(std::abs(total - 1.0), 1e-12, 0.0, id);

  const auto two_step = two_step_walk_matrix(rep);
  const auto block = transition_matrix_exact(inst, DynamicsKind::block(BlockCover::from_cliques(cover)));
  s.at("two_step_block_equivalence").record(max_abs_diff(two_step.probabilities, block.probabilities), 1e-12, 0.0, id);
  s.at("two_step_stationary").record(stationarity_defect(two_step.probabilities, rep.face_weights()), 1e-12, 0.0, id);

  const auto sk = skeleton_walk_matrix(rep);
  s.at("skeleton_reversibility").record(detailed_balance_defect(sk.probabilities, sk.stationary), 1e-12, 0.0, id);
  double mass = 0.0;
  for (std::size_t a = 0; a < sk.elements.size(); ++a) {
    std::vector<double> per(m, 0.0);
    for (std::size_t b = 0; b < sk.elements.size(); ++b) per[rep.ground()[sk.elements[b]].partition] += sk.probabilities(a, b);
    const std::size_t own = rep.ground()[sk.elements[a]].partition;
    for (std::size_t j = 0; j < m; ++j)
      mass = std::max(mass, std::abs(per[j] - (j == own ? 0.0 : 1.0 / double(m - 1))));
  }
  s.at("skeleton_partition_mass").record(mass, 1e-12, 0.0, id);
  const auto scaled = skeleton_walk_matrix(rep.scaled(3.7));
  s.at("complex_scale_invariance").record(max_abs_diff(scaled.probabilities, sk.probabilities), 1e-12, 0.0, id);

  const auto k = clique_influence_matrix(rep).entries;
  double row_identity = 0.0;
  for (std::size_t x = 0; x < rep.ground_size(); ++x)
    for (std::size_t j = 0; j < m; ++j) {
      if (rep.ground()[x].partition == j) continue;
      double sum = 0.0;
      for (std::size_t y : rep.partitions()[j]) sum += k(x, y);  // o_j plus every c_v
      row_identity = std::max(row_identity, std::abs(sum));
    }
  s.at("influence_on_clique").record(row_identity, 1e-12, 0.0, id);

  const auto psi = pairwise_influence(inst);
  const auto marg = marginals(inst);
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<bool> in_i(n, false);
    for (Vertex v : cover.cliques[i]) in_i[v] = true;
    for (Vertex v : cover.cliques[i])
      for (Vertex w = 0; w < n; ++w)
        if (!in_i[w])
          first = std::max(first, std::abs(k(rep.vertex_element(v), rep.vertex_element(w)) - marg[v].vacant * psi(v, w)));
    // Psi^K(o_i, c_w) = -sum_v mu(1_v) Psi_{G_v}(v, w), G_v = G minus (K_i \ {v}).
    std::vector<double> expected(n, 0.0);
    for (Vertex v : cover.cliques[i]) {
      VertexSet keep;
      for (Vertex u = 0; u < n; ++u)
        if (!in_i[u] || u == v) keep.push_back(u);
      const auto gv = induced_subinstance(inst, keep);
      const auto psi_v = pairwise_influence(gv.instance);
      const auto pos = [&](Vertex u) { return Vertex(std::lower_bound(keep.begin(), keep.end(), u) - keep.begin()); };
      for (Vertex w = 0; w < n; ++w)
        if (!in_i[w]) expected[w] -= marg[v].occupied * psi_v(pos(v), pos(w));
    }
    for (Vertex w = 0; w < n; ++w)
      if (!in_i[w]) second = std::max(second, std::abs(k(rep.empty_element(i), rep.vertex_element(w)) - expected[w]));
  }
  s.at("clique_to_pairwise_vertex").record(first, 1e-12, 0.0, id);
  s.at("clique_to_pairwise_empty").record(second, 1e-10, 0.0, id);
}

void bounds_suite(const HardCoreInstance& inst, Rng& rng, Sink& s, const std::string& id) {
  const std::size_t n = inst.size();
  if (n >= 2 && small_enough(inst, 12)) {
    const CliqueCover cover = disjoint_cover_for(inst, rng);
    for (const auto& c : verify_spectral_bounds(inst, cover).checks) s.at(c.name).record(c.lhs, c.rhs, kBoundTolerance, id);
    const auto cmp = check_clique_block_comparison(inst, random_clique_cover(inst.graph(), rng));
    s.at(cmp.name).record(cmp.lhs, cmp.rhs, kBoundTolerance, id);
    if (cover.size() <= 6) {
      const auto prof = local_expansion_profile(ComplexRep(inst, cover));
      s.at("local_expansion_two_step").record(prof.two_step_lambda2, prof.implied_bound, kBoundTolerance, id);
    }
  } else {
    s.notes.push_back("bounds: skipped " + id + " (needs 2 <= n <= 12 and few independent sets)");
  }
  const std::size_t k = 2 + rng.index(6);
  Eigen::MatrixXd a(k, k);
  std::vector<double> p(k);
  for (auto& x : p) x = 0.2 + rng.uniform();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) = 2.0 * rng.uniform() - 1.0;
  double xi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += std::abs(a(i, j)) * p[j];
    xi = std::max(xi, row / p[i]);
  }
  const auto sr = spectral_radius_bound_check(a, p, xi);
  s.at("spectral_radius_row_condition").record(sr.spectral_radius, xi, kBoundTolerance, "random-matrix");
}

void global_bounds(Sink& s) {
  for (int d = 1; d <= 2; ++d) {
    for (std::int64_t side = 2; side <= (d == 1 ? 64 : 32); ++side) {
      const Discretization disc = Discretization::from_grid_side({d, 2.0, 1.0}, side);
      const auto bound = max_degree_bound(disc, 0.5);
      if (!bound.precondition_met) continue;
      s.at("degree_bound").record(double(max_degree_exact(disc)), bound.bound, 0.0,
                                  "grid d=" + std::to_string(d) + " side=" + std::to_string(side));
    }
  }
  for (std::uint64_t delta = 3; delta <= 200; ++delta)
    s.at("tree_threshold_above_e").record(std::numbers::e, double(delta) * tree_threshold(delta), 0.0,
                                          "delta=" + std::to_string(delta));
}

using SuiteFn = void (*)(const HardCoreInstance&, Rng&, Sink&, const std::string&);

}  // namespace

std::vector<HardCoreInstance> builtin_verification_instances(std::uint64_t seed, std::size_t random_count) {
  std::vector<HardCoreInstance> out{
      HardCoreInstance::uniform(path_graph(5), 1.0),     HardCoreInstance::uniform(cycle_graph(5), 1.0),
      HardCoreInstance::uniform(cycle_graph(6), 0.7),    HardCoreInstance::uniform(complete_graph(4), 1.0),
      HardCoreInstance::uniform(star_graph(3), 1.0),     HardCoreInstance::uniform(edgeless_graph(3), 1.0),
      explicit_graph(Discretization({1, 3.0, 1.0}, 2.0)), explicit_graph(Discretization({2, 3.0, 0.5}, 1.0)),
  };
  Rng rng(derive_seed(seed, {0xF00D}));
  for (std::size_t i = 0; i < random_count; ++i) {
    const std::size_t n = 4 + rng.index(5);
    Graph g = random_graph(n, 0.2 + 0.4 * rng.uniform(), rng);
    out.emplace_back(std::move(g), random_weights(n, 0.2, 2.0, rng));
  }
  return out;
}

VerificationReport run_verification(const std::string& suite, std::uint64_t seed,
                                    std::vector<HardCoreInstance> instances, unsigned threads) {
  const auto& names = verification_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw ValidationError("unknown verification suite '" + suite + "'");
  if (instances.empty()) instances = builtin_verification_instances(seed);

  std::vector<std::pair<std::string, SuiteFn>> fns;
  auto want = [&](const char* name) { return suite == "all" || suite == name; };
  if (want("stationarity")) fns.emplace_back("stationarity", stationarity_suite);
  if (want("influence")) fns.emplace_back("influence", influence_suite);
  if (want("saw")) fns.emplace_back("saw", saw_suite);
  if (want("complex")) fns.emplace_back("complex", complex_suite);
  if (want("bounds")) fns.emplace_back("bounds", bounds_suite);

  std::vector<Sink> sinks(instances.size());
  detail::parallel_for(instances.size(), threads, [&](std::size_t i) {
    const std::string id = instance_digest(instances[i]);
    for (std::size_t f = 0; f < fns.size(); ++f) {
      Rng rng(derive_seed(seed, {i, f}));
      fns[f].second(instances[i], rng, sinks[i], id);
    }
  });

  VerificationReport rep;
  rep.suite = suite;
  rep.seed = seed;
  rep.instances = instances.size();
  for (const auto& sink : sinks) merge_into(rep, sink);
  if (want("bounds")) {
    Sink global;
    global_bounds(global);
    merge_into(rep, global);
  }
  return rep;
}

std::string verification_report_to_json(const VerificationReport& report) {
  using nlohmann::json;
  json lemmas = json::array();
  for (const auto& l : report.lemmas) {
    json j{{"name", l.name}, {"passed", l.passed}, {"checks", l.checks}, {"worst_instance", l.worst_instance}};
    j["worst_slack"] = std::isfinite(l.worst_slack) ? json(l.worst_slack) : json(nullptr);
    lemmas.push_back(std::move(j));
  }
  json j{{"suite", report.suite},
         {"seed", report.seed},
         {"instances", report.instances},
         {"passed", report.passed()},
         {"lemmas", std::move(lemmas)},
         {"diagnostics", report.diagnostics}};
  return j.dump(2);
}

}  // namespace hsm
