#include <doctest.h>

#include <cmath>

#include "hsm/dynamics.hpp"
#include "hsm/generators.hpp"
#include "hsm/spectral.hpp"
#include "oracles.hpp"

using namespace hsm;

namespace {

Mask bit(Vertex v) { return Mask{1} << v; }

/// P(event b | event a) - P(event b), events given as predicates on masks.
template <class A, class B>
double event_influence(const HardCoreInstance& inst, A a, B b) {
  double pa = 0, pb = 0, pab = 0, z = 0;
  for (Mask m : oracle::independent_masks(inst)) {
    const double w = oracle::mask_weight(inst, m);
    z += w;
    if (a(m)) pa += w;
    if (b(m)) pb += w;
    if (a(m) && b(m)) pab += w;
  }
  return pab / pa - pb / z;
}

}  // namespace

TEST_CASE("pairwise influence against the definition") {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto inst = oracle::random_instance(rng, 2 + rng.index(7), 0.4, 0.2, 2.0);
    const auto psi = pairwise_influence(inst);
    const auto marg = marginals(inst);
    for (Vertex v = 0; v < inst.size(); ++v) {
      CHECK(psi(v, v) == 0.0);
      for (Vertex w = 0; w < inst.size(); ++w) {
        if (v == w) continue;
        CHECK(psi(v, w) == doctest::Approx(oracle::influence(inst, v, w)).epsilon(1e-12).scale(1.0));
        // both sides equal the covariance of the two occupation indicators
        const double lhs = psi(v, w) * marg[v].occupied * marg[v].vacant;
        const double rhs = psi(w, v) * marg[w].occupied * marg[w].vacant;
        CHECK(std::abs(lhs - rhs) < 1e-13);
      }
    }
    CHECK(sign_asymmetric_pairs(psi).empty());
  }
}

TEST_CASE("P3 influences by hand") {
  const auto psi = pairwise_influence(HardCoreInstance::uniform(path_graph(3), 1.0));
  CHECK(psi(0, 1) == doctest::Approx(-1.0 / 3.0));
  CHECK(psi(0, 2) == doctest::Approx(1.0 / 6.0));
  CHECK(psi(1, 2) == doctest::Approx(-0.5));
  CHECK(psi(0, 2) == doctest::Approx(psi(0, 1) * psi(1, 2)));
}

TEST_CASE("conditioned influence and undefined entries") {
  const auto inst = HardCoreInstance::uniform(path_graph(3), 1.0);
  const auto psi = pairwise_influence(inst, PartialConfig().set(1, false));
  CHECK(psi.vertices == VertexSet{0, 2});
  CHECK(psi(0, 2) == doctest::Approx(0.0));
  CHECK_THROWS_AS(pairwise_influence(inst, PartialConfig().set(0, true).set(1, true)), ValidationError);
  // with 0 occupied, vertex 1 can never be occupied, so conditioning on 1_1 is undefined
  const auto cond = pairwise_influence(inst, PartialConfig().set(0, true));
  CHECK_FALSE(cond.defined(cond.position(1), cond.position(2)));
  CHECK_THROWS_AS(cond(1, 2), NumericError);
}

TEST_CASE("subset influence matches induced subgraphs") {
  Rng rng(32);
  const auto inst = oracle::random_instance(rng, 7, 0.4, 0.3, 1.8);
  const SubsetInfluence fast(inst);
  for (Mask s : {Mask{0x7f}, Mask{0x35}, Mask{0x4b}, Mask{0x0e}}) {
    VertexSet members;
    for (Vertex v = 0; v < 7; ++v)
      if (s & bit(v)) members.push_back(v);
    const auto sub = induced_subinstance(inst, members);
    const auto psi = pairwise_influence(sub.instance);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = 0; j < members.size(); ++j)
        CHECK(fast(s, members[i], members[j]) ==
              doctest::Approx(psi(Vertex(i), Vertex(j))).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("subset policies") {
  CHECK(policy_subsets(4, SubsetPolicy::exhaustive()).size() == 15);
  CHECK_THROWS_AS(policy_subsets(kExhaustiveSubsetCap + 1, SubsetPolicy::exhaustive()), CapExceeded);
  const auto a = policy_subsets(20, SubsetPolicy::sampled(50, 7));
  CHECK(a.size() == 50);
  CHECK(a == policy_subsets(20, SubsetPolicy::sampled(50, 7)));
  for (Mask s : a) CHECK((s != 0 && s < (Mask{1} << 20)));
}

TEST_CASE("influence condition") {
  const auto inst = HardCoreInstance::uniform(path_graph(3), 1.0);
  const std::vector<double> q(3, 1.0);
  const auto loose = check_influence_condition(inst, q, 10.0);
  CHECK(loose.holds);
  CHECK(loose.checked_subsets == 7);
  // the worst row is the middle vertex of P3: |-1/2| + |-1/2|
  CHECK(loose.worst_ratio == doctest::Approx(1.0));
  const auto tight = check_influence_condition(inst, q, 0.9);
  CHECK_FALSE(tight.holds);
  REQUIRE(tight.counterexample.has_value());
  CHECK(tight.counterexample->lhs > tight.counterexample->rhs);
  CHECK_THROWS_AS(check_influence_condition(inst, {1.0, 0.0, 1.0}, 1.0), ValidationError);
}

TEST_CASE("strict CDC and its consequence") {
  const auto star = HardCoreInstance::uniform(star_graph(4), 0.2);
  // neighbors contribute lambda/(1+lambda) = 1/6 each; the center sees four of them
  const std::vector<double> mu(5, 1.0);
  const auto cdc = check_strict_cdc(star, mu, 0.3);
  CHECK(cdc.holds);
  CHECK(cdc.lhs[0] == doctest::Approx(4.0 / 6.0));
  CHECK_FALSE(check_strict_cdc(star, mu, 0.4).holds);
  const auto rep = cdc_implies_influence_bound_check(star, mu, 0.3);
  CHECK(rep.passed);
  CHECK(rep.influence.c == doctest::Approx(1.0 / 0.3));
  CHECK_THROWS_AS(cdc_implies_influence_bound_check(star, mu, 0.4), ValidationError);
  CHECK_THROWS_AS(check_strict_cdc(star, mu, 1.0), ValidationError);
}

TEST_CASE("SAW tree of a triangle") {
  const auto inst = HardCoreInstance::uniform(complete_graph(3), 1.0);
  const SawTree tree(inst, 0);
  CHECK(tree.size() == 7);
  int fixed1 = 0, fixed0 = 0;
  for (const auto& node : tree.nodes()) {
    fixed1 += node.status == SawStatus::Fixed1;
    fixed0 += node.status == SawStatus::Fixed0;
    if (node.status != SawStatus::Free) CHECK(node.origin == 0);
  }
  CHECK(fixed1 == 1);
  CHECK(fixed0 == 1);
  CHECK(tree.copies(1).size() == 2);
  const auto rep = verify_saw_influence(inst, 0);
  CHECK(rep.graph_influence[1] == doctest::Approx(-1.0 / 3.0));
  CHECK(rep.tree_influence[1] == doctest::Approx(-1.0 / 3.0));
  CHECK(rep.max_discrepancy < 1e-12);
  CHECK(rep.surgery_discrepancy < 1e-12);
}

TEST_CASE("SAW identity on small connected graphs") {
  Rng rng(33);
  for (std::size_t n = 2; n <= 5; ++n) {
    for (const auto& g : all_connected_graphs(n)) {
      const HardCoreInstance inst(g, random_weights(n, 0.2, 2.0, rng));
      for (Vertex r = 0; r < n; ++r) {
        const auto rep = verify_saw_influence(inst, r);
        CHECK(rep.max_discrepancy < 1e-10);
        CHECK(rep.surgery_discrepancy < 1e-10);
      }
    }
  }
}

TEST_CASE("connected graph enumeration") {
  // connected labelled graphs: 1, 1, 4, 38, 728
  CHECK(all_connected_graphs(1).size() == 1);
  CHECK(all_connected_graphs(2).size() == 1);
  CHECK(all_connected_graphs(3).size() == 4);
  CHECK(all_connected_graphs(4).size() == 38);
  CHECK(all_connected_graphs(5).size() == 728);
  CHECK_THROWS_AS(all_connected_graphs(7), Error);
}

TEST_CASE("forests and tree multiplicativity") {
  Rng rng(34);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.index(11);
    const HardCoreInstance tree(random_tree(n, rng), random_weights(n, 0.2, 2.0, rng));
    const auto rep = verify_tree_multiplicativity(tree);
    CHECK(rep.max_defect < 1e-12);
    const Vertex r = Vertex(rng.index(n));
    const auto fast = forest_root_influence(tree, r);
    for (Vertex w = 0; w < n; ++w)
      if (w != r) CHECK(fast[w] == doctest::Approx(oracle::influence(tree, r, w)).epsilon(1e-12).scale(1.0));
  }
  CHECK_THROWS_AS(forest_root_influence(HardCoreInstance::uniform(cycle_graph(4), 1.0), 0), ValidationError);
  CHECK_THROWS_AS(verify_tree_multiplicativity(HardCoreInstance::uniform(cycle_graph(4), 1.0)), ValidationError);
  // two components: the root cannot influence the other one
  const auto forest = HardCoreInstance::uniform(Graph::from_edges(4, {{0, 1}, {2, 3}}), 1.0);
  CHECK(forest_root_influence(forest, 0)[3] == 0.0);
}

TEST_CASE("influence decay by depth under the strict CDC") {
  const auto inst = HardCoreInstance::uniform(cycle_graph(5), 0.3);
  const std::vector<double> mu(5, 1.0);
  const double alpha = 1.0 - 2.0 * 0.3 / 1.3;
  const auto rep = influence_decay_check(inst, 0, mu, alpha);
  CHECK(rep.holds);
  REQUIRE(rep.layer_sums.size() == rep.bounds.size());
  for (std::size_t k = 0; k < rep.bounds.size(); ++k) CHECK(rep.layer_sums[k] <= rep.bounds[k] + 1e-12);
  CHECK_THROWS_AS(influence_decay_check(inst, 0, mu, 0.9), ValidationError);
}

TEST_CASE("complex of P3 with cover {0,1},{2}") {
  const auto inst = HardCoreInstance::uniform(path_graph(3), 1.0);
  const ComplexRep rep(inst, CliqueCover{{{0, 1}, {2}}});
  CHECK(rep.dimension() == 2);
  CHECK(rep.ground_size() == 5);
  CHECK(rep.faces().size() == 5);
  CHECK(rep.face_weight({}) == doctest::Approx(1.0));
  CHECK(rep.face_weight({rep.vertex_element(2)}) == doctest::Approx(0.4));
  CHECK(rep.face_weight({rep.vertex_element(1), rep.vertex_element(2)}) == 0.0);
  CHECK(rep.face_weight({rep.empty_element(0), rep.empty_element(1)}) == doctest::Approx(0.2));
  CHECK(rep.scaled(5.0).face_weight({}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(ComplexRep(inst, CliqueCover{{{0, 1}, {1, 2}}}), ValidationError);
}

TEST_CASE("clique influence matrix from conditional probabilities") {
  Rng rng(35);
  for (int t = 0; t < 8; ++t) {
    const auto inst = oracle::random_instance(rng, 3 + rng.index(5), 0.4, 0.2, 2.0);
    const auto cover = random_disjoint_cover(inst.graph(), rng);
    const ComplexRep rep(inst, cover);
    const auto psi = clique_influence_matrix(rep);
    auto event = [&](std::size_t x) {
      const auto& e = rep.ground()[x];
      Mask k = 0;
      for (Vertex v : cover.cliques[e.partition]) k |= bit(v);
      return [e, k](Mask m) { return e.vertex ? (m & bit(*e.vertex)) != 0 : (m & k) == 0; };
    };
    for (std::size_t x = 0; x < rep.ground_size(); ++x)
      for (std::size_t y = 0; y < rep.ground_size(); ++y) {
        const double expect =
            rep.ground()[x].partition == rep.ground()[y].partition ? 0.0 : event_influence(inst, event(x), event(y));
        CHECK(psi.entries(Eigen::Index(x), Eigen::Index(y)) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
      }
  }
}

TEST_CASE("walks on the complex") {
  Rng rng(36);
  for (int t = 0; t < 15; ++t) {
    const auto inst = oracle::random_instance(rng, 4 + rng.index(5), 0.4, 0.2, 2.0);
    const auto cover = random_disjoint_cover(inst.graph(), rng);
    if (cover.size() < 2) continue;
    const ComplexRep rep(inst, cover);

    const auto sk = skeleton_walk_matrix(rep);
    const Eigen::VectorXd rows = sk.probabilities.rowwise().sum();
    CHECK((rows.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(sk.probabilities.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(stationarity_defect(sk.probabilities, sk.stationary) < 1e-12);
    CHECK(detailed_balance_defect(sk.probabilities, sk.stationary) < 1e-12);

    const auto two = two_step_walk_matrix(rep);
    const auto block = transition_matrix_exact(inst, DynamicsKind::block(BlockCover::from_cliques(cover)));
    REQUIRE(two.states == block.states);
    CHECK((two.probabilities - block.probabilities).cwiseAbs().maxCoeff() < 1e-12);

    const auto bounds = verify_spectral_bounds(inst, cover);
    CHECK(bounds.passed());
    CHECK(check_clique_block_comparison(inst, cover).holds);
    if (cover.size() <= 6) CHECK(local_expansion_profile(rep).bound_holds);
  }
}

TEST_CASE("disjointify") {
  const auto g = path_graph(3);
  auto d = disjointify_cover(g, CliqueCover{{{0, 1}, {1, 2}}});
  CHECK(d.changed);
  CHECK(d.cover.cliques == std::vector<VertexSet>{{0, 1}, {2}});
  d = disjointify_cover(g, CliqueCover{{{0, 1}, {1}, {2}}});
  CHECK(d.emptied == std::vector<bool>{false, true, false});
  CHECK(disjoint_nonempty(g, CliqueCover{{{0, 1}, {1}, {2}}}).size() == 2);
  CHECK_FALSE(disjointify_cover(g, CliqueCover{{{0}, {1}, {2}}}).changed);
  CHECK_THROWS_AS(disjointify_cover(g, CliqueCover{{{0, 2}, {1}}}), ValidationError);
}

TEST_CASE("eigenvalue helpers") {
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  CHECK(max_real_eigenvalue(swap) == doctest::Approx(1.0));
  CHECK(spectral_radius(swap) == doctest::Approx(1.0));
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -2, 2, 0;
  CHECK(max_real_eigenvalue(rot) == doctest::Approx(0.0).scale(1.0));
  CHECK(spectral_radius(rot) == doctest::Approx(2.0));

  const auto ok = spectral_radius_bound_check(swap, {1.0, 1.0}, 1.0);
  CHECK(ok.row_condition);
  CHECK(ok.radius_within);
  const auto vacuous = spectral_radius_bound_check(swap, {1.0, 1.0}, 0.5);
  CHECK_FALSE(vacuous.row_condition);
  CHECK(vacuous.passed());
  Eigen::MatrixXd weighted(2, 2);
  weighted << 0, 4, 1, 0;  // rho = 2, row condition with p = (2, 1)
  const auto w = spectral_radius_bound_check(weighted, {2.0, 1.0}, 2.0);
  CHECK(w.row_condition);
  CHECK(w.spectral_radius == doctest::Approx(2.0));
  CHECK(w.passed());
}
