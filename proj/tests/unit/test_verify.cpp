#include <doctest.h>

#include <json.hpp>

#include "hsm/generators.hpp"
#include "hsm/verify.hpp"

using namespace hsm;

namespace {

const LemmaResult* find(const VerificationReport& rep, const std::string& name) {
  for (const auto& l : rep.lemmas)
    if (l.name == name) return &l;
  return nullptr;
}

}  // namespace

TEST_CASE("lemma bookkeeping") {
  LemmaResult l;
  l.name = "x";
  l.record(0.5, 1.0, 1e-9, "a");
  l.record(0.9, 1.0, 1e-9, "b");
  CHECK(l.passed);
  CHECK(l.checks == 2);
  CHECK(l.worst_slack == doctest::Approx(0.1));
  CHECK(l.worst_instance == "b");
  l.record(1.0 + 1e-12, 1.0, 1e-9, "c");
  CHECK(l.passed);
  l.record(1.1, 1.0, 1e-9, "d");
  CHECK_FALSE(l.passed);
  CHECK(l.worst_instance == "d");

  LemmaResult other;
  other.name = "x";
  other.record(0.0, 1.0, 1e-9, "e");
  other.merge(l);
  CHECK(other.checks == 5);
  CHECK_FALSE(other.passed);
  CHECK(other.worst_instance == "d");
}

TEST_CASE("built-in battery") {
  const auto a = builtin_verification_instances(7, 5);
  const auto b = builtin_verification_instances(7, 5);
  CHECK(a == b);
  CHECK(a.size() == builtin_verification_instances(7, 0).size() + 5);
}

TEST_CASE("every suite passes on the built-in battery") {
  for (const auto& suite : verification_suites()) {
    const auto rep = run_verification(suite, 3, {}, 2);
    CHECK_MESSAGE(rep.passed(), suite);
    CHECK(!rep.lemmas.empty());
    for (const auto& l : rep.lemmas) {
      CHECK_MESSAGE(l.passed, l.name);
      CHECK(l.checks > 0);
    }
  }
}

TEST_CASE("suite contents") {
  const auto all = run_verification("all", 1);
  for (const char* name : {"stationarity", "detailed_balance", "saw_influence", "tree_multiplicativity",
                           "two_step_block_equivalence", "skeleton_vs_clique_influence", "skeleton_vs_max_clique_z",
                           "clique_vs_block_gap", "cdc_implies_influence_condition", "clique_to_pairwise_empty",
                           "degree_bound", "tree_threshold_above_e"})
    CHECK_MESSAGE(find(all, name) != nullptr, name);
  const auto saw = run_verification("saw", 1);
  CHECK(find(saw, "saw_influence") != nullptr);
  CHECK(find(saw, "stationarity") == nullptr);
}

TEST_CASE("thread count does not change the report") {
  const auto a = verification_report_to_json(run_verification("all", 5, {}, 1));
  const auto b = verification_report_to_json(run_verification("all", 5, {}, 3));
  CHECK(a == b);
}

TEST_CASE("user instances and errors") {
  const auto rep = run_verification("stationarity", 0, {HardCoreInstance::uniform(cycle_graph(5), 0.8)});
  CHECK(rep.instances == 1);
  CHECK(rep.passed());
  CHECK_THROWS_AS(run_verification("nope", 0), ValidationError);
  const auto j = nlohmann::json::parse(verification_report_to_json(rep));
  CHECK(j["passed"] == true);
  CHECK(j["instances"] == 1);
}
