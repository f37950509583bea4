#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hsm/hardcore.hpp"

namespace hsm {

/// Outcome of one identity or inequality over a battery of instances.
struct LemmaResult {
  std::string name;
  bool passed = true;
  std::uint64_t checks = 0;
  /// Smallest (allowed - observed) margin seen.
  double worst_slack = std::numeric_limits<double>::infinity();
  std::string worst_instance;  ///< digest of the instance with the worst slack

  /// Records observed <= allowed + tolerance. Identities pass their defect as
  /// observed with allowed = tolerance.
  void record(double observed, double allowed, double tolerance, const std::string& digest);
  void merge(const LemmaResult& other);
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  std::vector<LemmaResult> lemmas;
  /// Non-fatal observations (sign asymmetries, skipped instances).
  std::vector<std::string> diagnostics;

  bool passed() const;
};

inline const std::vector<std::string>& verification_suites() {
  static const std::vector<std::string> names{"stationarity", "influence", "saw", "complex", "bounds", "all"};
  return names;
}

/// Built-in families: paths, cycles, cliques, stars, tiny grids and seeded random graphs.
std::vector<HardCoreInstance> builtin_verification_instances(std::uint64_t seed, std::size_t random_count = 12);

/// Runs a suite on the given instances (the built-in families when empty).
VerificationReport run_verification(const std::string& suite, std::uint64_t seed,
                                    std::vector<HardCoreInstance> instances = {}, unsigned threads = 1);

std::string verification_report_to_json(const VerificationReport& report);

}  // namespace hsm
