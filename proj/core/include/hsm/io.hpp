#pragma once

#include <string>

#include "hsm/estimator.hpp"
#include "hsm/hardcore.hpp"
#include "hsm/hs_model.hpp"

namespace hsm {

/// {"vertices": n, "edges": [[u,v],...], "lambda": x | [x,...]}.
/// An "adjacency" list-of-lists may replace "edges"; it is checked for symmetry.
HardCoreInstance parse_instance_json(const std::string& text);
HardCoreInstance read_instance_file(const std::string& path);
/// lambda is written as a single number for univariate instances.
std::string instance_to_json(const HardCoreInstance& instance);
/// FNV-1a hash of the canonical JSON form, as 16 hex digits.
std::string instance_digest(const HardCoreInstance& instance);

/// {"d": int, "ell": number, "lambda": number}
HardSphereInstance parse_hard_sphere_json(const std::string& text);
HardSphereInstance read_hard_sphere_file(const std::string& path);
std::string hard_sphere_to_json(const HardSphereInstance& instance);

/// Accepts "[[0,1],[2]]" style JSON.
CliqueCover parse_cover_json(const std::string& text);
std::string cover_to_json(const CliqueCover& cover);

/// True if the JSON object looks like a hard-sphere instance (has "d" and "ell").
bool is_hard_sphere_json(const std::string& text);

std::string read_text_file(const std::string& path);

/// Shortest round-trip decimal representation, always with a decimal point or exponent.
std::string format_real(double x);

/// Pretty-printed report; wall time is left out unless asked for, so that the
/// output is a pure function of the inputs.
std::string estimate_report_to_json(const EstimateReport& report, bool include_wall_time = false);
/// clique,ratio,hits,samples,steps
std::string ratios_to_csv(const EstimateReport& report);

}  // namespace hsm
