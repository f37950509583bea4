#include "hsm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hsm {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

std::uint64_t as_index(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw ValidationError(std::string(what) + " must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return j.get<double>();
}

const char* mode_name(SamplingMode m) { return m == SamplingMode::Thinned ? "thinned" : "restart"; }

}  // namespace

HardCoreInstance parse_instance_json(const std::string& text) {
  const json j = parse_json(text, "instance");
  if (!j.is_object()) throw ValidationError("instance must be a JSON object");
  if (j.contains("edges") && j.contains("adjacency"))
    throw ValidationError("instance must give either \"edges\" or \"adjacency\", not both");

  Graph graph;
  if (j.contains("adjacency")) {
    const json& a = j["adjacency"];
    if (!a.is_array()) throw ValidationError("\"adjacency\" must be an array of neighbor lists");
    std::vector<VertexSet> lists;
    for (const json& row : a) {
      if (!row.is_array()) throw ValidationError("\"adjacency\" rows must be arrays");
      VertexSet list;
      for (const json& v : row) list.push_back(Vertex(as_index(v, "adjacency entry")));
      lists.push_back(std::move(list));
    }
    if (j.contains("vertices") && as_index(j["vertices"], "\"vertices\"") != lists.size())
      throw ValidationError("\"vertices\" disagrees with the number of adjacency rows");
    graph = Graph::from_adjacency(std::move(lists));
  } else {
    if (!j.contains("vertices")) throw ValidationError("instance is missing \"vertices\"");
    const auto n = as_index(j["vertices"], "\"vertices\"");
    std::vector<std::pair<Vertex, Vertex>> edges;
    if (j.contains("edges")) {
      if (!j["edges"].is_array()) throw ValidationError("\"edges\" must be an array");
      for (const json& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw ValidationError("each edge must be a pair [u, v]");
        edges.emplace_back(Vertex(as_index(e[0], "edge endpoint")), Vertex(as_index(e[1], "edge endpoint")));
      }
    }
    graph = Graph::from_edges(n, edges);
  }

  const std::size_t n = graph.vertex_count();
  if (!j.contains("lambda")) throw ValidationError("instance is missing \"lambda\"");
  std::vector<double> weights;
  const json& l = j["lambda"];
  if (l.is_array()) {
    for (const json& x : l) weights.push_back(as_number(x, "lambda entry"));
  } else {
    weights.assign(n, as_number(l, "\"lambda\""));
  }
  if (j.contains("labels")) {
    std::vector<std::string> labels;
    for (const json& s : j["labels"]) {
      if (!s.is_string()) throw ValidationError("labels must be strings");
      labels.push_back(s.get<std::string>());
    }
    graph.set_labels(std::move(labels));
  }
  return HardCoreInstance(std::move(graph), std::move(weights));
}

HardCoreInstance read_instance_file(const std::string& path) { return parse_instance_json(read_text_file(path)); }

std::string instance_to_json(const HardCoreInstance& instance) {
  json j;
  j["vertices"] = instance.size();
  json edges = json::array();
  for (auto [u, v] : instance.graph().edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  if (instance.size() > 0 && instance.univariate())
    j["lambda"] = instance.weight(0);
  else
    j["lambda"] = instance.weights();
  if (!instance.graph().labels().empty()) j["labels"] = instance.graph().labels();
  return j.dump();
}

std::string instance_digest(const HardCoreInstance& instance) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : instance_to_json(instance)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

HardSphereInstance parse_hard_sphere_json(const std::string& text) {
  const json j = parse_json(text, "hard-sphere instance");
  if (!j.is_object()) throw ValidationError("hard-sphere instance must be a JSON object");
  for (const char* key : {"d", "ell", "lambda"})
    if (!j.contains(key)) throw ValidationError(std::string("hard-sphere instance is missing \"") + key + "\"");
  if (!j["d"].is_number_integer()) throw ValidationError("\"d\" must be an integer");
  HardSphereInstance inst{j["d"].get<int>(), as_number(j["ell"], "\"ell\""), as_number(j["lambda"], "\"lambda\"")};
  inst.validate();
  return inst;
}

HardSphereInstance read_hard_sphere_file(const std::string& path) {
  return parse_hard_sphere_json(read_text_file(path));
}

std::string hard_sphere_to_json(const HardSphereInstance& instance) {
  return json{{"d", instance.d}, {"ell", instance.ell}, {"lambda", instance.lambda}}.dump();
}

CliqueCover parse_cover_json(const std::string& text) {
  const json j = parse_json(text, "cover");
  if (!j.is_array()) throw ValidationError("cover must be a JSON array of vertex lists");
  CliqueCover cover;
  for (const json& k : j) {
    if (!k.is_array()) throw ValidationError("each clique must be an array of vertices");
    VertexSet clique;
    for (const json& v : k) clique.push_back(Vertex(as_index(v, "clique vertex")));
    cover.cliques.push_back(std::move(clique));
  }
  return cover;
}

std::string cover_to_json(const CliqueCover& cover) { return json(cover.cliques).dump(); }

bool is_hard_sphere_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  return j.is_object() && j.contains("d") && j.contains("ell");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string format_real(double x) { return json(x).dump(); }

std::string estimate_report_to_json(const EstimateReport& r, bool include_wall_time) {
  json j;
  j["estimate"] = r.estimate;
  j["log_estimate"] = r.log_estimate;
  j["epsilon"] = r.epsilon;
  j["seed"] = r.seed;
  j["cliques"] = r.cliques;
  j["max_clique_z"] = r.max_clique_z;
  j["mode"] = mode_name(r.mode);
  j["parallel_chains"] = r.parallel_chains;
  j["total_steps"] = r.total_steps;
  j["budget"] = {{"samples_per_ratio", r.budget.samples},
                 {"per_sample_tv", r.budget.per_sample_tv},
                 {"steps_per_sample", r.budget.steps_per_sample}};
  json ratios = json::array();
  for (const auto& x : r.ratios)
    ratios.push_back(
        {{"clique", x.clique}, {"ratio", x.ratio}, {"hits", x.hits}, {"samples", x.samples}, {"steps", x.steps}});
  j["ratios"] = std::move(ratios);
  json flags = json::object();
  for (const auto& [name, ok] : r.regime_flags) flags[name] = ok;
  j["regime_flags"] = std::move(flags);
  if (r.discretization) {
    const auto& d = *r.discretization;
    j["discretization"] = {{"rho", d.rho},
                           {"grid_side", d.grid_side},
                           {"lambda_rho", d.lambda_rho},
                           {"cell_side", d.cell_side},
                           {"cells", d.cells},
                           {"max_clique_z", d.max_clique_z},
                           {"degree_bound", d.degree_bound},
                           {"degree_threshold", d.degree_threshold},
                           {"convergence_constant", d.convergence_constant},
                           {"error_bound", d.error_bound},
                           {"edge_rule", d.edge_rule}};
  }
  if (include_wall_time) j["wall_time_seconds"] = r.wall_time_seconds;
  return j.dump(2);
}

std::string ratios_to_csv(const EstimateReport& report) {
  std::ostringstream os;
  os << "clique,ratio,hits,samples,steps\n";
  for (const auto& x : report.ratios)
    os << x.clique << ',' << format_real(x.ratio) << ',' << x.hits << ',' << x.samples << ',' << x.steps << '\n';
  return os.str();
}

}  // namespace hsm
