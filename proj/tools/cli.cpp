#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsm/dynamics.hpp"
#include "hsm/estimator.hpp"
#include "hsm/hs_model.hpp"
#include "hsm/io.hpp"
#include "hsm/verify.hpp"

namespace hsm::cli {

namespace {

using nlohmann::json;

struct Common {
  std::string instance;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<unsigned> threads;
};

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("HSM_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) throw ValidationError("HSM_THREADS must be a positive integer");
    return unsigned(v);
  }
  return 1;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write output file: " + path);
  f << text;
}

EdgeRule parse_rule(const std::string& s) {
  if (s == "strict") return EdgeRule::Strict;
  if (s == "inclusive") return EdgeRule::Inclusive;
  throw ValidationError("edge rule must be 'strict' or 'inclusive'");
}

SamplingMode parse_mode(const std::string& s) {
  if (s == "thinned") return SamplingMode::Thinned;
  if (s == "restart") return SamplingMode::Restart;
  throw ValidationError("mode must be 'thinned' or 'restart'");
}

CliqueCover resolve_cover(const std::string& spec, const HardCoreInstance& inst) {
  if (spec == "singletons") return CliqueCover::singletons(inst.size());
  if (spec == "greedy") return greedy_clique_cover(inst.graph());
  if (spec == "cells") throw ValidationError("cover 'cells' needs a hard-sphere instance file");
  const auto first = spec.find_first_not_of(" \t\n");
  if (first != std::string::npos && spec[first] == '[') return parse_cover_json(spec);
  return parse_cover_json(read_text_file(spec));
}

/// Least-squares slope of log(y) against log(x) over positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++k;
  }
  if (k < 2) return std::nan("");
  return (double(k) * sxy - sx * sy) / (double(k) * sxx - sx * sx);
}

struct EstimateOpts {
  std::string cover = "greedy";
  double epsilon = 0.1;
  double delta = 0.2;
  std::string format = "json";
  unsigned chains = 1;
  std::string mode = "thinned";
  std::uint64_t samples = 0;
  std::uint64_t steps = 0;
  std::uint64_t thin = 0;
  std::string sampler = "chain";
  std::optional<double> rho;
  std::string rule = "strict";
  bool wall_time = false;
};

EstimatorConfig make_config(const EstimateOpts& o, const Common& c) {
  EstimatorConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.master_seed = c.seed;
  cfg.parallel_chains = std::max(1u, o.chains);
  cfg.threads = resolve_threads(c.threads);
  cfg.mode = parse_mode(o.mode);
  cfg.samples_per_ratio = o.samples;
  cfg.chain_steps_per_sample = o.steps;
  cfg.thin = o.thin;
  return cfg;
}

std::string render(const EstimateReport& rep, const EstimateOpts& o) {
  if (o.format == "csv") return ratios_to_csv(rep);
  if (o.format != "json") throw ValidationError("format must be 'json' or 'csv'");
  return estimate_report_to_json(rep, o.wall_time) + "\n";
}

void add_common(CLI::App* cmd, Common& c, bool instance_required = true) {
  auto* opt = cmd->add_option("--instance", c.instance, "Instance JSON file");
  if (instance_required) opt->required();
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Write output to this file instead of stdout");
  cmd->add_option("--threads", c.threads, "Worker threads (default: HSM_THREADS or 1)");
}

json discretization_json(const Discretization& disc, double delta, double gamma) {
  const CellCover cover(disc);
  const auto deg = max_degree_bound(disc, gamma);
  json j{{"rho", disc.rho()},
         {"grid_side", disc.grid_side()},
         {"lambda_rho", disc.lambda_rho()},
         {"conflict_radius", disc.conflict_radius()},
         {"cell_side", cover.side()},
         {"cells", cover.cell_count()},
         {"max_clique_z", cover.max_clique_z()},
         {"degree_bound", deg.bound},
         {"degree_threshold", deg.rho_threshold},
         {"edge_rule", disc.rule() == EdgeRule::Strict ? "strict" : "inclusive"}};
  j["regime_flags"] = {{"fugacity_regime", check_fugacity_regime(disc.parent(), delta)},
                       {"degree_precondition", deg.precondition_met},
                       {"weight_below_tree_threshold", discretized_weight_below_threshold(disc, delta)},
                       {"cell_side_positive", cover.side() >= 1}};
  if (disc.vertex_count() <= (1u << 16)) j["max_degree_exact"] = max_degree_exact(disc);
  return j;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hard-core and hard-sphere partition function estimation and verification", "hsm"};
  app.require_subcommand(1);

  // hc-z
  Common zc;
  std::size_t cap = kDefaultBruteForceCap;
  auto* hcz = app.add_subcommand("hc-z", "Exact partition function of a hard-core instance by enumeration");
  add_common(hcz, zc);
  hcz->add_option("--cap", cap, "Brute-force vertex cap (at most 63)");

  // estimate
  Common ec;
  EstimateOpts eo;
  auto* est = app.add_subcommand("estimate", "Telescoping-product estimate with clique dynamics");
  add_common(est, ec);
  est->add_option("--cover", eo.cover, "singletons | greedy | cells | JSON list | cover file");
  est->add_option("--epsilon", eo.epsilon, "Target relative error");
  est->add_option("--format", eo.format, "json | csv");
  est->add_option("--chains", eo.chains, "Replicate chains per ratio");
  est->add_option("--mode", eo.mode, "thinned | restart");
  est->add_option("--samples", eo.samples, "Override samples per ratio");
  est->add_option("--steps", eo.steps, "Override chain steps per sample (burn-in in thinned mode)");
  est->add_option("--thin", eo.thin, "Steps between retained samples in thinned mode (default: one sweep)");
  est->add_option("--sampler", eo.sampler, "chain | exact (exact Gibbs draws, small instances)");
  est->add_option("--rho", eo.rho, "Resolution for hard-sphere instances with cover 'cells'");
  est->add_option("--edge-rule", eo.rule, "strict | inclusive");
  est->add_flag("--wall-time", eo.wall_time, "Include wall time in the JSON report");

  // hs-estimate
  Common hc;
  EstimateOpts ho;
  ho.epsilon = 0.3;
  auto* hse = app.add_subcommand("hs-estimate", "Hard-sphere partition function through discretization");
  add_common(hse, hc);
  hse->add_option("--epsilon", ho.epsilon, "Target relative error");
  hse->add_option("--delta", ho.delta, "Fugacity slack delta");
  hse->add_option("--chains", ho.chains, "Replicate chains per ratio");
  hse->add_option("--mode", ho.mode, "thinned | restart");
  hse->add_option("--edge-rule", ho.rule, "strict | inclusive");
  hse->add_option("--format", ho.format, "json | csv");
  hse->add_flag("--wall-time", ho.wall_time, "Include wall time in the JSON report");

  // converge-study
  Common cc;
  int cd = 1;
  double cell = 4.0, clam = 1.0, ceps = 0.01;
  std::string rho_list = "4,8,16,32";
  std::size_t brute_cap = kDefaultBruteForceCap;
  unsigned cchains = 1;
  auto* cs = app.add_subcommand("converge-study", "Discretized Z against the one-dimensional hard-rod oracle");
  add_common(cs, cc, false);
  cs->add_option("--d", cd, "Dimension (only 1 has a closed-form oracle)");
  cs->add_option("--ell", cell, "Box side");
  cs->add_option("--lambda", clam, "Fugacity");
  cs->add_option("--rho-list", rho_list, "Comma-separated resolutions");
  cs->add_option("--epsilon", ceps, "Estimator accuracy for grids beyond the brute-force cap");
  cs->add_option("--brute-cap", brute_cap, "Largest grid solved by enumeration");
  cs->add_option("--chains", cchains, "Replicate chains per ratio");

  // verify
  Common vc;
  std::string suite = "all";
  std::size_t random_count = 12;
  auto* ver = app.add_subcommand("verify", "Run invariant batteries");
  add_common(ver, vc, false);
  ver->add_option("--suite", suite, "stationarity | influence | saw | complex | bounds | all");
  ver->add_option("--random-count", random_count, "Random graphs in the built-in battery");

  // sample
  Common sc;
  std::string scover = "greedy", sdyn = "clique";
  std::uint64_t ssteps = 1000, sburn = 0, sthin = 1;
  bool slazy = false;
  auto* smp = app.add_subcommand("sample", "Run a chain and dump retained states as JSON lines");
  add_common(smp, sc);
  smp->add_option("--cover", scover, "singletons | greedy | JSON list | cover file");
  smp->add_option("--dynamics", sdyn, "clique | block | glauber");
  smp->add_flag("--lazy", slazy, "Hold with probability 1/2 each step");
  smp->add_option("--steps", ssteps, "Total steps");
  smp->add_option("--burn-in", sburn, "Steps before the first retained state");
  smp->add_option("--thin", sthin, "Steps between retained states");

  // discretize
  Common dc;
  std::optional<double> drho;
  double deps = 0.3, ddelta = 0.2;
  std::string drule = "strict";
  auto* dis = app.add_subcommand("discretize", "Report the grid discretization of a hard-sphere instance");
  add_common(dis, dc);
  dis->add_option("--rho", drho, "Resolution (default: chosen from epsilon and delta)");
  dis->add_option("--epsilon", deps, "Target relative error used to pick rho");
  dis->add_option("--delta", ddelta, "Fugacity slack delta");
  dis->add_option("--edge-rule", drule, "strict | inclusive");

  std::vector<const char*> argv{"hsm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  if (*hcz) {
    if (cap > 63) throw ValidationError("--cap must be at most 63");
    out << format_real(partition_function_bruteforce(read_instance_file(zc.instance), cap)) << "\n";
    return kOk;
  }

  if (*est) {
    const std::string text = read_text_file(ec.instance);
    const auto cfg = make_config(eo, ec);
    EstimateReport rep;
    if (is_hard_sphere_json(text)) {
      if (eo.cover != "cells" && eo.cover != "greedy")
        throw ValidationError("hard-sphere instances only support cover 'cells'");
      if (!eo.rho) throw ValidationError("--rho is required for hard-sphere instances");
      const Discretization disc(parse_hard_sphere_json(text), *eo.rho, parse_rule(eo.rule));
      rep = estimate_grid(disc, cfg);
    } else {
      const auto inst = parse_instance_json(text);
      const auto cover = resolve_cover(eo.cover, inst);
      if (eo.sampler == "exact")
        rep = estimate_with_exact_sampler(inst, cover, cfg);
      else if (eo.sampler == "chain")
        rep = estimate_partition_function(inst, cover, cfg);
      else
        throw ValidationError("sampler must be 'chain' or 'exact'");
    }
    emit(render(rep, eo), ec.out, out);
    return kOk;
  }

  if (*hse) {
    const auto inst = read_hard_sphere_file(hc.instance);
    auto cfg = make_config(ho, hc);
    const auto rep = estimate_hard_sphere(inst, ho.epsilon, ho.delta, hc.seed, cfg, parse_rule(ho.rule));
    emit(render(rep, ho), hc.out, out);
    return kOk;
  }

  if (*cs) {
    HardSphereInstance inst{cd, cell, clam};
    if (!cc.instance.empty()) inst = read_hard_sphere_file(cc.instance);
    if (inst.d != 1) throw ValidationError("converge-study needs d = 1 (the hard-rod oracle is one-dimensional)");
    inst.validate();
    std::vector<double> rhos;
    std::stringstream ss(rho_list);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        rhos.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ValidationError("bad entry in --rho-list: '" + tok + "'");
      }
    }
    if (rhos.empty()) throw ValidationError("--rho-list is empty");
    const double z_tonks = tonks_gas_z(inst.ell, inst.lambda);
    std::ostringstream csv;
    csv << "rho,Z_rho,Z_tonks,rel_err\n";
    std::vector<double> errs;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
      const Discretization disc(inst, rhos[i]);
      double z;
      if (std::uint64_t(disc.grid_side()) <= brute_cap) {
        z = partition_function_bruteforce(explicit_graph(disc, brute_cap), brute_cap);
      } else {
        EstimatorConfig cfg;
        cfg.epsilon = ceps;
        cfg.master_seed = derive_seed(cc.seed, {i});
        cfg.threads = resolve_threads(cc.threads);
        cfg.parallel_chains = std::max(1u, cchains);
        z = estimate_grid(disc, cfg).estimate;
      }
      const double rel = std::abs(z - z_tonks) / z_tonks;
      errs.push_back(rel);
      csv << format_real(rhos[i]) << ',' << format_real(z) << ',' << format_real(z_tonks) << ',' << format_real(rel)
          << '\n';
      if (i > 0 && rel >= errs[i - 1])
        err << "warning: rel_err did not decrease from rho=" << rhos[i - 1] << " to rho=" << rhos[i] << "\n";
    }
    csv << "# slope=" << format_real(loglog_slope(rhos, errs)) << "\n";
    emit(csv.str(), cc.out, out);
    return kOk;
  }

  if (*ver) {
    std::vector<HardCoreInstance> instances;
    if (!vc.instance.empty()) instances.push_back(read_instance_file(vc.instance));
    if (instances.empty()) instances = builtin_verification_instances(vc.seed, random_count);
    const auto rep = run_verification(suite, vc.seed, instances, resolve_threads(vc.threads));
    emit(verification_report_to_json(rep) + "\n", vc.out, out);
    for (const auto& l : rep.lemmas)
      if (!l.passed) err << "verification failed: " << l.name << " (worst slack " << l.worst_slack << ")\n";
    return rep.passed() ? kOk : kVerificationFailed;
  }

  if (*smp) {
    const auto inst = read_instance_file(sc.instance);
    DynamicsKind kind;
    if (sdyn == "glauber")
      kind = DynamicsKind::glauber();
    else if (sdyn == "clique")
      kind = DynamicsKind::clique(resolve_cover(scover, inst));
    else if (sdyn == "block")
      kind = DynamicsKind::block(BlockCover::from_cliques(resolve_cover(scover, inst)));
    else
      throw ValidationError("dynamics must be clique, block or glauber");
    if (slazy) kind = kind.as_lazy();
    if (sthin == 0) throw ValidationError("--thin must be positive");
    const auto run = run_chain(inst, kind, ssteps, sc.seed, sburn, sthin);
    std::ostringstream os;
    write_trajectory_jsonl(os, run);
    emit(os.str(), sc.out, out);
    return kOk;
  }

  if (*dis) {
    const auto inst = read_hard_sphere_file(dc.instance);
    const EdgeRule rule = parse_rule(drule);
    const double gamma = ddelta / 2.0;
    json j;
    if (drho) {
      j = discretization_json(Discretization(inst, *drho, rule), ddelta, gamma);
    } else {
      const auto res = choose_resolution(inst, deps / 3.0, gamma, rule);
      j = discretization_json(res.disc, ddelta, gamma);
      j["convergence_constant"] = res.c_conv;
      j["error_bound"] = res.error_bound;
      j["rho_min"] = res.rho_min;
    }
    emit(j.dump(2) + "\n", dc.out, out);
    return kOk;
  }
  return kValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const CapExceeded& e) {
    err << "error: cap exceeded: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const RegimeError& e) {
    err << "error: regime violation: " << e.what() << "\n";
    return kRegime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace hsm::cli
