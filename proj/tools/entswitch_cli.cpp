// Command-line front end: closed forms, chain solves, simulation
// cross-checks, and capacity-region sweeps with reproducible manifests.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entswitch/entswitch.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace entswitch;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CommonOpts {
  int k = 3;
  double mu = 1.0;
  double alpha = 0.0;
  int buffer = 1;
  std::string r = "0,1,1";
  bool as_json = false;
  std::string out;
};

SwitchConfig config_of(const CommonOpts& o) {
  return {o.k, o.mu, o.alpha, o.buffer};
}

PolicyParams policy_of(const CommonOpts& o) {
  PolicyParams p{};
  char extra = 0;
  if (std::sscanf(o.r.c_str(), "%lf,%lf,%lf%c", &p.r1, &p.r2, &p.r3, &extra) != 3)
    throw ValidationError("--r expects three comma-separated probabilities, e.g. 0,1,1");
  return p;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_buffer) {
  cmd->add_option("--k", o.k, "number of user links (>= 3)")->capture_default_str();
  cmd->add_option("--mu", o.mu, "per-link entanglement rate (1/s)")->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "per-qubit decoherence rate (1/s)")->capture_default_str();
  if (with_buffer)
    cmd->add_option("--B,--buffer", o.buffer, "per-link buffer size (1 or 2)")->capture_default_str();
  cmd->add_option("--r", o.r, "policy probabilities r1,r2,r3")->capture_default_str();
  cmd->add_flag("--json", o.as_json, "print machine-readable JSON instead of text");
  cmd->add_option("--out", o.out, "directory for result files and the run manifest");
}

void write_text_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << content;
}

void emit_outputs(const CommonOpts& o, const std::string& command, const json& params,
                  const std::vector<std::pair<std::string, std::string>>& files) {
  if (o.out.empty()) return;
  const fs::path dir(o.out);
  RunManifest m;
  m.command = command;
  m.params = params;
  for (const auto& [name, content] : files) {
    write_text_file(dir, name, content);
    m.outputs.push_back(name);
  }
  m.outputs.push_back("manifest.json");
  write_manifest((dir / "manifest.json").string(), m);
}

json common_params(const CommonOpts& o) {
  return {{"k", o.k},       {"mu", o.mu},   {"alpha", o.alpha}, {"B", o.buffer},
          {"r", o.r},       {"json", o.as_json}, {"out", o.out}};
}

json policy_json(const PolicyParams& p) {
  return {{"r1", p.r1}, {"r2", p.r2}, {"r3", p.r3}};
}

// --- analytic ---------------------------------------------------------------

int run_analytic(const CommonOpts& o) {
  const SwitchConfig cfg = config_of(o);
  const PolicyParams pol = policy_of(o);
  if (cfg.buffer_size != 1)
    throw ValidationError("no closed forms for buffer size 2; use the `solve` subcommand");
  validate_config(cfg, pol);

  const CapacityPoint cap = analytic::capacities_b1_decoherence(cfg, pol);
  const analytic::Extremes ext = cfg.alpha == 0.0 ? analytic::extremes_b1(cfg)
                                                  : analytic::extremes_b1_decoherence(cfg);
  const analytic::BoundingLines lines = analytic::bounding_lines_b1(cfg);

  json j;
  j["k"] = cfg.k;
  j["mu"] = cfg.mu;
  j["alpha"] = cfg.alpha;
  j["buffer_size"] = cfg.buffer_size;
  j["policy"] = policy_json(pol);
  j["c2"] = cap.c2;
  j["c3"] = cap.c3;
  j["extremes"] = {{"c2_star", ext.c2_star},
                   {"c3_star", ext.c3_star},
                   {"c2_hat", ext.c2_hat},
                   {"c3_hat", ext.c3_hat}};
  j["lines"] = {{"line1", {{"slope", lines.line1.slope}, {"intercept", lines.line1.intercept}}},
                {"line2", {{"slope", lines.line2.slope}, {"intercept", lines.line2.intercept}}}};
  if (cfg.alpha == 0.0) {
    const analytic::AreaBreakdown ab = analytic::area_ratio_b1(cfg);
    j["areas"] = {{"above_tdm", ab.a_triangle},
                  {"tdm_term", ab.a_tdm},
                  {"total", ab.a_total},
                  {"ratio", ab.ratio}};
  }

  if (o.as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "closed-form capacities (k=" << cfg.k << ", mu=" << fmt(cfg.mu)
              << ", alpha=" << fmt(cfg.alpha) << ", B=1, r=(" << fmt(pol.r1) << ","
              << fmt(pol.r2) << "," << fmt(pol.r3) << "))\n";
    std::cout << "  c2 = " << fmt(cap.c2) << "  (bipartite, BSM/s)\n";
    std::cout << "  c3 = " << fmt(cap.c3) << "  (tripartite, GHZ/s)\n";
    std::cout << "extremes: c2* = " << fmt(ext.c2_star) << "   c3* = " << fmt(ext.c3_star)
              << "\n";
    std::cout << "farthest point above TDM: (c3, c2) = (" << fmt(ext.c3_hat) << ", "
              << fmt(ext.c2_hat) << ") at r=(0,1,1)\n";
    std::cout << "bounding lines (c2 <= slope*c3 + intercept):\n";
    std::cout << "  line1: slope = " << fmt(lines.line1.slope)
              << "  intercept = " << fmt(lines.line1.intercept) << "\n";
    std::cout << "  line2: slope = " << fmt(lines.line2.slope)
              << "  intercept = " << fmt(lines.line2.intercept) << "\n";
    if (cfg.alpha == 0.0) {
      const analytic::AreaBreakdown ab = analytic::area_ratio_b1(cfg);
      std::cout << "area above TDM = " << fmt(ab.a_triangle)
                << "  ratio of total = " << fmt(ab.ratio) << "\n";
    }
  }
  emit_outputs(o, "analytic", common_params(o), {{"analytic.json", j.dump(2) + "\n"}});
  return 0;
}

// --- solve ------------------------------------------------------------------

int run_solve(const CommonOpts& o, bool dump_chain) {
  const SwitchConfig cfg = config_of(o);
  const PolicyParams pol = policy_of(o);
  const ctmc::MarkovChain chain = ctmc::build_chain(cfg, pol);
  const ctmc::StationaryDistribution dist = ctmc::solve_stationary(chain);
  const CapacityPoint cap = ctmc::capacities(chain, dist);

  json j;
  j["k"] = cfg.k;
  j["mu"] = cfg.mu;
  j["alpha"] = cfg.alpha;
  j["buffer_size"] = cfg.buffer_size;
  j["policy"] = policy_json(pol);
  j["states"] = json::array();
  for (const auto& s : chain.states) j["states"].push_back(ctmc::to_string(s));
  j["pi"] = dist.pi;
  j["residual"] = dist.residual;
  j["c2"] = cap.c2;
  j["c3"] = cap.c3;
  if (dump_chain) {
    j["transitions"] = json::array();
    for (const auto& t : chain.transitions)
      j["transitions"].push_back({{"from", ctmc::to_string(t.from)},
                                  {"to", ctmc::to_string(t.to)},
                                  {"rate", t.rate},
                                  {"bsm", t.bsm_count},
                                  {"ghz", t.ghz_count}});
  }

  if (o.as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "stationary distribution (k=" << cfg.k << ", mu=" << fmt(cfg.mu)
              << ", alpha=" << fmt(cfg.alpha) << ", B=" << cfg.buffer_size << ", r=("
              << fmt(pol.r1) << "," << fmt(pol.r2) << "," << fmt(pol.r3) << "))\n";
    for (int i = 0; i < chain.size(); ++i)
      std::cout << "  pi" << ctmc::to_string(chain.states[i]) << " = " << fmt(dist.pi[i])
                << "\n";
    std::cout << "residual |pi Q|_inf = " << fmt(dist.residual) << "\n";
    std::cout << "capacities: c2 = " << fmt(cap.c2) << "  c3 = " << fmt(cap.c3) << "\n";
    if (dump_chain) std::cout << "transitions:\n" << chain.dump();
  }
  json params = common_params(o);
  params["dump_chain"] = dump_chain;
  emit_outputs(o, "solve", params, {{"solve.json", j.dump(2) + "\n"}});
  return 0;
}

// --- simulate -----------------------------------------------------------------

struct SimulateOpts {
  double duration = 1e5;
  std::uint64_t seed = 1;
  int reps = 10;
  std::string trace;
};

int run_simulate(const CommonOpts& o, const SimulateOpts& so) {
  const SwitchConfig cfg = config_of(o);
  const PolicyParams pol = policy_of(o);
  validate_config(cfg, pol);

  if (!so.trace.empty()) {
    // trace one replication (substream 0 of the base seed)
    std::ofstream tf(so.trace, std::ios::binary);
    if (!tf) throw std::runtime_error("cannot write trace file: " + so.trace);
    tf << "time,event_type,link,action\n";
    sim::SimOptions topts;
    topts.trace = &tf;
    sim::simulate(cfg, pol, so.duration, sim::detail::stream_seed(so.seed, 0), topts);
  }

  const sim::SimulationEstimate est = sim::replicate(cfg, pol, so.duration, so.reps, so.seed);
  const ctmc::MarkovChain chain = ctmc::build_chain(cfg, pol);
  const ctmc::StationaryDistribution dist = ctmc::solve_stationary(chain);
  const CapacityPoint cap = ctmc::capacities(chain, dist);

  const bool agree = std::fabs(est.c2_hat - cap.c2) <= est.ci2 &&
                     std::fabs(est.c3_hat - cap.c3) <= est.ci3;

  json j;
  j["k"] = cfg.k;
  j["mu"] = cfg.mu;
  j["alpha"] = cfg.alpha;
  j["buffer_size"] = cfg.buffer_size;
  j["policy"] = policy_json(pol);
  j["duration"] = so.duration;
  j["reps"] = so.reps;
  j["seed"] = so.seed;
  j["estimate"] = {{"c2_hat", est.c2_hat}, {"ci2", est.ci2},
                   {"c3_hat", est.c3_hat}, {"ci3", est.ci3},
                   {"occupancy", est.occupancy}, {"occupancy_ci", est.occupancy_ci},
                   {"total_events", est.total_events}};
  j["counters"] = {{"generated", est.counters.generated},
                   {"bsm", est.counters.bsm},
                   {"ghz", est.counters.ghz},
                   {"dropped", est.counters.dropped},
                   {"decohered", est.counters.decohered},
                   {"stored_at_end", est.counters.stored_at_end}};
  j["ctmc"] = {{"c2", cap.c2}, {"c3", cap.c3}, {"pi", dist.pi}};
  j["agree"] = agree;

  if (o.as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "simulation (k=" << cfg.k << ", mu=" << fmt(cfg.mu) << ", alpha="
              << fmt(cfg.alpha) << ", B=" << cfg.buffer_size << ", r=(" << fmt(pol.r1)
              << "," << fmt(pol.r2) << "," << fmt(pol.r3) << ")), duration="
              << fmt(so.duration) << " s x " << so.reps << " reps, seed " << so.seed
              << "\n";
    std::cout << "  c2_hat = " << fmt(est.c2_hat) << " +/- " << fmt(est.ci2)
              << "   chain c2 = " << fmt(cap.c2) << "\n";
    std::cout << "  c3_hat = " << fmt(est.c3_hat) << " +/- " << fmt(est.ci3)
              << "   chain c3 = " << fmt(cap.c3) << "\n";
    std::cout << "  events = " << est.total_events << " (generated "
              << est.counters.generated << ", bsm " << est.counters.bsm << ", ghz "
              << est.counters.ghz << ", dropped " << est.counters.dropped
              << ", decohered " << est.counters.decohered << ")\n";
    std::cout << "verdict: " << (agree ? "AGREE" : "DISAGREE")
              << " (95% confidence intervals vs chain solution)\n";
  }

  json params = common_params(o);
  params["duration"] = so.duration;
  params["seed"] = so.seed;
  params["reps"] = so.reps;
  params["trace"] = so.trace;
  emit_outputs(o, "simulate", params, {{"simulate.json", j.dump(2) + "\n"}});
  return agree ? 0 : 3;
}

// --- region -------------------------------------------------------------------

struct RegionOpts {
  double step = 0.05;
  std::string engine = "auto";
  bool compare_b1 = false;
};

int run_region(const CommonOpts& o, const RegionOpts& ro) {
  if (o.out.empty()) throw ValidationError("region requires --out <dir> for its CSV/JSON outputs");
  const SwitchConfig cfg = config_of(o);
  region::Engine engine;
  if (ro.engine == "auto")
    engine = cfg.buffer_size == 1 ? region::Engine::analytic : region::Engine::ctmc;
  else
    engine = region::engine_from_string(ro.engine);

  const region::RegionResult rr = region::sweep(cfg, ro.step, engine);
  json summary = region::summary_json(rr);

  std::vector<std::pair<std::string, std::string>> files;
  auto csv_of = [](auto writer, const region::RegionResult& r) {
    std::ostringstream os;
    writer(os, r);
    return os.str();
  };
  files.emplace_back("points.csv", csv_of([](std::ostream& os, const region::RegionResult& r) { region::write_points_csv(os, r); }, rr));
  files.emplace_back("boundary.csv", csv_of([](std::ostream& os, const region::RegionResult& r) { region::write_boundary_csv(os, r); }, rr));
  files.emplace_back("tdm.csv", csv_of([](std::ostream& os, const region::RegionResult& r) { region::write_tdm_csv(os, r); }, rr));

  if (ro.compare_b1) {
    if (cfg.buffer_size != 2)
      throw ValidationError("--compare-b1 applies to --B 2 runs");
    SwitchConfig b1 = cfg;
    b1.buffer_size = 1;
    const region::RegionResult r1 = region::sweep(b1, ro.step, region::Engine::analytic);
    files.emplace_back("b1_points.csv", csv_of([](std::ostream& os, const region::RegionResult& r) { region::write_points_csv(os, r); }, r1));
    files.emplace_back("b1_boundary.csv", csv_of([](std::ostream& os, const region::RegionResult& r) { region::write_boundary_csv(os, r); }, r1));
    files.emplace_back("b1_tdm.csv", csv_of([](std::ostream& os, const region::RegionResult& r) { region::write_tdm_csv(os, r); }, r1));
    summary["comparison"] = {
        {"b1", region::summary_json(r1)},
        {"delta_c2_star", rr.tdm.c2_star - r1.tdm.c2_star},
        {"delta_c3_star", rr.tdm.c3_star - r1.tdm.c3_star}};
  }
  files.emplace_back("summary.json", summary.dump(2) + "\n");

  if (o.as_json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::cout << "region sweep (k=" << cfg.k << ", mu=" << fmt(cfg.mu) << ", alpha="
              << fmt(cfg.alpha) << ", B=" << cfg.buffer_size << ", step=" << fmt(ro.step)
              << ", engine=" << region::to_string(rr.engine) << ")\n";
    std::cout << "  points = " << rr.points.size() << ", frontier = "
              << rr.upper_boundary.size() << "\n";
    std::cout << "  c2* = " << fmt(rr.tdm.c2_star) << "  c3* = " << fmt(rr.tdm.c3_star)
              << "\n";
    std::cout << "  farthest above TDM: (c3, c2) = (" << fmt(rr.farthest.c3) << ", "
              << fmt(rr.farthest.c2) << ") at r=(" << fmt(rr.farthest.policy.r1) << ","
              << fmt(rr.farthest.policy.r2) << "," << fmt(rr.farthest.policy.r3)
              << "), distance " << fmt(rr.farthest_distance) << "\n";
    std::cout << "  area above TDM = " << fmt(rr.areas.a_triangle) << "  ratio = "
              << fmt(rr.areas.ratio) << "\n";
    std::cout << "  wrote " << files.size() + 1 << " files to " << o.out << "\n";
  }

  json params = common_params(o);
  params["step"] = ro.step;
  params["engine"] = ro.engine;
  params["compare_b1"] = ro.compare_b1;
  emit_outputs(o, "region", params, files);
  return 0;
}

// --- rerun --------------------------------------------------------------------

CommonOpts common_from_params(const json& p) {
  CommonOpts o;
  o.k = p.at("k").get<int>();
  o.mu = p.at("mu").get<double>();
  o.alpha = p.at("alpha").get<double>();
  o.buffer = p.at("B").get<int>();
  o.r = p.at("r").get<std::string>();
  o.as_json = p.at("json").get<bool>();
  o.out = p.at("out").get<std::string>();
  return o;
}

int run_rerun(const std::string& manifest_path, const std::string& out_override) {
  const RunManifest m = read_manifest(manifest_path);
  CommonOpts o = common_from_params(m.params);
  if (!out_override.empty()) o.out = out_override;
  if (m.command == "analytic") return run_analytic(o);
  if (m.command == "solve") return run_solve(o, m.params.value("dump_chain", false));
  if (m.command == "simulate") {
    SimulateOpts so;
    so.duration = m.params.at("duration").get<double>();
    so.seed = m.params.at("seed").get<std::uint64_t>();
    so.reps = m.params.at("reps").get<int>();
    so.trace = m.params.value("trace", std::string{});
    return run_simulate(o, so);
  }
  if (m.command == "region") {
    RegionOpts ro;
    ro.step = m.params.at("step").get<double>();
    ro.engine = m.params.at("engine").get<std::string>();
    ro.compare_b1 = m.params.at("compare_b1").get<bool>();
    return run_region(o, ro);
  }
  throw ValidationError("manifest names unknown command '" + m.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity analysis toolkit for a star-topology entanglement switch"};
  app.require_subcommand(1);

  CommonOpts a_opts;
  CLI::App* cmd_analytic =
      app.add_subcommand("analytic", "closed-form capacities, maxima, bounding lines");
  add_common(cmd_analytic, a_opts, true);

  CommonOpts s_opts;
  bool dump_chain = false;
  CLI::App* cmd_solve =
      app.add_subcommand("solve", "build the Markov chain and solve for capacities");
  add_common(cmd_solve, s_opts, true);
  cmd_solve->add_flag("--dump-chain", dump_chain, "also print the transition table");

  CommonOpts m_opts;
  SimulateOpts sim_opts;
  CLI::App* cmd_sim =
      app.add_subcommand("simulate", "Monte Carlo cross-check against the chain solution");
  add_common(cmd_sim, m_opts, true);
  cmd_sim->add_option("--duration", sim_opts.duration, "simulated seconds per replication")
      ->capture_default_str();
  cmd_sim->add_option("--seed", sim_opts.seed, "base RNG seed")->capture_default_str();
  cmd_sim->add_option("--reps", sim_opts.reps, "independent replications (>= 2)")
      ->capture_default_str();
  cmd_sim->add_option("--trace", sim_opts.trace, "write a per-event CSV for one replication");

  CommonOpts r_opts;
  RegionOpts region_opts;
  CLI::App* cmd_region =
      app.add_subcommand("region", "sweep the policy grid and emit the capacity region");
  add_common(cmd_region, r_opts, true);
  cmd_region->add_option("--step", region_opts.step, "policy grid step in (0, 0.5]")
      ->capture_default_str();
  cmd_region->add_option("--engine", region_opts.engine, "auto, analytic, or ctmc")
      ->capture_default_str();
  cmd_region->add_flag("--compare-b1", region_opts.compare_b1,
                       "also sweep the B=1 region for comparison (B=2 runs)");

  std::string manifest_path, rerun_out;
  CLI::App* cmd_rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
  cmd_rerun->add_option("--manifest", manifest_path, "path to manifest.json")->required();
  cmd_rerun->add_option("--out", rerun_out, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_analytic) return run_analytic(a_opts);
    if (*cmd_solve) return run_solve(s_opts, dump_chain);
    if (*cmd_sim) return run_simulate(m_opts, sim_opts);
    if (*cmd_region) return run_region(r_opts, region_opts);
    if (*cmd_rerun) return run_rerun(manifest_path, rerun_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
