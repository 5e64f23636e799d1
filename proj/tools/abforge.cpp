// abforge: compile abelian-computable functions to gate networks, execute
// them under pluggable schedules, and verify networks against their function
// oracles.
//
// Exit codes: 0 success, 1 verification/validation failure, 2 usage error,
// 3 step budget exceeded.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "abforge/json_io.hpp"
#include "abforge/synth.hpp"
#include "abforge/verify.hpp"

namespace {

using namespace abforge;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return json::parse(in);  // parse errors carry byte positions
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

enum class FileKind { processor, zilep, network };

FileKind detect_kind(const json& j) {
  if (j.contains("nodes") && j.contains("edges")) return FileKind::network;
  if (j.contains("transitions")) return FileKind::processor;
  if (j.contains("table") && j.contains("coeffs")) return FileKind::zilep;
  throw ParseError("unrecognized document: expected a processor, function, or "
                   "network file");
}

std::uint64_t env_seed(std::uint64_t fallback) {
  if (const char* s = std::getenv("ABFORGE_SEED")) {
    char* end = nullptr;
    std::uint64_t v = std::strtoull(s, &end, 10);
    if (end && *end == '\0') return v;
  }
  return fallback;
}

Vec parse_input_list(const std::string& text) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoll(item));
  }
  return out;
}

std::string halting_name(HaltingVerdict::Kind k) {
  switch (k) {
    case HaltingVerdict::Kind::acyclic: return "acyclic";
    case HaltingVerdict::Kind::feedback_ok: return "feedback_ok";
    case HaltingVerdict::Kind::unknown: return "unknown";
  }
  return "?";
}

int cmd_check(const std::string& path, bool as_json) {
  json doc = load_json(path);
  json out;
  bool ok = true;
  switch (detect_kind(doc)) {
    case FileKind::processor: {
      AbelianProcessor p = processor_from_json(doc);
      AbelianVerdict v = check_abelian(p);
      out["type"] = "processor";
      out["abelian"] = v.ok;
      if (!v.ok) {
        out["counterexample"] = {{"letter_i", v.letter_i},
                                 {"letter_j", v.letter_j},
                                 {"state", v.state}};
        ok = false;
        break;
      }
      RecurrenceInfo info = classify_recurrence(p);
      if (info.error) {
        out["error"] = *info.error;
        ok = false;
        break;
      }
      out["recurrent"] = info.recurrent;
      out["recurrent_class_size"] =
          static_cast<std::int64_t>(info.recurrent_class.size());
      out["exponent"] = exponent(p);
      break;
    }
    case FileKind::zilep: {
      ZilepFunction f = zilep_from_json(doc);  // validates the invariants
      out["type"] = "function";
      out["k"] = f.arity;
      out["l"] = f.outputs;
      out["zilp"] = f.is_zilp();
      out["bounded"] = is_bounded(f).first;
      out["periods"] = f.periods;
      out["margins"] = f.margins;
      break;
    }
    case FileKind::network: {
      Network net = network_from_json(doc);  // validates wiring
      HaltingVerdict hv = check_halting(net);
      out["type"] = "network";
      out["nodes"] = static_cast<std::int64_t>(net.nodes.size());
      out["edges"] = static_cast<std::int64_t>(net.edges.size());
      out["halting"] = halting_name(hv.kind);
      ok = hv.halts_guaranteed();
      break;
    }
  }
  out["ok"] = ok;
  if (as_json) {
    std::cout << canonical_dump(out);
  } else {
    if (out["type"] == "processor" && ok) {
      std::cout << (out["recurrent"].get<bool>() ? "recurrent" : "transient")
                << ", exponent " << out["exponent"].get<std::int64_t>()
                << "\n";
    } else if (out["type"] == "processor") {
      if (out.contains("counterexample"))
        std::cout << "not abelian: letters ("
                  << out["counterexample"]["letter_i"].get<int>() << ","
                  << out["counterexample"]["letter_j"].get<int>()
                  << ") disagree on state "
                  << out["counterexample"]["state"].get<int>() << "\n";
      else
        std::cout << "invalid: " << out["error"].get<std::string>() << "\n";
    } else if (out["type"] == "function") {
      std::cout << (out["zilp"].get<bool>() ? "ZILP" : "ZILEP") << ", k="
                << out["k"].get<int>() << ", l=" << out["l"].get<int>()
                << (out["bounded"].get<bool>() ? ", bounded" : "") << "\n";
    } else {
      std::cout << "network: " << out["nodes"].get<std::int64_t>()
                << " nodes, halting " << out["halting"].get<std::string>()
                << "\n";
    }
  }
  return ok ? kExitOk : kExitFail;
}

int cmd_compile(const std::string& path, const std::string& mode,
                const std::vector<std::string>& rewrites,
                const std::string& out_path, const std::string& report_path,
                bool as_json) {
  ZilepFunction f = zilep_from_json(load_json(path));
  SynthMode m = SynthMode::automatic;
  if (mode == "recurrent") m = SynthMode::recurrent;
  else if (mode == "bounded") m = SynthMode::bounded;
  else if (mode == "general") m = SynthMode::general;
  else if (mode != "auto")
    throw CLI::ValidationError("--mode", "unknown mode '" + mode + "'");
  CompileResult res = compile(f, m, rewrites);
  write_text(out_path, canonical_dump(network_to_json(res.net)));
  json rep = report_to_json(res.report);
  if (!report_path.empty()) write_text(report_path, canonical_dump(rep));
  if (as_json) {
    std::cerr << canonical_dump(rep);
  } else {
    std::cerr << "nodes " << res.report.nodes << ", edges " << res.report.edges
              << ", topplers " << res.report.toppler_count
              << ", floor-depth bound " << res.report.floor_depth_bound
              << (res.report.acyclic ? ", acyclic" : ", cyclic") << "\n";
    std::cerr << "passes:";
    for (const auto& p : res.report.passes) std::cerr << " " << p;
    std::cerr << "\n";
  }
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& input,
            const std::string& schedule, std::uint64_t seed,
            std::int64_t budget_mult, bool trace, bool as_json) {
  Network net = network_from_json(load_json(path));
  Vec x = parse_input_list(input);
  if (static_cast<int>(x.size()) != net.num_inputs())
    throw CLI::ValidationError(
        "--input", "expected " + std::to_string(net.num_inputs()) +
                       " comma-separated counts");
  Schedule sched;
  if (schedule == "lowest") sched.policy = SchedulePolicy::lowest_edge;
  else if (schedule == "roundrobin") sched.policy = SchedulePolicy::round_robin;
  else if (schedule == "random") sched.policy = SchedulePolicy::seeded_random;
  else throw CLI::ValidationError("--schedule", "unknown policy");
  sched.seed = seed;
  RunResult r = run(net, x, sched, budget_mult * default_step_budget(net, x),
                    trace);
  json out;
  out["halted"] = r.halted;
  out["steps"] = r.halted ? r.steps : r.state.steps;
  if (r.halted) {
    out["output"] = r.output;
    out["trash"] = r.trash;
    out["final_states"] = r.final_states;
  } else {
    out["pending_letters"] = r.state.edge_count;
    out["states"] = r.state.node_state;
  }
  if (as_json) {
    std::cout << canonical_dump(out);
  } else if (r.halted) {
    std::cout << "output:";
    for (auto v : r.output) std::cout << " " << v;
    std::cout << "\ntrash:";
    for (auto v : r.trash) std::cout << " " << v;
    std::cout << "\nsteps: " << r.steps << "\nstates:";
    for (std::size_t v = 0; v < r.final_states.size(); ++v)
      std::cout << " " << net.nodes[v].label() << "="
                << r.final_states[v];
    std::cout << "\n";
  } else {
    std::cout << "step budget exceeded after " << r.state.steps << " steps\n";
  }
  if (trace) {
    for (const auto& t : r.trace)
      std::cout << "  edge " << t.edge << " -> node " << t.node << " ("
                << net.nodes[static_cast<std::size_t>(t.node)].label()
                << " in state " << t.state_before << ")\n";
  }
  return r.halted ? kExitOk : kExitBudget;
}

int cmd_verify(const std::string& fn_path, const std::string& net_path,
               const std::string& grid, int fuzz, int fuzz_points,
               std::uint64_t seed, std::int64_t budget_mult, bool as_json) {
  ZilepFunction f = zilep_from_json(load_json(fn_path));
  Network net = network_from_json(load_json(net_path));
  VerifyConfig cfg;
  if (!grid.empty()) cfg.grid_hi = parse_input_list(grid);
  cfg.fuzz_schedules = fuzz;
  cfg.fuzz_points = fuzz_points;
  cfg.seed = seed;
  cfg.budget_mult = budget_mult;
  VerifyReport rep = verify_network(f, net, cfg);
  json out;
  out["pass"] = rep.pass;
  out["grid_points"] = rep.points;
  out["runs"] = rep.runs;
  out["fuzz_runs"] = rep.fuzz_runs;
  out["monotone_checks"] = rep.monotone_checks;
  out["seed"] = rep.seed;
  if (rep.failure) {
    out["failure"] = {{"point", rep.failure->point},
                      {"what", rep.failure->what}};
  }
  if (as_json) {
    std::cout << canonical_dump(out);
  } else if (rep.pass) {
    std::cout << "PASS: " << rep.points << " grid points, " << rep.fuzz_runs
              << " fuzz runs, seed " << rep.seed << "\n";
  } else {
    std::cout << "FAIL at (";
    for (std::size_t i = 0; i < rep.failure->point.size(); ++i)
      std::cout << (i ? "," : "") << rep.failure->point[i];
    std::cout << "): " << rep.failure->what << "\n";
  }
  return rep.pass ? kExitOk : kExitFail;
}

int cmd_export(const std::string& path, const std::string& format,
               const std::string& out_path) {
  Network net = network_from_json(load_json(path));
  if (format == "dot") {
    write_text(out_path, export_dot(net));
  } else if (format == "json") {
    write_text(out_path, canonical_dump(network_to_json(net)));
  } else {
    throw CLI::ValidationError("--format", "expected dot or json");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"abelian gate network compiler and execution engine"};
  app.require_subcommand(1);

  std::string path, second, mode = "auto", schedule = "lowest";
  std::string out_path, report_path, input, grid, format = "dot";
  std::vector<std::string> rewrites;
  bool as_json = false, trace = false;
  std::uint64_t seed = env_seed(0x5eed);
  std::int64_t budget_mult = 1;
  int fuzz = 100, fuzz_points = 10;

  auto* check = app.add_subcommand(
      "check", "validate a processor, function, or network file");
  check->add_option("path", path)->required();
  check->add_flag("--json", as_json, "machine-readable verdict");

  auto* comp = app.add_subcommand(
      "compile", "synthesize a gate network for a function file");
  comp->add_option("path", path)->required();
  comp->add_option("--mode", mode, "auto|recurrent|bounded|general");
  comp->add_option("--rewrite", rewrites,
                   "post passes: unprime, feedback (repeatable)");
  comp->add_option("-o,--output", out_path, "network file ('-' for stdout)");
  comp->add_option("--report", report_path, "write the report as JSON");
  comp->add_flag("--json", as_json, "print the report as JSON");

  auto* runc = app.add_subcommand("run", "execute a network once");
  runc->add_option("path", path)->required();
  runc->add_option("--input", input, "comma-separated letter counts")
      ->required();
  runc->add_option("--schedule", schedule, "lowest|roundrobin|random");
  runc->add_option("--seed", seed, "seed for the random schedule");
  runc->add_option("--budget-mult", budget_mult, "step budget multiplier");
  runc->add_flag("--trace", trace, "log every processing step");
  runc->add_flag("--json", as_json);

  auto* ver = app.add_subcommand(
      "verify", "compare a network against its function oracle");
  ver->add_option("function", path)->required();
  ver->add_option("network", second)->required();
  ver->add_option("--grid", grid, "per-coordinate upper bounds");
  ver->add_option("--fuzz", fuzz, "random schedules per sampled point");
  ver->add_option("--fuzz-points", fuzz_points, "number of sampled points");
  ver->add_option("--seed", seed);
  ver->add_option("--budget-mult", budget_mult);
  ver->add_flag("--json", as_json);

  auto* exp = app.add_subcommand("export", "emit DOT or normalized JSON");
  exp->add_option("path", path)->required();
  exp->add_option("--format", format, "dot|json");
  exp->add_option("-o,--output", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(path, as_json);
    if (comp->parsed())
      return cmd_compile(path, mode, rewrites, out_path, report_path, as_json);
    if (runc->parsed())
      return cmd_run(path, input, schedule, seed, budget_mult, trace, as_json);
    if (ver->parsed())
      return cmd_verify(path, second, grid, fuzz, fuzz_points, seed,
                        budget_mult, as_json);
    if (exp->parsed()) return cmd_export(path, format, out_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
