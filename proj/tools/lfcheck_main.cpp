// lfcheck: bounded verification of concurrent objects against atomic
// specifications.
//
//   verify   equivalence verdicts (linearizability, lock-freedom) plus the
//            trace-refinement cross-check, with counterexample rendering
//   explore  build one model's transition system, print stats, export .aut
//   oracle   brute-force linearizability check over enumerated histories
//   bench    equivalence-vs-refinement timing table over a model/bound grid
//
// Exit codes: 0 the checked property holds, 1 it was refuted, 2 bad input
// (arguments, sources, unknown models), 3 a resource cap was hit.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lfcheck/aut.hpp"
#include "lfcheck/bisim.hpp"
#include "lfcheck/explore.hpp"
#include "lfcheck/models.hpp"
#include "lfcheck/oracle.hpp"
#include "lfcheck/parser.hpp"
#include "lfcheck/report.hpp"
#include "lfcheck/traces.hpp"
#include "lfcheck/validate.hpp"

namespace {

using namespace lfcheck;

constexpr int kExitHolds = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitInput = 2;
constexpr int kExitResource = 3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Argument parsing helpers

/// "1:dec,2:inc" -> thread-method restrictions; a thread may appear several
/// times to allow several methods.
void parse_client(const std::string& text, Bounds& b) {
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t colon = part.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == part.size())
      throw LtsError("bad --client entry '" + part + "', expected THREAD:METHOD");
    int thread = 0;
    try {
      std::size_t used = 0;
      thread = std::stoi(part.substr(0, colon), &used);
      if (used != colon || thread <= 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw LtsError("bad thread id in --client entry '" + part + "'");
    }
    b.thread_methods[thread].push_back(part.substr(colon + 1));
  }
}

/// Accepts the same action syntax reports print: "tau", "call(1, dec)",
/// "ret(2, pop, EMPTY)", "call(1, push, 1)". Whitespace is free.
ActionLabel parse_action(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s += c;
  if (s == "tau") return ActionLabel::tau();
  bool is_call = s.rfind("call(", 0) == 0;
  bool is_ret = s.rfind("ret(", 0) == 0;
  if ((!is_call && !is_ret) || s.back() != ')')
    throw LtsError("bad action '" + text + "', expected call(T, method[, value])");
  std::string body = s.substr(is_call ? 5 : 4);
  body.pop_back();
  std::vector<std::string> parts;
  std::istringstream in(body);
  std::string part;
  while (std::getline(in, part, ',')) parts.push_back(part);
  if (parts.size() < 2 || parts.size() > 3)
    throw LtsError("bad action '" + text + "', expected call(T, method[, value])");
  int thread = 0;
  try {
    std::size_t used = 0;
    thread = std::stoi(parts[0], &used);
    if (used != parts[0].size() || thread <= 0) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw LtsError("bad thread id in action '" + text + "'");
  }
  LabelValue value = LabelValue::none();
  if (parts.size() == 3) {
    if (parts[2] == "EMPTY") {
      value = LabelValue::empty();
    } else if (parts[2] == "NONE") {
      value = LabelValue::none();
    } else {
      try {
        std::size_t used = 0;
        value = LabelValue::integer(std::stoi(parts[2], &used));
        if (used != parts[2].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw LtsError("bad value in action '" + text + "'");
      }
    }
  }
  return is_call ? ActionLabel::call(thread, parts[1], value)
                 : ActionLabel::ret(thread, parts[1], value);
}

std::vector<int32_t> parse_int_list(const std::string& text) {
  std::vector<int32_t> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw LtsError("bad integer list entry '" + part + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model resolution and construction

struct NamedSource {
  std::string name;    // catalog name, or the path as given
  std::string source;
};

/// Catalog names win; anything else is read from the filesystem.
NamedSource resolve_model(const std::string& arg) {
  for (const ModelEntry& e : model_catalog())
    if (e.name == arg) return {e.name, e.source};
  if (std::filesystem::exists(arg)) {
    std::ifstream f(arg, std::ios::binary);
    std::stringstream text;
    text << f.rdbuf();
    return {arg, text.str()};
  }
  // Not a file either: report the catalog so typos get a useful message.
  get_model(arg);
  return {};  // unreachable; get_model throws
}

Exploration build_model(const NamedSource& m, const Bounds& b) {
  ast::Model ast = parse_model(m.source);
  validate_or_throw(ast);
  return explore(compile(ast), b);
}

/// Advances past the given visible actions (each must be unique at its
/// state) and re-roots the system there.
Lts apply_start_after(Lts l, const std::vector<std::string>& actions) {
  if (actions.empty()) return l;
  StateId s = l.initial();
  for (const std::string& text : actions) s = follow_visible(l, s, parse_action(text));
  return reroot(l, s);
}

// ---------------------------------------------------------------------------
// Shared option block

struct CommonOpts {
  Bounds bounds;
  std::string client;
  std::vector<std::string> start_after;
  bool json = false;
  bool timings = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool with_start_after) {
  cmd->add_option("--threads", o.bounds.threads, "number of concurrent threads")
      ->capture_default_str();
  cmd->add_option("--ops", o.bounds.ops, "operations per thread")->capture_default_str();
  cmd->add_option("--values", o.bounds.values, "argument values 1..V for method parameters")
      ->capture_default_str();
  cmd->add_option("--pool", o.bounds.pool, "node pool size (0: threads*ops+1)")
      ->capture_default_str();
  cmd->add_option("--state-cap", o.bounds.state_cap, "abort beyond this many states")
      ->capture_default_str();
  cmd->add_option("--client", o.client,
                  "restrict threads to methods, e.g. \"1:dec,2:inc\"");
  if (with_start_after)
    cmd->add_option("--start-after", o.start_after,
                    "visible action to advance past before checking, e.g. "
                    "\"call(1, dec)\"; repeatable, applied in order");
  cmd->add_flag("--json", o.json, "print a JSON report instead of text");
  cmd->add_flag("--timings", o.timings,
                "include wall-times in the JSON report (off keeps reports "
                "byte-stable across runs)");
}

Bounds effective_bounds(const CommonOpts& o) {
  Bounds b = o.bounds;
  if (!o.client.empty()) parse_client(o.client, b);
  if (b.pool == 0) b.pool = b.threads * b.ops + 1;
  return b;
}

void emit(const Json& j, const std::string& human, bool as_json) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << human;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOpts {
  CommonOpts common;
  std::string impl;
  std::string spec;
  bool no_divergence = false;
};

int cmd_verify(const VerifyOpts& opt) {
  Bounds b = effective_bounds(opt.common);
  NamedSource impl_src = resolve_model(opt.impl);
  NamedSource spec_src = resolve_model(opt.spec);
  Lts impl = apply_start_after(build_model(impl_src, b).lts, opt.common.start_after);
  Lts spec = apply_start_after(build_model(spec_src, b).lts, opt.common.start_after);

  Json j = report_head("verify");
  j["impl"] = lts_json(impl_src.name, impl);
  j["spec"] = lts_json(spec_src.name, spec);
  j["bounds"] = bounds_json(b);
  if (!opt.common.start_after.empty()) {
    Json sa = Json::array();
    for (const std::string& a : opt.common.start_after) sa.push_back(parse_action(a).str());
    j["start_after"] = sa;
  }
  j["divergence_sensitive"] = !opt.no_divergence;

  std::string human;
  char buf[256];
  std::snprintf(buf, sizeof buf, "impl %s: %u states, %zu transitions\n",
                impl_src.name.c_str(), impl.num_states(), impl.num_transitions());
  human += buf;
  std::snprintf(buf, sizeof buf, "spec %s: %u states, %zu transitions\n",
                spec_src.name.c_str(), spec.num_states(), spec.num_transitions());
  human += buf;
  std::snprintf(buf, sizeof buf, "bounds: threads=%d ops=%d values=%d pool=%d\n",
                b.threads, b.ops, b.values, b.pool);
  human += buf;

  bool headline = false;
  std::optional<Witness> witness;
  std::string note;
  Json checks = Json::object();
  Claim lin = Claim::NotEstablished;
  Claim lf = Claim::NotEstablished;

  auto t0 = std::chrono::steady_clock::now();
  if (opt.no_divergence) {
    Verdict v = equivalent(impl, spec, false);
    headline = v.equivalent;
    checks["bisim"] = v.equivalent;
    lin = v.equivalent ? Claim::Verified : Claim::NotEstablished;
    lf = Claim::NotEstablished;
    witness = v.witness;
    note = v.equivalent
               ? "branching bisimilar, hence linearizable; divergence not checked"
               : "not branching bisimilar; bisimilarity is sufficient but not "
                 "necessary, so linearizability is not refuted";
    human += std::string("branching equivalence: ") + (headline ? "yes" : "NO") + "\n";
  } else {
    ObjectReport r = verify_object(impl, spec);
    headline = r.divergence_verdict.equivalent;
    checks["div_bisim"] = r.divergence_verdict.equivalent;
    if (r.plain_verdict) checks["bisim"] = r.plain_verdict->equivalent;
    lin = r.linearizable;
    lf = r.lock_free;
    witness = r.witness;
    note = r.note;
    human += std::string("divergence-sensitive branching equivalence: ") +
             (headline ? "yes" : "NO") + "\n";
    if (r.plain_verdict)
      human += std::string("divergence-blind branching equivalence: ") +
               (r.plain_verdict->equivalent ? "yes" : "NO") + "\n";
  }
  double bisim_seconds = seconds_since(t0);

  RefinementCheck rc = linearizable_by_refinement(impl, spec);
  checks["refinement"] = rc.result.holds;

  j["checks"] = checks;
  j["claims"] = {{"linearizable", claim_name(lin)}, {"lock_free", claim_name(lf)}};
  j["note"] = note;
  if (witness) j["witness"] = witness_json(*witness);
  if (!rc.result.holds) j["refinement_counterexample"] = trace_json(rc.result.counterexample);
  if (opt.common.timings)
    j["timings"] = {{"bisim_seconds", bisim_seconds},
                    {"refinement_seconds", rc.seconds}};

  human += std::string("linearizable: ") + claim_name(lin) + "\n";
  human += std::string("lock-free: ") + claim_name(lf) + "\n";
  human += "note: " + note + "\n";
  human += std::string("trace refinement: ") + (rc.result.holds ? "holds" : "FAILS") + "\n";
  if (!rc.result.holds)
    human += "  counterexample: " + render_trace(rc.result.counterexample) + "\n";
  if (witness) {
    human += "witness (disjoint union, impl states first):\n";
    human += render_witness(*witness);
  }
  std::snprintf(buf, sizeof buf, "times: bisim %.3fs, refinement %.3fs\n", bisim_seconds,
                rc.seconds);
  human += buf;

  emit(j, human, opt.common.json);
  return headline ? kExitHolds : kExitRefuted;
}

// ---------------------------------------------------------------------------
// explore

struct ExploreOpts {
  CommonOpts common;
  std::string model;
  std::string aut_path;
};

int cmd_explore(const ExploreOpts& opt) {
  Bounds b = effective_bounds(opt.common);
  NamedSource src = resolve_model(opt.model);
  auto t0 = std::chrono::steady_clock::now();
  Lts l = apply_start_after(build_model(src, b).lts, opt.common.start_after);
  double explore_seconds = seconds_since(t0);

  std::vector<uint8_t> div = divergent_states(l);
  std::size_t divergent = 0;
  for (uint8_t d : div) divergent += d;

  Json j = report_head("explore");
  j["model"] = lts_json(src.name, l);
  j["bounds"] = bounds_json(b);
  if (!opt.common.start_after.empty()) {
    Json sa = Json::array();
    for (const std::string& a : opt.common.start_after) sa.push_back(parse_action(a).str());
    j["start_after"] = sa;
  }
  j["labels"] = l.labels().size();
  j["divergent_states"] = divergent;

  std::string human;
  char buf[256];
  std::snprintf(buf, sizeof buf, "model %s: %u states, %zu transitions, %zu labels\n",
                src.name.c_str(), l.num_states(), l.num_transitions(), l.labels().size());
  human += buf;
  std::snprintf(buf, sizeof buf, "divergent states: %zu\n", divergent);
  human += buf;

  if (!opt.aut_path.empty()) {
    std::ofstream out(opt.aut_path, std::ios::binary);
    if (!out) throw LtsError("cannot write aut file '" + opt.aut_path + "'");
    write_aut(out, l);
    j["aut"] = opt.aut_path;
    human += "aut written: " + opt.aut_path + "\n";
  }
  if (opt.common.timings) j["timings"] = {{"explore_seconds", explore_seconds}};
  std::snprintf(buf, sizeof buf, "time: explore %.3fs\n", explore_seconds);
  human += buf;

  emit(j, human, opt.common.json);
  return kExitHolds;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOpts {
  CommonOpts common;
  std::string model;
  std::string kind;
  std::size_t max_events = 0;  // 0: 2 * threads * ops
  std::string seq_initial;     // comma ints; default by kind
};

int cmd_oracle(const OracleOpts& opt) {
  Bounds b = effective_bounds(opt.common);
  NamedSource src = resolve_model(opt.model);
  Lts l = build_model(src, b).lts;

  std::size_t max_events =
      opt.max_events ? opt.max_events
                     : static_cast<std::size_t>(2) * b.threads * b.ops;
  SeqSpec seq;
  std::string initial_text = opt.seq_initial;
  if (opt.kind == "stack") {
    if (initial_text.empty()) initial_text = "1";
    seq = stack_seq_spec(b.values, parse_int_list(initial_text));
  } else if (opt.kind == "counter") {
    if (initial_text.empty()) initial_text = "0";
    std::vector<int32_t> init = parse_int_list(initial_text);
    if (init.size() != 1) throw LtsError("counter takes a single initial value");
    seq = counter_seq_spec(init[0]);
  } else {
    throw LtsError("unknown sequential spec kind '" + opt.kind +
                   "', expected stack or counter");
  }

  auto t0 = std::chrono::steady_clock::now();
  ObjectLinResult res = check_object_lin(l, seq, max_events);
  double oracle_seconds = seconds_since(t0);

  Json j = report_head("oracle");
  j["model"] = lts_json(src.name, l);
  j["bounds"] = bounds_json(b);
  j["seq_spec"] = {{"kind", opt.kind}, {"initial", parse_int_list(initial_text)}};
  j["max_events"] = max_events;
  j["linearizable"] = res.linearizable;
  if (res.failing) j["failing_history"] = trace_json(*res.failing);
  if (opt.common.timings) j["timings"] = {{"oracle_seconds", oracle_seconds}};

  std::string human;
  char buf[256];
  std::snprintf(buf, sizeof buf, "model %s: %u states, %zu transitions\n", src.name.c_str(),
                l.num_states(), l.num_transitions());
  human += buf;
  std::snprintf(buf, sizeof buf, "histories up to %zu events against the sequential %s: %s\n",
                max_events, opt.kind.c_str(),
                res.linearizable ? "linearizable" : "NOT linearizable");
  human += buf;
  if (res.failing) human += "failing history: " + render_trace(*res.failing) + "\n";
  std::snprintf(buf, sizeof buf, "time: oracle %.3fs\n", oracle_seconds);
  human += buf;

  emit(j, human, opt.common.json);
  return res.linearizable ? kExitHolds : kExitRefuted;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  std::string models = "treiber,treiber_hp";
  int threads = 2;
  int max_ops = 2;
  int values = 1;
  uint64_t state_cap = 5'000'000;
  bool json = false;
  bool timings = false;
};

int cmd_bench(const BenchOpts& opt) {
  std::vector<std::string> names;
  {
    std::istringstream in(opt.models);
    std::string part;
    while (std::getline(in, part, ',')) names.push_back(part);
  }

  Json rows = Json::array();
  std::string human =
      "model                      k/n   states      trans      div-bisim        refinement\n";

  for (const std::string& name : names) {
    const ModelEntry& entry = get_model(name);
    const ModelEntry& partner = entry.spec.empty() ? entry : get_model(entry.spec);
    for (int ops = 1; ops <= opt.max_ops; ++ops) {
      Bounds b;
      b.threads = opt.threads;
      b.ops = ops;
      b.values = opt.values;
      b.pool = b.threads * b.ops + 1;
      b.state_cap = opt.state_cap;

      Json row;
      row["model"] = name;
      row["spec"] = partner.name;
      row["threads"] = b.threads;
      row["ops"] = ops;
      char buf[256];
      try {
        auto t0 = std::chrono::steady_clock::now();
        Lts impl = build_model({name, entry.source}, b).lts;
        Lts spec = build_model({partner.name, partner.source}, b).lts;
        double explore_seconds = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        Verdict v = equivalent(impl, spec, true);
        double bisim_seconds = seconds_since(t0);
        RefinementCheck rc = linearizable_by_refinement(impl, spec);

        row["states"] = impl.num_states();
        row["transitions"] = impl.num_transitions();
        row["spec_states"] = spec.num_states();
        row["div_bisim"] = v.equivalent;
        row["refinement"] = rc.result.holds;
        if (opt.timings)
          row["timings"] = {{"explore_seconds", explore_seconds},
                            {"bisim_seconds", bisim_seconds},
                            {"refinement_seconds", rc.seconds}};
        std::snprintf(buf, sizeof buf,
                      "%-26s %d/%-3d %-11u %-10zu %-3s %9.3fs   %-3s %9.3fs\n",
                      name.c_str(), b.threads, ops, impl.num_states(),
                      impl.num_transitions(), v.equivalent ? "yes" : "NO",
                      bisim_seconds, rc.result.holds ? "yes" : "NO", rc.seconds);
        human += buf;
      } catch (const CapacityError& e) {
        row["error"] = "state capacity exceeded";
        std::snprintf(buf, sizeof buf, "%-26s %d/%-3d capacity exceeded (%s)\n",
                      name.c_str(), b.threads, ops, e.what());
        human += buf;
      }
      rows.push_back(row);
    }
  }

  Json j = report_head("bench");
  j["suite"] = {{"models", names},
                {"threads", opt.threads},
                {"max_ops", opt.max_ops},
                {"values", opt.values}};
  j["rows"] = rows;

  if (opt.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << human;
  return kExitHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lfcheck: bounded linearizability and lock-freedom checking of "
      "concurrent objects against atomic specifications"};
  app.require_subcommand(1);

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand(
      "verify", "check an implementation against a specification");
  verify->add_option("impl", vo.impl, "implementation: built-in name or file path")
      ->required();
  verify->add_option("spec", vo.spec, "specification: built-in name or file path")
      ->required();
  add_common_flags(verify, vo.common, true);
  verify->add_flag("--no-divergence", vo.no_divergence,
                   "divergence-blind equivalence only (no lock-freedom verdict)");

  ExploreOpts eo;
  CLI::App* explore_cmd =
      app.add_subcommand("explore", "build a model's transition system");
  explore_cmd->add_option("model", eo.model, "built-in name or file path")->required();
  add_common_flags(explore_cmd, eo.common, true);
  explore_cmd->add_option("--aut", eo.aut_path, "write the system in aut format");

  OracleOpts oo;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "brute-force linearizability check over enumerated histories");
  oracle->add_option("model", oo.model, "built-in name or file path")->required();
  oracle->add_option("kind", oo.kind, "sequential specification: stack or counter")
      ->required();
  add_common_flags(oracle, oo.common, false);
  oracle->add_option("--max-events", oo.max_events,
                     "history length cap (0: 2*threads*ops)");
  oracle->add_option("--seq-initial", oo.seq_initial,
                     "initial sequential state, comma-separated "
                     "(stack contents bottom-first; default \"1\" / \"0\")");

  BenchOpts bo;
  CLI::App* bench = app.add_subcommand(
      "bench", "equivalence vs refinement timing table over a model grid");
  bench->add_option("--models", bo.models, "comma-separated built-in names")
      ->capture_default_str();
  bench->add_option("--threads", bo.threads, "number of concurrent threads")
      ->capture_default_str();
  bench->add_option("--max-ops", bo.max_ops, "run ops = 1..N per model")
      ->capture_default_str();
  bench->add_option("--values", bo.values, "argument values 1..V")->capture_default_str();
  bench->add_option("--state-cap", bo.state_cap, "per-cell state cap")
      ->capture_default_str();
  bench->add_flag("--json", bo.json, "print a JSON report instead of text");
  bench->add_flag("--timings", bo.timings, "include wall-times in the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (app.got_subcommand(verify)) return cmd_verify(vo);
    if (app.got_subcommand(explore_cmd)) return cmd_explore(eo);
    if (app.got_subcommand(oracle)) return cmd_oracle(oo);
    return cmd_bench(bo);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const SpecSanityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << render_witness(e.lasso);
    return kExitInput;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.trace().empty())
      std::cerr << "  after: " << render_trace(e.trace()) << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
