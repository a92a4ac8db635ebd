// Tests for the built-in model catalog: name lookup, the sync between the
// embedded sources and the files under models/, validity of every source,
// the expected verdicts at each entry's canonical bounds, agreement between
// trace refinement and the brute-force linearizability oracle, and the
// structural relationship between the two hazard-pointer variants.

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lfcheck/bisim.hpp"
#include "lfcheck/explore.hpp"
#include "lfcheck/models.hpp"
#include "lfcheck/oracle.hpp"
#include "lfcheck/parser.hpp"
#include "lfcheck/traces.hpp"
#include "lfcheck/validate.hpp"

using namespace lfcheck;
using Catch::Matchers::ContainsSubstring;

namespace {

Exploration build(const std::string& source, const Bounds& b) {
  return explore(compile(parse_model(source)), b);
}

Lts model_lts(const ModelEntry& e, const Bounds& b) { return build(e.source, b).lts; }

/// Source lines with comment lines and blank lines dropped.
std::vector<std::string> code_lines(const std::string& src) {
  std::vector<std::string> out;
  std::istringstream in(src);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) continue;
    if (line.compare(i, 2, "//") == 0) continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("catalog lists every model and rejects unknown names", "[models]") {
  const std::vector<ModelEntry>& cat = model_catalog();
  std::vector<std::string> names;
  for (const ModelEntry& e : cat) names.push_back(e.name);
  std::vector<std::string> expected = {
      "counter_abs",  "counter_cas", "counter_d1", "counter_d2",
      "counter_d3",   "stack_spec",  "treiber",    "treiber_hp",
      "treiber_hp_buggy", "treiber_mutant_blind_pop"};
  CHECK(names == expected);

  for (const std::string& n : names) CHECK(get_model(n).name == n);

  // Spec partners point back into the catalog; specs have none.
  for (const ModelEntry& e : cat) {
    if (e.role == ModelRole::Spec) {
      CHECK(e.spec.empty());
    } else {
      CHECK(get_model(e.spec).role == ModelRole::Spec);
    }
  }

  CHECK_THROWS_WITH(get_model("nosuch"),
                    ContainsSubstring("counter_abs") &&
                        ContainsSubstring("treiber_mutant_blind_pop"));
}

TEST_CASE("embedded sources match the files under models/", "[models]") {
  for (const ModelEntry& e : model_catalog()) {
    INFO(e.name);
    std::ifstream f(std::string(LFCHECK_MODELS_DIR) + "/" + e.name + ".mdl",
                    std::ios::binary);
    REQUIRE(f.good());
    std::stringstream text;
    text << f.rdbuf();
    CHECK(text.str() == e.source);
  }
}

TEST_CASE("every model parses, validates, and explores at its bounds", "[models]") {
  for (const ModelEntry& e : model_catalog()) {
    INFO(e.name);
    ast::Model m = parse_model(e.source);
    CHECK(validate(m).empty());
    Exploration ex = explore(compile(m), e.bounds);
    CHECK(ex.lts.num_states() > 1);
    bool has_call = false;
    for (const ActionLabel& a : ex.lts.labels())
      if (a.kind == ActionLabel::Kind::Call) has_call = true;
    CHECK(has_call);
  }
}

TEST_CASE("specification entries admit no internal cycle", "[models]") {
  for (const ModelEntry& e : model_catalog()) {
    if (e.role != ModelRole::Spec) continue;
    INFO(e.name);
    CHECK_FALSE(spec_lockfree_sanity(model_lts(e, e.bounds)).has_value());
  }
  // The spinning-decrement counter is the canonical rejection.
  const ModelEntry& d2 = get_model("counter_d2");
  std::optional<Witness> lasso = spec_lockfree_sanity(model_lts(d2, d2.bounds));
  REQUIRE(lasso.has_value());
  CHECK(lasso->is_lasso());
}

TEST_CASE("expected verdicts hold at the canonical bounds", "[models]") {
  for (const ModelEntry& e : model_catalog()) {
    INFO(e.name);
    const ModelEntry& partner = e.spec.empty() ? e : get_model(e.spec);
    Lts impl = model_lts(e, e.bounds);
    Lts spec = model_lts(partner, e.bounds);

    CHECK(equivalent(impl, spec, false).equivalent == e.expected.bisim);
    CHECK(equivalent(impl, spec, true).equivalent == e.expected.div_bisim);
    CHECK(traces_refine(impl, spec).holds == e.expected.refinement);

    ObjectReport r = verify_object(impl, spec);
    CHECK(r.linearizable == e.expected.linearizable);
    CHECK(r.lock_free == e.expected.lock_free);
  }
}

TEST_CASE("trace refinement and the brute-force oracle agree on the catalog",
          "[models]") {
  for (const ModelEntry& e : model_catalog()) {
    INFO(e.name);
    Lts impl = model_lts(e, e.bounds);
    std::size_t max_events = 2u * e.bounds.threads * e.bounds.ops;
    SeqSpec seq = e.name.find("counter") == 0
                      ? counter_seq_spec(0)
                      : stack_seq_spec(e.bounds.values, {1});
    ObjectLinResult o = check_object_lin(impl, seq, max_events);
    CHECK(o.linearizable == e.expected.refinement);
    if (!o.linearizable) {
      REQUIRE(o.failing.has_value());
      CHECK_FALSE(o.failing->empty());
    }
  }
}

TEST_CASE("hazard-pointer variants differ only in the reclamation logic",
          "[models]") {
  const ModelEntry& good = get_model("treiber_hp");
  const ModelEntry& bad = get_model("treiber_hp_buggy");

  // Textually: identical code up through the hazard-pointer clear after the
  // popped value is read, and identical from the final return on.
  std::vector<std::string> gl = code_lines(good.source);
  std::vector<std::string> bl = code_lines(bad.source);
  std::size_t split = 0;
  while (split < gl.size() && split < bl.size() && gl[split] == bl[split]) ++split;
  std::size_t value_read = 0;
  for (std::size_t i = 0; i < gl.size(); ++i)
    if (gl[i].find("o.value") != std::string::npos) value_read = i;
  CHECK(value_read > 0);
  CHECK(split > value_read + 1);  // prefix covers the hp clear as well
  REQUIRE(gl.size() >= 2);
  REQUIRE(bl.size() >= 2);
  CHECK(gl[gl.size() - 2] == "  return res;");
  CHECK(bl[bl.size() - 2] == "  return res;");
  CHECK(gl.back() == "}");
  CHECK(bl.back() == "}");

  // Behaviourally: with pop never invoked the two are the same machine.
  Bounds push_only;
  push_only.threads = 2;
  push_only.ops = 1;
  push_only.values = 1;
  push_only.thread_methods[1] = {"push"};
  push_only.thread_methods[2] = {"push"};
  CHECK(model_lts(good, push_only) == model_lts(bad, push_only));

  // The broken reclaim scan is the only divergence on either side.
  CHECK_FALSE(find_tau_lasso(model_lts(good, good.bounds)).has_value());
  CHECK(find_tau_lasso(model_lts(bad, bad.bounds)).has_value());
}

TEST_CASE("broken reclamation spins exactly while another thread pins the node",
          "[models]") {
  const ModelEntry& bad = get_model("treiber_hp_buggy");
  Exploration ex = build(bad.source, bad.bounds);
  Lts spec = model_lts(get_model("stack_spec"), bad.bounds);

  ObjectReport r = verify_object(ex.lts, spec);
  CHECK(r.linearizable == Claim::Verified);
  CHECK(r.lock_free == Claim::Refuted);
  REQUIRE(r.witness.has_value());
  const Witness& w = *r.witness;
  REQUIRE(w.is_lasso());

  // The witness lives in the disjoint union (implementation states first);
  // an all-tau lasso never crosses into the specification component.
  Lts u = disjoint_union(ex.lts, spec);
  CHECK(replay_witness(u, w));
  for (const auto& [state, action] : w.cycle) {
    CHECK(action.is_tau());
    REQUIRE(state < ex.lts.num_states());
  }

  // On every state of the cycle exactly one hazard slot is occupied: the
  // spinning thread cleared its own before scanning, the parked thread
  // still pins the node the scan is waiting on.
  const Machine& m = *ex.machine;
  for (const auto& [state, action] : w.cycle) {
    const Config& c = ex.configs[state];
    int pinned = 0;
    for (int t = 1; t <= bad.bounds.threads; ++t)
      if (m.shared_value(c, "hp", t) != kNullRef) ++pinned;
    CHECK(pinned == 1);
  }
}
