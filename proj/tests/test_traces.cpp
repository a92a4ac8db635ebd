#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lfcheck/bisim.hpp"
#include "lfcheck/traces.hpp"
#include "support/bisim_oracle.hpp"
#include "support/counter_models.hpp"
#include "support/random_lts.hpp"

using namespace lfcheck;

namespace {

const ActionLabel A = ActionLabel::call(1, "a");
const ActionLabel B = ActionLabel::call(1, "b");
const ActionLabel C = ActionLabel::call(1, "c");
const ActionLabel T = ActionLabel::tau();

// Does `l` perform the visible trace (with any interleaved silent steps)?
bool accepts(const Lts& l, const std::vector<ActionLabel>& trace) {
  MacroState cur = detail::tau_closure(l, {l.initial()});
  for (const ActionLabel& a : trace) {
    auto lab = l.find_label(a);
    if (!lab) return false;
    MacroState next;
    for (StateId s : cur)
      for (const Transition& t : l.out(s))
        if (t.label == *lab) next.push_back(t.dst);
    if (next.empty()) return false;
    cur = detail::tau_closure(l, next);
  }
  return true;
}

}  // namespace

TEST_CASE("refinement holds reflexively and through silent steps", "[traces]") {
  std::mt19937 rng(99);
  for (int i = 0; i < 100; ++i) {
    Lts l = testsupport::random_lts(rng);
    CHECK(traces_refine(l, l).holds);
  }

  Lts with_tau = make_lts(4, 0, {{0u, A, 1u}, {1u, T, 2u}, {2u, B, 3u}});
  Lts without = make_lts(3, 0, {{0u, A, 1u}, {1u, B, 2u}});
  CHECK(traces_refine(with_tau, without).holds);
  CHECK(traces_refine(without, with_tau).holds);
}

TEST_CASE("branching differences are invisible to traces", "[traces]") {
  Lts one = make_lts(4, 0, {{0u, A, 1u}, {1u, B, 2u}, {1u, C, 3u}});
  Lts two = make_lts(5, 0, {{0u, A, 1u}, {0u, A, 2u}, {1u, B, 3u}, {2u, C, 4u}});
  CHECK(traces_refine(one, two).holds);
  CHECK(traces_refine(two, one).holds);

  Lts guarded = make_lts(4, 0, {{0u, B, 1u}, {0u, T, 2u}, {2u, C, 3u}});
  Lts flat = make_lts(3, 0, {{0u, B, 1u}, {0u, C, 2u}});
  CHECK(traces_refine(guarded, flat).holds);
  CHECK(traces_refine(flat, guarded).holds);
}

TEST_CASE("violations come with a shortest rejected trace", "[traces]") {
  Lts longer = make_lts(3, 0, {{0u, A, 1u}, {1u, B, 2u}});
  Lts shorter = make_lts(2, 0, {{0u, A, 1u}});
  RefinementResult r = traces_refine(longer, shorter);
  REQUIRE_FALSE(r.holds);
  REQUIRE(r.counterexample.size() == 2);
  CHECK(r.counterexample[0] == A);
  CHECK(r.counterexample[1] == B);
  CHECK(accepts(longer, r.counterexample));
  CHECK_FALSE(accepts(shorter, r.counterexample));

  // A label the right side has never heard of fails immediately.
  Lts foreign = make_lts(2, 0, {{0u, C, 1u}});
  r = traces_refine(foreign, shorter);
  REQUIRE_FALSE(r.holds);
  REQUIRE(r.counterexample.size() == 1);
  CHECK(r.counterexample[0] == C);
}

TEST_CASE("refinement agrees with bounded trace enumeration", "[traces]") {
  std::mt19937 rng(424242);
  int holds_count = 0;
  for (int i = 0; i < 250; ++i) {
    Lts a = testsupport::random_lts(rng);
    Lts b = (i % 2 == 0) ? testsupport::perturb(rng, a) : testsupport::random_lts(rng);
    RefinementResult fwd = traces_refine(a, b);
    RefinementResult bwd = traces_refine(b, a);

    auto ta = testsupport::traces_up_to(a, 8);
    auto tb = testsupport::traces_up_to(b, 8);
    if (fwd.holds) {
      ++holds_count;
      for (const auto& tr : ta) REQUIRE(tb.count(tr) == 1);
    } else {
      REQUIRE(accepts(a, fwd.counterexample));
      REQUIRE_FALSE(accepts(b, fwd.counterexample));
    }
    if (fwd.holds && bwd.holds) REQUIRE(ta == tb);

    // Branching bisimilarity implies trace equivalence.
    if (equivalent(a, b, false).equivalent) {
      REQUIRE(fwd.holds);
      REQUIRE(bwd.holds);
    }
  }
  CHECK(holds_count > 10);
}

TEST_CASE("counter variants under refinement", "[traces]") {
  Lts d1 = testsupport::counter_after_calls(testsupport::kCounterAtomicPair);
  Lts d2 = testsupport::counter_after_calls(testsupport::kCounterSpinningDec);

  // The spinning decrement produces strictly fewer traces: refinement is
  // blind to its missing progress.
  CHECK(traces_refine(d2, d1).holds);

  RefinementResult r = traces_refine(d1, d2);
  REQUIRE_FALSE(r.holds);
  REQUIRE_FALSE(r.counterexample.empty());
  const ActionLabel& last = r.counterexample.back();
  CHECK(last.kind == ActionLabel::Kind::Ret);
  CHECK(last.method == "dec");
  CHECK(last.thread == 1);

  RefinementCheck checked = linearizable_by_refinement(d2, d1);
  CHECK(checked.result.holds);
  CHECK(checked.seconds >= 0.0);
}
