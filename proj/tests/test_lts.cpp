#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "lfcheck/aut.hpp"
#include "lfcheck/lts.hpp"
#include "support/random_lts.hpp"

using namespace lfcheck;

namespace {

// A four-state chain: Call(1,inc) . tau . Ret(1,inc) -- the shape a one-shot
// single-thread counter client produces.
Lts counter_chain() {
  return make_lts(4, 0,
                  {{0u, ActionLabel::call(1, "inc"), 1u},
                   {1u, ActionLabel::tau(), 2u},
                   {2u, ActionLabel::ret(1, "inc"), 3u}});
}

}  // namespace

TEST_CASE("labels compare and print", "[lts]") {
  ActionLabel t = ActionLabel::tau();
  CHECK(t.is_tau());
  CHECK(t.str() == "tau");

  ActionLabel c = ActionLabel::call(1, "push", LabelValue::integer(2));
  CHECK(c.str() == "call(1, push, 2)");
  ActionLabel r = ActionLabel::ret(2, "pop", LabelValue::empty());
  CHECK(r.str() == "ret(2, pop, EMPTY)");
  ActionLabel r2 = ActionLabel::ret(2, "inc");
  CHECK(r2.str() == "ret(2, inc)");

  CHECK(t < c);
  CHECK(c < r);  // Call kind orders before Ret
  CHECK(c == ActionLabel::call(1, "push", LabelValue::integer(2)));
  CHECK(c != r);
  CHECK(std::hash<ActionLabel>{}(c) ==
        std::hash<ActionLabel>{}(ActionLabel::call(1, "push", LabelValue::integer(2))));
}

TEST_CASE("make_lts basic construction", "[lts]") {
  Lts single = make_lts(1, 0, {});
  CHECK(single.num_states() == 1);
  CHECK(single.num_transitions() == 0);
  CHECK(single.initial() == 0);
  CHECK(single.labels().size() == 1);  // tau is always present
  CHECK(single.is_tau(kTauLabel));

  Lts chain = counter_chain();
  CHECK(chain.num_states() == 4);
  CHECK(chain.num_transitions() == 3);
  REQUIRE(chain.out(0).size() == 1);
  CHECK(chain.label(chain.out(0)[0].label) == ActionLabel::call(1, "inc"));
  CHECK(chain.out(1)[0].label == kTauLabel);
  CHECK(chain.out(3).empty());
}

TEST_CASE("make_lts rejects bad input", "[lts]") {
  CHECK_THROWS_AS(make_lts(2, 0, {{0u, ActionLabel::tau(), 5u}}), LtsError);
  CHECK_THROWS_WITH(make_lts(2, 0, {{0u, ActionLabel::tau(), 5u}}),
                    Catch::Matchers::ContainsSubstring("out of range"));
  CHECK_THROWS_AS(make_lts(2, 7, {}), LtsError);
  CHECK_THROWS_AS(make_lts(0, 0, {}), LtsError);
}

TEST_CASE("lts equality is by value", "[lts]") {
  Lts a = counter_chain();
  Lts b = counter_chain();
  CHECK(a == b);

  // Same structure built through a builder that interned labels in a
  // different order must still compare equal (labels compared by value).
  LtsBuilder bld;
  bld.intern(ActionLabel::ret(1, "inc"));  // force different label ids
  bld.add(0, ActionLabel::call(1, "inc"), 1);
  bld.add(1, ActionLabel::tau(), 2);
  bld.add(2, ActionLabel::ret(1, "inc"), 3);
  Lts c = std::move(bld).build(4, 0);
  CHECK(a == c);

  Lts d = make_lts(4, 0,
                   {{0u, ActionLabel::call(1, "inc"), 1u},
                    {1u, ActionLabel::tau(), 2u},
                    {2u, ActionLabel::ret(1, "dec"), 3u}});
  CHECK_FALSE(a == d);
}

TEST_CASE("disjoint_union renumbers the right side", "[lts]") {
  Lts a = counter_chain();
  Lts b = make_lts(2, 1, {{1u, ActionLabel::tau(), 0u}});
  Lts u = disjoint_union(a, b);
  CHECK(u.num_states() == 6);
  CHECK(u.num_transitions() == 4);
  CHECK(u.initial() == a.initial());
  // b's initial lands at offset + 1.
  REQUIRE(u.out(5).size() == 1);
  CHECK(u.out(5)[0].dst == 4);
  CHECK(u.is_tau(u.out(5)[0].label));
  // a's part is untouched.
  CHECK(u.label(u.out(0)[0].label) == ActionLabel::call(1, "inc"));
}

TEST_CASE("reachable drops unreachable islands and canonicalizes", "[lts]") {
  // States 4,5 form an island; state order after BFS from 2 is 2,0,3,1 ->
  // renumbered 0,1,2,3.
  Lts l = make_lts(6, 2,
                   {{2u, ActionLabel::tau(), 0u},
                    {2u, ActionLabel::call(1, "a"), 3u},
                    {0u, ActionLabel::ret(1, "a"), 1u},
                    {4u, ActionLabel::tau(), 5u}});
  Lts r = reachable(l);
  CHECK(r.num_states() == 4);
  CHECK(r.num_transitions() == 3);
  CHECK(r.initial() == 0);

  // Idempotent: already-canonical stays identical (including state naming).
  Lts rr = reachable(r);
  CHECK(rr == r);
  CHECK(rr.num_states() == r.num_states());
  CHECK(write_aut(rr) == write_aut(r));
}

TEST_CASE("reroot explores from the new root", "[lts]") {
  Lts chain = counter_chain();
  Lts tail = reroot(chain, 2);
  CHECK(tail.num_states() == 2);
  CHECK(tail.num_transitions() == 1);
  CHECK(tail.label(tail.out(0)[0].label) == ActionLabel::ret(1, "inc"));
}

TEST_CASE("follow_visible walks unique labeled edges", "[lts]") {
  Lts chain = counter_chain();
  CHECK(follow_visible(chain, 0, ActionLabel::call(1, "inc")) == 1);
  CHECK_THROWS_AS(follow_visible(chain, 0, ActionLabel::call(2, "inc")), LtsError);

  Lts amb = make_lts(3, 0,
                     {{0u, ActionLabel::call(1, "a"), 1u},
                      {0u, ActionLabel::call(1, "a"), 2u}});
  CHECK_THROWS_AS(follow_visible(amb, 0, ActionLabel::call(1, "a")), LtsError);
}

TEST_CASE("witness replay validates paths and lassos", "[lts]") {
  Lts l = make_lts(3, 0,
                   {{0u, ActionLabel::call(1, "a"), 1u},
                    {1u, ActionLabel::tau(), 2u},
                    {2u, ActionLabel::tau(), 1u}});

  Witness path;
  path.prefix = {{0u, ActionLabel::call(1, "a")}};
  path.end_state = 1;
  CHECK(replay_witness(l, path));
  CHECK_FALSE(path.is_lasso());

  Witness lasso;
  lasso.prefix = {{0u, ActionLabel::call(1, "a")}};
  lasso.cycle = {{1u, ActionLabel::tau()}, {2u, ActionLabel::tau()}};
  lasso.end_state = 1;
  CHECK(replay_witness(l, lasso));
  CHECK(lasso.is_lasso());

  Witness bad = lasso;
  bad.cycle[1].second = ActionLabel::ret(1, "a");
  CHECK_FALSE(replay_witness(l, bad));

  Witness wrong_end = path;
  wrong_end.end_state = 2;
  CHECK_FALSE(replay_witness(l, wrong_end));
}

TEST_CASE("aut writing matches the exact expected bytes", "[aut]") {
  CHECK(write_aut(make_lts(1, 0, {})) == "des (0, 0, 1)\n");

  Lts tau_chain = make_lts(2, 0, {{0u, ActionLabel::tau(), 1u}});
  CHECK(write_aut(tau_chain) == "des (0, 1, 2)\n(0, \"i\", 1)\n");

  Lts chain = counter_chain();
  CHECK(write_aut(chain) ==
        "des (0, 3, 4)\n"
        "(0, \"CALL !T1 !INC !NONE\", 1)\n"
        "(1, \"i\", 2)\n"
        "(2, \"RET !T1 !INC !NONE\", 3)\n");

  Lts stack = make_lts(3, 0,
                       {{0u, ActionLabel::call(1, "push", LabelValue::integer(2)), 1u},
                        {1u, ActionLabel::ret(2, "pop", LabelValue::empty()), 2u}});
  CHECK(write_aut(stack) ==
        "des (0, 2, 3)\n"
        "(0, \"CALL !T1 !PUSH !2\", 1)\n"
        "(1, \"RET !T2 !POP !EMPTY\", 2)\n");
}

TEST_CASE("aut reading inverts writing", "[aut]") {
  Lts chain = counter_chain();
  Lts back = read_aut(write_aut(chain));
  CHECK(back == chain);
  CHECK(write_aut(back) == write_aut(chain));

  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    Lts l = testsupport::random_lts(rng);
    Lts rt = read_aut(write_aut(l));
    CHECK(rt.num_states() == l.num_states());
    CHECK(write_aut(rt) == write_aut(l));
    CHECK(rt == l);
  }
}

TEST_CASE("aut reading rejects malformed input", "[aut]") {
  CHECK_THROWS_AS(read_aut("nonsense"), AutError);
  CHECK_THROWS_AS(read_aut("des (0, 1, 2)\n(0, \"i\", 9)\n"), AutError);
  CHECK_THROWS_AS(read_aut("des (0, 2, 2)\n(0, \"i\", 1)\n"), AutError);
  CHECK_THROWS_AS(read_aut("des (0, 1, 2)\n(0, \"WAT !X\", 1)\n"), AutError);
  CHECK_THROWS_WITH(read_aut("des (0, 1, 2)\n(0, \"WAT !X\", 1)\n"),
                    Catch::Matchers::ContainsSubstring("unknown label encoding"));
  // Missing quotes around tau is not accepted.
  CHECK_THROWS_AS(read_aut("des (0, 1, 2)\n(0, i, 1)\n"), AutError);
}

TEST_CASE("random generator emits valid ltss", "[lts]") {
  std::mt19937 rng(42);
  for (int i = 0; i < 500; ++i) {
    Lts l = testsupport::random_lts(rng);
    CHECK(l.num_states() >= 1);
    CHECK(l.num_states() <= 12);
    for (const Transition& t : l.transitions()) {
      CHECK(t.src < l.num_states());
      CHECK(t.dst < l.num_states());
      CHECK(t.label < l.labels().size());
    }
    Lts p = testsupport::perturb(rng, l);
    CHECK(p.num_states() == l.num_states());
  }
}
