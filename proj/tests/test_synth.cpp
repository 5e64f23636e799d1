#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abforge/synth.hpp"
#include "abforge/verify.hpp"

using namespace abforge;

namespace {

int count_kind(const Network& net, GateKind k) {
  int c = 0;
  for (const auto& n : net.nodes)
    if (n.gate && n.gate->kind == k) ++c;
  return c;
}

std::vector<std::int64_t> toppler_primes(const Network& net) {
  std::vector<std::int64_t> primes;
  for (const auto& n : net.nodes)
    if (n.gate && n.gate->kind == GateKind::toppler)
      primes.push_back(n.gate->prime);
  std::sort(primes.begin(), primes.end());
  return primes;
}

void expect_equal_on_grid(const ZilepFunction& f, const Network& net,
                          int fuzz = 0) {
  VerifyConfig cfg;
  cfg.fuzz_schedules = fuzz;
  VerifyReport rep = verify_network(f, net, cfg);
  if (!rep.failure.has_value()) {
    CHECK(rep.pass);
    return;
  }
  std::string at;
  for (auto v : rep.failure->point) at += std::to_string(v) + ",";
  FAIL_CHECK("mismatch at (" << at << "): " << rep.failure->what);
}

ZilepFunction quarter_ramp() {
  return make_zilep(1, 1, {Rational(3, 4)}, {4}, {0}, {0, 1, 3, 3, 3});
}

// periods (4,5), slopes (1/2,4/5), genuinely coupled in both coordinates
ZilepFunction coupled_pair() {
  return tabulate1(
      2,
      [](const Vec& v) {
        return (5 * v[0] + 4 * v[1]) / 20 + (v[0] + 2) / 4 + (3 * v[1] + 2) / 5;
      },
      {20, 20}, {0, 0});
}

}  // namespace

TEST_CASE("linear synthesis") {
  ZilepFunction dbl =
      make_zilep(1, 1, {Rational(2)}, {1}, {0}, {0, 2});
  Network net = synth_linear(dbl);
  CHECK(run(net, {3}).output[0] == 6);

  ZilepFunction add2 = tabulate(
      2, 1, [](const Vec& x) { return Vec{x[0] + x[1]}; }, {1, 1}, {0, 0});
  Network adder = synth_linear(add2);
  CHECK(adder.nodes.size() == 1);
  CHECK(run(adder, {3, 4}).output[0] == 7);

  // 2x2 integer matrix against direct evaluation
  ZilepFunction mat = tabulate(
      2, 2,
      [](const Vec& x) {
        return Vec{2 * x[0] + 3 * x[1], x[0]};
      },
      {1, 1}, {0, 0});
  Network mnet = synth_linear(mat);
  for (std::int64_t a = 0; a <= 5; ++a)
    for (std::int64_t b = 0; b <= 5; ++b) {
      RunResult r = run(mnet, {a, b});
      CHECK(r.output == Vec{2 * a + 3 * b, a});
    }

  ZilepFunction saw = quarter_ramp();
  CHECK_THROWS_AS(synth_linear(saw), SynthError);
}

TEST_CASE("unary recurrent synthesis: toppler bank with exact priming") {
  ZilepFunction f = quarter_ramp();
  Network net = synth_unary_recurrent(f);
  CHECK(count_kind(net, GateKind::toppler) == 3);
  CHECK(toppler_primes(net) == std::vector<std::int64_t>{2, 2, 3});
  const std::vector<std::int64_t> expected = {0, 1, 3, 3, 3, 4,
                                              6, 6, 6, 7, 9, 9, 9};
  for (std::size_t x = 0; x < expected.size(); ++x)
    CHECK(run(net, {static_cast<std::int64_t>(x)}).output[0] == expected[x]);

  ZilepFunction fifth = tabulate1(
      1, [](const Vec& x) { return x[0] / 5; }, {5}, {0});
  Network single = synth_unary_recurrent(fifth);
  CHECK(count_kind(single, GateKind::toppler) == 1);
  CHECK(single.nodes.size() == 1);

  ZilepFunction ident = tabulate1(
      1, [](const Vec& x) { return x[0]; }, {1}, {0});
  Network wire = synth_unary_recurrent(ident);
  for (std::int64_t x = 0; x <= 9; ++x)
    CHECK(run(wire, {x}).output[0] == x);
}

TEST_CASE("meagerization: partition identity and meager pieces") {
  for (std::int64_t m = 1; m <= 50; ++m)
    for (std::int64_t y = 0; y <= 10000; y += 373) {
      std::int64_t total = 0;
      for (std::int64_t j = 0; j < m; ++j) total += (y + j) / m;
      CHECK(total == y);
    }

  ZilepFunction f = coupled_pair();
  std::int64_t m = f.quantum(0, 1);
  CHECK(m == 4);
  std::vector<ZilepFunction> pieces = meagerize(f, 1);
  CHECK(pieces.size() == 4);
  for (const auto& pc : pieces) {
    CHECK(pc.is_zilp());
    CHECK(pc.quantum(0, 1) == 1);
  }
  for (std::int64_t a = 0; a <= 12; ++a)
    for (std::int64_t b = 0; b <= 12; ++b) {
      std::int64_t total = 0;
      for (const auto& pc : pieces) total += pc.eval1({a, b});
      CHECK(total == f.eval1({a, b}));
    }

  ZilepFunction half = tabulate1(
      2, [](const Vec& x) { return (x[0] + x[1]) / 2; }, {2, 2}, {0, 0});
  CHECK(meagerize(half, 1).size() == 1);
}

TEST_CASE("main reduction: fold the last coordinate into one toppler") {
  ZilepFunction half = tabulate1(
      2, [](const Vec& x) { return (x[0] + x[1]) / 2; }, {2, 2}, {0, 0});
  MainReduction mr = main_reduction(half);
  CHECK(mr.lambda == 2);
  CHECK(mr.offset == 0);
  for (std::int64_t x = 0; x <= 10; ++x) CHECK(mr.g.eval1({x}) == x);

  // function independent of the leading coordinate folds to zero
  ZilepFunction third = tabulate1(
      2, [](const Vec& x) { return x[1] / 3; }, {1, 3}, {0, 0});
  MainReduction flat = main_reduction(third);
  CHECK(flat.offset == 0);
  CHECK(is_identically_zero(flat.g));

  // reconstruction identity on a wide grid, independent recomputation
  ZilepFunction f = meagerize(coupled_pair(), 1)[2];
  MainReduction mr2 = main_reduction(f);
  for (std::int64_t a = 0; a <= 15; ++a)
    for (std::int64_t b = 0; b <= 15; ++b)
      CHECK(f.eval1({a, b}) ==
            floordiv(mr2.g.eval1({a}) + b + mr2.offset, mr2.lambda));
}

TEST_CASE("recurrent synthesis end to end") {
  ZilepFunction f = coupled_pair();
  std::vector<std::string> log;
  Network net = synth_recurrent(f, &log);
  CHECK(is_acyclic(net));
  CHECK(count_kind(net, GateKind::delayer) == 0);
  CHECK(count_kind(net, GateKind::presink) == 0);
  VerifyConfig cfg;
  cfg.grid_hi = {13, 15};
  cfg.fuzz_schedules = 5;
  VerifyReport rep = verify_network(f, net, cfg);
  CHECK(rep.pass);
  CHECK(std::find(log.begin(), log.end(), "meagerize") != log.end());
  CHECK(std::find(log.begin(), log.end(), "main-reduction") != log.end());

  ZilepFunction add2 = tabulate(
      2, 1, [](const Vec& x) { return Vec{x[0] + x[1]}; }, {1, 1}, {0, 0});
  Network adder = synth_recurrent(add2);
  CHECK(adder.nodes.size() == 1);

  ZilepFunction pm = pseudomin_zilep(2, {0, 0});
  Network pmnet = synth_recurrent(pm);
  expect_equal_on_grid(pm, pmnet);
}

TEST_CASE("recurrent synthesis of a multi-output function") {
  // (x+y, floor((x+y)/2)): tests output splitting
  ZilepFunction f = tabulate(
      2, 2,
      [](const Vec& x) {
        return Vec{x[0] + x[1], (x[0] + x[1]) / 2};
      },
      {2, 2}, {0, 0});
  Network net = synth_recurrent(f);
  for (std::int64_t a = 0; a <= 6; ++a)
    for (std::int64_t b = 0; b <= 6; ++b) {
      RunResult r = run(net, {a, b});
      CHECK(r.output == Vec{a + b, (a + b) / 2});
    }
}

TEST_CASE("bounded synthesis") {
  ZilepFunction once = tabulate1(
      1, [](const Vec& x) { return x[0] > 0 ? 1 : 0; }, {1}, {1});
  Network presink_net = synth_bounded(once);
  CHECK(presink_net.nodes.size() == 1);
  CHECK(count_kind(presink_net, GateKind::presink) == 1);

  ZilepFunction thresh4 = tabulate1(
      1, [](const Vec& x) { return x[0] >= 4 ? 1 : 0; }, {1}, {4});
  Network t4 = synth_bounded(thresh4);
  CHECK(count_kind(t4, GateKind::delayer) == 3);
  CHECK(count_kind(t4, GateKind::presink) == 1);
  CHECK(count_kind(t4, GateKind::toppler) == 0);
  for (std::int64_t x = 0; x <= 10; ++x)
    CHECK(run(t4, {x}).output[0] == (x >= 4 ? 1 : 0));

  ZilepFunction boxmin = tabulate1(
      2,
      [](const Vec& x) {
        return std::min<std::int64_t>(std::min(x[0], x[1]), 2);
      },
      {1, 1}, {2, 2});
  Network mnet = synth_bounded(boxmin);
  CHECK(count_kind(mnet, GateKind::toppler) == 0);
  for (std::int64_t a = 0; a <= 4; ++a)
    for (std::int64_t b = 0; b <= 4; ++b)
      CHECK(run(mnet, {a, b}).output[0] ==
            std::min<std::int64_t>(std::min(a, b), 2));

  ZilepFunction unbounded = quarter_ramp();
  CHECK_THROWS_AS(synth_bounded(unbounded), SynthError);
}

TEST_CASE("two layer fragments") {
  // F(y,z) = min(z,1): layers collapse onto the presink behavior
  ZilepFunction zmin = tabulate1(
      2, [](const Vec& x) { return x[1] > 0 ? 1 : 0; }, {1, 1}, {0, 1});
  Network n1 = synth_two_layer(zmin);
  for (std::int64_t y = 0; y <= 4; ++y)
    for (std::int64_t z = 0; z <= 4; ++z)
      CHECK(run(n1, {y, z}).output[0] == (z > 0 ? 1 : 0));

  // F(y,z) = y: the layer coordinate is dropped
  ZilepFunction proj = tabulate1(
      2, [](const Vec& x) { return x[0]; }, {1, 1}, {0, 0});
  Network n2 = synth_two_layer(proj);
  for (std::int64_t y = 0; y <= 5; ++y)
    for (std::int64_t z = 0; z <= 5; ++z)
      CHECK(run(n2, {y, z}).output[0] == y);

  // F(y,z) = y + min(z,1)
  ZilepFunction mixed = tabulate1(
      2, [](const Vec& x) { return x[0] + (x[1] > 0 ? 1 : 0); }, {1, 1},
      {0, 1});
  Network n3 = synth_two_layer(mixed);
  for (std::int64_t y = 0; y <= 6; ++y)
    for (std::int64_t z = 0; z <= 6; ++z)
      CHECK(run(n3, {y, z}).output[0] == y + (z > 0 ? 1 : 0));

  // condition violated: genuinely increasing past z = 1
  ZilepFunction ramp = tabulate1(
      2, [](const Vec& x) { return x[1] / 2; }, {1, 2}, {0, 0});
  CHECK_THROWS_AS(synth_two_layer(ramp), SynthError);
}

TEST_CASE("staircase indices permute the next n layer values") {
  CHECK(zeta_targets(4, 1) == Vec{4, 1, 2, 3});
  CHECK(zeta_targets(4, 0) == Vec{0, 1, 2, 3});
  CHECK(zeta_targets(3, 7) == Vec{9, 7, 8});
  for (std::int64_t n = 1; n <= 5; ++n)
    for (std::int64_t z = 0; z <= 20; ++z) {
      Vec t = zeta_targets(n, z);
      std::sort(t.begin(), t.end());
      for (std::int64_t j = 0; j < n; ++j)
        CHECK(t[static_cast<std::size_t>(j)] == z + j);
    }
}

TEST_CASE("interleave plan: offsets, layers, and the central identity") {
  // F(y,z) = floor(z/2): case 1 with n = 2, offsets (0,0)
  ZilepFunction f = tabulate1(
      2, [](const Vec& x) { return x[1] / 2; }, {1, 2}, {0, 2});
  InterleavePlan plan = interleave_plan(f, 2, 1);
  CHECK(plan.offsets == Vec{0, 0});
  CHECK(plan.combiner.eval1({0, 0}) == 0);

  // case 0: F(y,z) = min(z,2), n = 2; layers are constant past zeta = 1
  ZilepFunction capped = tabulate1(
      2,
      [](const Vec& x) { return std::min<std::int64_t>(x[1], 2); }, {1, 1},
      {0, 2});
  InterleavePlan plan0 = interleave_plan(capped, 2, 0);
  for (const auto& g : plan0.layer_fns) {
    Box b = g.box();
    Vec x = b.origin();
    do {
      if (x[1] >= 1) {
        Vec y = x;
        y[1] = 1;
        CHECK(g.eval1(x) == g.eval1(y));
      }
    } while (b.next(x));
  }
}

TEST_CASE("interleaving rearrangement: sorted layer samples equal a window") {
  ZilepFunction f = tabulate1(
      2, [](const Vec& x) { return (x[0] + x[1]) / 2; }, {2, 2}, {0, 0});
  const std::int64_t n = 3;
  for (std::int64_t y = 0; y <= 6; ++y)
    for (std::int64_t z = 0; z <= 10; ++z) {
      Vec targets = zeta_targets(n, z);
      Vec values;
      for (auto zt : targets) values.push_back(f.eval1({y, zt}));
      std::sort(values.begin(), values.end());
      for (std::int64_t j = 0; j < n; ++j)
        CHECK(values[static_cast<std::size_t>(j)] == f.eval1({y, z + j}));
    }
}

TEST_CASE("general synthesis: unary base case with margins") {
  // (x-1)^+ : one delayer, nothing else mutable on the spine
  ZilepFunction delay = tabulate1(
      1, [](const Vec& x) { return x[0] > 0 ? x[0] - 1 : 0; }, {1}, {1});
  Network dnet = synth_general(delay);
  CHECK(count_kind(dnet, GateKind::delayer) == 1);
  expect_equal_on_grid(delay, dnet);

  // mixed ramp with a transient bump, checked out to 20
  ZilepFunction mix = tabulate1(
      1,
      [](const Vec& x) { return (x[0] + 1) / 2 + (x[0] > 0 ? 1 : 0); }, {2},
      {1});
  Network mnet = synth_general(mix);
  for (std::int64_t x = 0; x <= 20; ++x)
    CHECK(run(mnet, {x}).output[0] == (x + 1) / 2 + (x > 0 ? 1 : 0));
}

TEST_CASE("general synthesis: two coordinates, slope and margin mix") {
  // case 1 route: W=1, L=2, R=1 -> n=2
  ZilepFunction f1 = tabulate1(
      2,
      [](const Vec& x) {
        return (x[0] + x[1] + (x[1] > 0 ? 1 : 0)) / 2;
      },
      {2, 2}, {0, 1});
  std::vector<std::string> log;
  Network n1 = synth_general(f1, &log);
  CHECK(is_acyclic(n1));
  expect_equal_on_grid(f1, n1);
  CHECK(std::find(log.begin(), log.end(), "interleave-case1") != log.end());

  // case 0 route: slope 0 in z beyond margin 2
  ZilepFunction f0 = tabulate1(
      2,
      [](const Vec& x) {
        return x[0] / 2 + std::min<std::int64_t>(x[1], 2);
      },
      {2, 1}, {0, 2});
  std::vector<std::string> log0;
  Network n0 = synth_general(f0, &log0);
  expect_equal_on_grid(f0, n0);
  CHECK(std::find(log0.begin(), log0.end(), "interleave-case0") != log0.end());

  // recurrent input passes through the recurrent pipeline unchanged
  ZilepFunction zilp = coupled_pair();
  Network nz = synth_general(zilp);
  CHECK(count_kind(nz, GateKind::delayer) == 0);
  CHECK(count_kind(nz, GateKind::presink) == 0);
}

TEST_CASE("general synthesis: transient margins on both coordinates") {
  ZilepFunction f = tabulate1(
      2,
      [](const Vec& x) {
        return (x[0] + x[1] + std::min<std::int64_t>(x[0], 1) +
                std::min<std::int64_t>(x[1], 1)) /
               2;
      },
      {2, 2}, {1, 1});
  CHECK(f.margins == Vec{1, 1});
  Network net = synth_general(f);
  CHECK(is_acyclic(net));
  expect_equal_on_grid(f, net);
}

TEST_CASE("general synthesis: three-layer interleave with its combiner") {
  // slope 0 past margin 3 in z: case 0 with three layers
  ZilepFunction f = tabulate1(
      2,
      [](const Vec& x) {
        return x[0] / 2 + std::min<std::int64_t>(x[1], 3);
      },
      {2, 1}, {0, 3});
  std::vector<std::string> log;
  Network net = synth_general(f, &log);
  CHECK(std::find(log.begin(), log.end(), "interleave-case0") != log.end());
  expect_equal_on_grid(f, net);
}

TEST_CASE("unpriming rewrite preserves the function") {
  ZilepFunction f = quarter_ramp();
  Network net = synth_recurrent(f);
  Network rewritten = rewrite_unprime(net);
  for (const auto& n : rewritten.nodes)
    if (n.gate && n.gate->kind == GateKind::toppler) CHECK(n.gate->prime == 0);
  for (std::int64_t x = 0; x <= 12; ++x)
    CHECK(run(rewritten, {x}).output[0] == f.eval1({x}));
  CHECK(is_acyclic(rewritten));

  // unprimed networks stay untouched
  ZilepFunction fifth = tabulate1(
      1, [](const Vec& x) { return x[0] / 5; }, {5}, {0});
  Network plain = synth_recurrent(fifth);
  Network same = rewrite_unprime(plain);
  CHECK(same.nodes.size() == plain.nodes.size());
}

TEST_CASE("feedback rewrite: binary counters for every threshold") {
  for (std::int64_t lambda = 2; lambda <= 9; ++lambda) {
    NetBuilder b(1, 1);
    b.wire(b.through_toppler(NetBuilder::input(0), lambda, 0),
           NetBuilder::output(0));
    Network loop = rewrite_feedback(b.build());
    for (const auto& n : loop.nodes)
      if (n.gate && n.gate->kind == GateKind::toppler)
        CHECK(n.gate->lambda == 2);
    HaltingVerdict hv = check_halting(loop);
    CHECK(hv.halts_guaranteed());
    for (std::int64_t x = 0; x <= 100; ++x)
      CHECK(run(loop, {x}).output[0] == x / lambda);
    AbelianProcessor p = network_to_processor(loop);
    CHECK(exponent(p) % lambda == 0);
  }
  // structure spot checks
  {
    NetBuilder b(1, 1);
    b.wire(b.through_toppler(NetBuilder::input(0), 3, 0),
           NetBuilder::output(0));
    Network three = rewrite_feedback(b.build());
    CHECK(count_kind(three, GateKind::toppler) == 2);
    CHECK(count_kind(three, GateKind::splitter) == 1);
    CHECK(count_kind(three, GateKind::adder) == 1);
    CHECK(toppler_primes(three) == std::vector<std::int64_t>{0, 1});
  }
  {
    NetBuilder b(1, 1);
    b.wire(b.through_toppler(NetBuilder::input(0), 4, 0),
           NetBuilder::output(0));
    Network four = rewrite_feedback(b.build());
    CHECK(count_kind(four, GateKind::toppler) == 2);
    CHECK(count_kind(four, GateKind::adder) == 0);
    CHECK(is_acyclic(four));
  }
}

TEST_CASE("feedback rewrite: primed counters and delayer loops") {
  for (std::int64_t lambda = 3; lambda <= 7; ++lambda)
    for (std::int64_t q = 1; q < lambda; ++q) {
      NetBuilder b(1, 1);
      b.wire(b.through_toppler(NetBuilder::input(0), lambda, q),
             NetBuilder::output(0));
      Network loop = rewrite_feedback(b.build());
      for (std::int64_t x = 0; x <= 60; ++x)
        CHECK(run(loop, {x}).output[0] == (x + q) / lambda);
    }
  ZilepFunction delay = tabulate1(
      1, [](const Vec& x) { return x[0] > 0 ? x[0] - 1 : 0; }, {1}, {1});
  Network dnet = rewrite_feedback(synth_general(delay));
  CHECK(count_kind(dnet, GateKind::delayer) == 0);
  CHECK(check_halting(dnet).halts_guaranteed());
  for (std::int64_t x = 0; x <= 40; ++x)
    CHECK(run(dnet, {x}).output[0] == (x > 0 ? x - 1 : 0));
}

TEST_CASE("reports: counts, acyclicity, and the toppler path bound") {
  Network bank = synth_unary_recurrent(quarter_ramp());
  SynthReport r = report(bank);
  CHECK(r.toppler_count == 3);
  CHECK(r.floor_depth_bound == 1);
  CHECK(r.acyclic);

  Network adder = multiway_tree(GateKind::adder, 2);
  SynthReport ra = report(adder);
  CHECK(ra.toppler_count == 0);
  CHECK(ra.floor_depth_bound == 0);

  ZilepFunction f = coupled_pair();
  SynthReport rc = report(synth_recurrent(f));
  CHECK(rc.acyclic);
  CHECK(rc.floor_depth_bound <= 2);  // arity bound
  CHECK(rc.floor_depth_bound <= rc.toppler_count);
}

TEST_CASE("splitting a multi-output processor's function") {
  // the splitter's own function splits into identities
  ZilepFunction sf = processor_to_zilep(gate_processor(GateSpec::splitter(2)));
  std::vector<ZilepFunction> ids = split_outputs(sf);
  REQUIRE(ids.size() == 2);
  for (const auto& g : ids)
    for (std::int64_t x = 0; x <= 9; ++x) CHECK(g.eval1({x}) == x);

  // a rotor's function splits into one primed ramp per branch, applied to
  // the sum of the three degree inputs
  ZilepFunction rf = processor_to_zilep(network_to_processor(rotor_node(3)));
  REQUIRE(rf.outputs == 3);
  REQUIRE(rf.arity == 3);
  std::vector<ZilepFunction> branches = split_outputs(rf);
  for (std::size_t j = 0; j < branches.size(); ++j) {
    std::int64_t prime = 2 - static_cast<std::int64_t>(j);
    for (std::int64_t x = 0; x <= 20; ++x)
      CHECK(branches[j].eval1({x, 0, 0}) == (x + prime) / 3);
    CHECK(branches[j].eval1({2, 3, 4}) == (9 + prime) / 3);
  }
}

TEST_CASE("canonical processor of the coupled pair has 20 states") {
  ZilepFunction f = coupled_pair();
  CHECK(f.periods == Vec{4, 5});
  CHECK(f.coeff(0, 0) == Rational(1, 2));
  CHECK(f.coeff(0, 1) == Rational(4, 5));
  AbelianProcessor p = zilep_to_processor(f);
  CHECK(p.num_states() == 20);
  CHECK(classify_recurrence(p).recurrent);
  auto [meager, quantum] = is_meager(f, 1);
  CHECK_FALSE(meager);
  CHECK(quantum == 4);
}

TEST_CASE("meagerizing the first coordinate keeps the other period") {
  ZilepFunction f = coupled_pair();
  std::vector<ZilepFunction> pieces = meagerize(f, 0);
  CHECK(pieces.size() == 2);  // quantum 4 * 1/2
  for (const auto& pc : pieces) {
    CHECK(pc.quantum(0, 0) == 1);
    CHECK(pc.periods[1] == 5);
  }
}

TEST_CASE("three-argument combiner synthesizes and reproduces its table") {
  ZilepFunction m3 = pseudomin_zilep(3, {0, 0, 1});
  Network net = synth_recurrent(m3);
  CHECK(is_acyclic(net));
  Box b(Vec{10, 10, 10});
  Vec v = b.origin();
  do {
    RunResult r = run(net, v);
    REQUIRE(r.halted);
    CHECK(r.output[0] == m3.eval1(v));
  } while (b.next(v));
}

TEST_CASE("compile dispatch and rewrite plumbing") {
  CompileResult ramp = compile(quarter_ramp(), SynthMode::automatic);
  CHECK(ramp.report.acyclic);
  CHECK(ramp.report.toppler_count == 3);

  ZilepFunction once = tabulate1(
      1, [](const Vec& x) { return x[0] > 0 ? 1 : 0; }, {1}, {1});
  CompileResult b = compile(once, SynthMode::automatic);
  CHECK(b.report.gate_counts.count("presink") == 1);
  CHECK(b.report.toppler_count == 0);

  CompileResult fb = compile(quarter_ramp(), SynthMode::automatic, {"feedback"});
  CHECK(check_halting(fb.net).halts_guaranteed());
  for (std::int64_t x = 0; x <= 12; ++x)
    CHECK(run(fb.net, {x}).output[0] == quarter_ramp().eval1({x}));

  // thresholds off the powers of two genuinely need feedback
  ZilepFunction fifth = tabulate1(
      1, [](const Vec& x) { return x[0] / 5; }, {5}, {0});
  CompileResult fb5 = compile(fifth, SynthMode::automatic, {"feedback"});
  CHECK_FALSE(fb5.report.acyclic);
  CHECK(check_halting(fb5.net).kind == HaltingVerdict::Kind::feedback_ok);
  for (std::int64_t x = 0; x <= 25; ++x)
    CHECK(run(fb5.net, {x}).output[0] == x / 5);

  CHECK_THROWS_AS(compile(once, SynthMode::recurrent), SynthError);
  CHECK_THROWS_AS(compile(quarter_ramp(), SynthMode::bounded), SynthError);
}
