#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "abforge/gates.hpp"
#include "abforge/processor.hpp"

using namespace abforge;

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// feed one letter sequence, return cumulative output + final state
std::pair<Vec, int> feed_word(const AbelianProcessor& p,
                              const std::vector<int>& word) {
  Vec out(static_cast<std::size_t>(p.num_outputs()), 0);
  int q = p.initial;
  for (int letter : word) q = p.step(letter, q, out);
  return {out, q};
}

AbelianProcessor two_input_commuting() {
  // product of a 2-toppler and a delayer: letter 0 drives the toppler,
  // letter 1 the delayer
  AbelianProcessor p;
  p.letters_in = {"a", "b"};
  p.letters_out = {"t", "d"};
  p.states = {"00", "01", "10", "11"};  // toppler state, delayer state
  p.initial = 0;
  p.transitions = {{2, 3, 0, 1}, {1, 1, 3, 3}};
  p.outputs = {{{0, 0}, {0, 0}, {1, 0}, {1, 0}},
               {{0, 0}, {0, 1}, {0, 0}, {0, 1}}};
  return p;
}

}  // namespace

TEST_CASE("check_abelian accepts unary and product processors") {
  CHECK(check_abelian(gate_processor(GateSpec::toppler(3))).ok);
  CHECK(check_abelian(gate_processor(GateSpec::adder(3))).ok);
  CHECK(check_abelian(two_input_commuting()).ok);
}

TEST_CASE("check_abelian pinpoints the first violating triple") {
  AbelianProcessor p = two_input_commuting();
  p.transitions[0][1] = 1;  // break t_a on state 01
  AbelianVerdict v = check_abelian(p);
  CHECK_FALSE(v.ok);
  CHECK(v.letter_i == 0);
  CHECK(v.letter_j == 1);
  CHECK(v.state == 0);  // t_b first reaches state 01 from 00
}

TEST_CASE("eval_processor matches the gate closed forms") {
  AbelianProcessor primed = gate_processor(GateSpec::toppler(4, 3));
  CHECK(eval_processor(primed, {1}).output[0] == 1);
  for (std::int64_t x = 0; x <= 100; ++x)
    CHECK(eval_processor(primed, {x}).output[0] == (x + 3) / 4);
  AbelianProcessor delay = gate_processor(GateSpec::delayer());
  CHECK(eval_processor(delay, {5}).output[0] == 4);
  CHECK(eval_processor(delay, {0}).output[0] == 0);
  CHECK(eval_processor(delay, {0}).state == delay.initial);
}

TEST_CASE("order independence over random permutations") {
  AbelianProcessor p = two_input_commuting();
  std::uint64_t s = 42;
  for (int trial = 0; trial < 20; ++trial) {
    std::int64_t xa = static_cast<std::int64_t>(splitmix(s) % 6);
    std::int64_t xb = static_cast<std::int64_t>(splitmix(s) % 6);
    std::vector<int> word;
    for (std::int64_t i = 0; i < xa; ++i) word.push_back(0);
    for (std::int64_t i = 0; i < xb; ++i) word.push_back(1);
    auto reference = feed_word(p, word);
    CHECK(eval_processor(p, {xa, xb}).output == reference.first);
    for (int perm = 0; perm < 50; ++perm) {
      for (std::size_t i = word.size(); i > 1; --i)
        std::swap(word[i - 1], word[splitmix(s) % i]);
      auto shuffled = feed_word(p, word);
      CHECK(shuffled.first == reference.first);
      CHECK(shuffled.second == reference.second);
    }
  }
}

TEST_CASE("parallelogram law on states reached two ways") {
  AbelianProcessor p = two_input_commuting();
  // collect states for small inputs, compare increments where states agree
  std::vector<std::pair<Vec, int>> seen;
  for (std::int64_t a = 0; a <= 4; ++a)
    for (std::int64_t b = 0; b <= 4; ++b)
      seen.push_back({{a, b}, eval_processor(p, {a, b}).state});
  for (const auto& [y, qy] : seen)
    for (const auto& [y2, qy2] : seen) {
      if (qy != qy2) continue;
      for (std::int64_t a = 0; a <= 3; ++a)
        for (std::int64_t b = 0; b <= 3; ++b) {
          Vec xy{y[0] + a, y[1] + b}, xy2{y2[0] + a, y2[1] + b};
          Vec left = eval_processor(p, xy).output;
          Vec right = eval_processor(p, xy2).output;
          Vec fy = eval_processor(p, y).output;
          Vec fy2 = eval_processor(p, y2).output;
          for (std::size_t j = 0; j < left.size(); ++j)
            CHECK(left[j] - fy[j] == right[j] - fy2[j]);
        }
    }
}

TEST_CASE("recurrence classification") {
  auto info = classify_recurrence(gate_processor(GateSpec::toppler(5, 2)));
  CHECK(info.recurrent);
  CHECK(info.recurrent_class.size() == 5);

  auto delayer = classify_recurrence(gate_processor(GateSpec::delayer()));
  CHECK_FALSE(delayer.recurrent);
  CHECK(delayer.recurrent_class == std::vector<int>{1});

  auto presink = classify_recurrence(gate_processor(GateSpec::presink()));
  CHECK_FALSE(presink.recurrent);
  CHECK(presink.recurrent_class == std::vector<int>{1});
}

TEST_CASE("exponents of gates") {
  CHECK(exponent(gate_processor(GateSpec::toppler(7, 3))) == 7);
  CHECK(exponent(gate_processor(GateSpec::splitter(2))) == 1);
  CHECK(exponent(gate_processor(GateSpec::adder(2))) == 1);
  CHECK(exponent(gate_processor(GateSpec::delayer())) == 1);
}

TEST_CASE("processor -> function extraction on gates") {
  ZilepFunction f = processor_to_zilep(gate_processor(GateSpec::toppler(4, 2)));
  CHECK(f.arity == 1);
  CHECK(f.periods[0] == 4);
  CHECK(f.margins[0] == 0);
  CHECK(f.coeff(0, 0) == Rational(1, 4));
  CHECK(f.table == std::vector<std::int64_t>{0, 0, 1, 1, 1});

  ZilepFunction d = processor_to_zilep(gate_processor(GateSpec::delayer()));
  CHECK(d.periods[0] == 1);
  CHECK(d.margins[0] == 1);
  CHECK(d.coeff(0, 0) == Rational(1));
  CHECK(d.table == std::vector<std::int64_t>{0, 0, 1});

  ZilepFunction s = processor_to_zilep(gate_processor(GateSpec::splitter(3)));
  CHECK(s.outputs == 3);
  CHECK(s.eval({7}) == Vec{7, 7, 7});
}

TEST_CASE("function -> processor: canonical states and recurrence") {
  ZilepFunction half = tabulate1(
      1, [](const Vec& x) { return x[0] / 2; }, {2}, {0});
  AbelianProcessor p = zilep_to_processor(half);
  CHECK(p.num_states() == 2);
  CHECK(check_abelian(p).ok);
  CHECK(classify_recurrence(p).recurrent);
  for (std::int64_t x = 0; x <= 30; ++x)
    CHECK(eval_processor(p, {x}).output[0] == x / 2);

  ZilepFunction add2 = tabulate(
      2, 1, [](const Vec& x) { return Vec{x[0] + x[1]}; }, {1, 1}, {0, 0});
  AbelianProcessor adder = zilep_to_processor(add2);
  CHECK(adder.num_states() == 1);

  // margins produce transient processors
  ZilepFunction delay = tabulate1(
      1, [](const Vec& x) { return x[0] > 0 ? x[0] - 1 : 0; }, {1}, {1});
  AbelianProcessor dp = zilep_to_processor(delay);
  CHECK(check_abelian(dp).ok);
  CHECK_FALSE(classify_recurrence(dp).recurrent);
}

TEST_CASE("round trips both ways on a grid") {
  std::vector<GateSpec> gates = {GateSpec::toppler(2), GateSpec::toppler(5, 4),
                                 GateSpec::delayer(), GateSpec::presink(),
                                 GateSpec::splitter(2), GateSpec::adder(2)};
  for (const auto& g : gates) {
    AbelianProcessor p = gate_processor(g);
    ZilepFunction f = processor_to_zilep(p);
    AbelianProcessor p2 = zilep_to_processor(f);
    CHECK(check_abelian(p2).ok);
    Vec hi(static_cast<std::size_t>(f.arity));
    for (int i = 0; i < f.arity; ++i)
      hi[static_cast<std::size_t>(i)] =
          f.margins[static_cast<std::size_t>(i)] +
          2 * f.periods[static_cast<std::size_t>(i)];
    Box grid(Vec(hi.size()));
    for (std::size_t i = 0; i < hi.size(); ++i) grid.dims[i] = hi[i] + 1;
    Vec x = grid.origin();
    do {
      CHECK(eval_processor(p, x).output == f.eval(x));
      CHECK(eval_processor(p2, x).output == f.eval(x));
    } while (grid.next(x));
  }
}

TEST_CASE("extraction from the canonical processor is abelian") {
  ZilepFunction f = tabulate1(
      2, [](const Vec& x) { return (2 * x[0] + 3 * x[1] + (x[0] > 1 ? 2 : 0)) / 4; },
      {4, 4}, {2, 0});
  AbelianProcessor p = zilep_to_processor(f);
  CHECK(check_abelian(p).ok);
  ZilepFunction back = processor_to_zilep(p);
  CHECK(zilep_equal(f, back));
}
