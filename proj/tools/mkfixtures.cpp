// Regenerates the committed fixture files. Run from the repository root:
//   ./build/mkfixtures fixtures

#include <fstream>
#include <iostream>

#include "abforge/json_io.hpp"
#include "abforge/synth.hpp"

using namespace abforge;

namespace {

void save(const std::string& dir, const std::string& name, const json& j) {
  std::ofstream out(dir + "/" + name);
  out << canonical_dump(j);
  std::cout << "wrote " << dir << "/" << name << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : "fixtures";

  save(dir, "toppler3.json",
       processor_to_json(gate_processor(GateSpec::toppler(3))));
  save(dir, "toppler4_primed2.json",
       processor_to_json(gate_processor(GateSpec::toppler(4, 2))));

  // two letters whose transition maps do not commute
  AbelianProcessor broken;
  broken.letters_in = {"a", "b"};
  broken.letters_out = {"o"};
  broken.states = {"0", "1"};
  broken.initial = 0;
  broken.transitions = {{1, 1}, {0, 0}};
  broken.outputs = {{{0}, {0}}, {{0}, {0}}};
  save(dir, "broken_commute.json", processor_to_json(broken));

  // slope 3/4, period 4: values 0,1,3,3,3,4,6,...
  ZilepFunction ramp =
      make_zilep(1, 1, {Rational(3, 4)}, {4}, {0}, {0, 1, 3, 3, 3});
  save(dir, "quarter_ramp.json", zilep_to_json(ramp));
  save(dir, "quarter_ramp_net.json",
       network_to_json(synth_recurrent(ramp)));

  // periods (4,5), slopes (1/2,4/5), coupled in both coordinates
  ZilepFunction pair = tabulate1(
      2,
      [](const Vec& v) {
        return (5 * v[0] + 4 * v[1]) / 20 + (v[0] + 2) / 4 + (3 * v[1] + 2) / 5;
      },
      {20, 20}, {0, 0});
  save(dir, "coupled_pair.json", zilep_to_json(pair));

  ZilepFunction once = tabulate1(
      1, [](const Vec& x) { return x[0] > 0 ? 1 : 0; }, {1}, {1});
  save(dir, "min_one.json", zilep_to_json(once));

  ZilepFunction thresh = tabulate1(
      1, [](const Vec& x) { return x[0] >= 4 ? 1 : 0; }, {1}, {4});
  save(dir, "threshold4.json", zilep_to_json(thresh));

  // margins on both coordinates over a recurrent core
  ZilepFunction mixed = tabulate1(
      2,
      [](const Vec& x) {
        return (x[0] + x[1] + std::min<std::int64_t>(x[0], 1) +
                std::min<std::int64_t>(x[1], 1)) /
               2;
      },
      {2, 2}, {1, 1});
  save(dir, "mixed_margins.json", zilep_to_json(mixed));

  save(dir, "rotor3_net.json", network_to_json(rotor_node(3)));

  // a splitter feeding itself through an adder: letters multiply without
  // bound, so runs exhaust any step budget
  {
    NetBuilder b(1, 1);
    int ad = b.add_gate(GateSpec::adder(2));
    int sp = b.add_gate(GateSpec::splitter(2));
    b.wire(NetBuilder::input(0), NetBuilder::port(ad, 0));
    b.wire(NetBuilder::Tap{ad, 0}, NetBuilder::port(sp, 0));
    b.wire(NetBuilder::Tap{sp, 0}, NetBuilder::port(ad, 1));
    b.wire(NetBuilder::Tap{sp, 1}, NetBuilder::output(0));
    save(dir, "diverging_loop.json", network_to_json(b.build()));
  }
  return 0;
}
