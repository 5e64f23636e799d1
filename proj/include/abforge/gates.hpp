#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "abforge/processor.hpp"

namespace abforge {

enum class GateKind { adder, splitter, toppler, delayer, presink };

inline const char* gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::adder: return "adder";
    case GateKind::splitter: return "splitter";
    case GateKind::toppler: return "toppler";
    case GateKind::delayer: return "delayer";
    case GateKind::presink: return "presink";
  }
  return "?";
}

// One of the five primitive processors. Topplers carry a threshold and a
// priming state; adders and splitters may be multi-way via fan.
struct GateSpec {
  GateKind kind = GateKind::adder;
  std::int64_t lambda = 0;  // toppler threshold, >= 2
  std::int64_t prime = 0;   // toppler initial state, 0 <= prime < lambda
  int fan = 2;              // adder inputs / splitter outputs, >= 2

  static GateSpec adder(int fan = 2) { return {GateKind::adder, 0, 0, fan}; }
  static GateSpec splitter(int fan = 2) {
    return {GateKind::splitter, 0, 0, fan};
  }
  static GateSpec toppler(std::int64_t lambda, std::int64_t prime = 0) {
    return {GateKind::toppler, lambda, prime, 2};
  }
  static GateSpec delayer() { return {GateKind::delayer, 0, 0, 2}; }
  static GateSpec presink() { return {GateKind::presink, 0, 0, 2}; }

  int in_arity() const { return kind == GateKind::adder ? fan : 1; }
  int out_arity() const { return kind == GateKind::splitter ? fan : 1; }

  std::string label() const {
    switch (kind) {
      case GateKind::adder: return fan == 2 ? "A" : "A" + std::to_string(fan);
      case GateKind::splitter:
        return fan == 2 ? "S" : "S" + std::to_string(fan);
      case GateKind::toppler:
        return "T" + std::to_string(lambda) + ":" + std::to_string(prime);
      case GateKind::delayer: return "D";
      case GateKind::presink: return "P";
    }
    return "?";
  }
};

inline void check_gate(const GateSpec& g) {
  if (g.kind == GateKind::toppler) {
    if (g.lambda < 2) throw std::invalid_argument("toppler threshold must be >= 2");
    if (g.prime < 0 || g.prime >= g.lambda)
      throw std::invalid_argument("toppler prime must satisfy 0 <= q < lambda");
  } else if (g.kind == GateKind::adder || g.kind == GateKind::splitter) {
    if (g.fan < 2) throw std::invalid_argument("gate fan must be >= 2");
  }
}

inline AbelianProcessor gate_processor(const GateSpec& g) {
  check_gate(g);
  AbelianProcessor p;
  auto in_name = [](int i) { return "in" + std::to_string(i); };
  auto out_name = [](int j) { return "out" + std::to_string(j); };
  switch (g.kind) {
    case GateKind::adder: {
      for (int i = 0; i < g.fan; ++i) p.letters_in.push_back(in_name(i));
      p.letters_out = {"out0"};
      p.states = {"*"};
      p.transitions.assign(static_cast<std::size_t>(g.fan), {0});
      p.outputs.assign(static_cast<std::size_t>(g.fan), {Vec{1}});
      break;
    }
    case GateKind::splitter: {
      p.letters_in = {"in0"};
      for (int j = 0; j < g.fan; ++j) p.letters_out.push_back(out_name(j));
      p.states = {"*"};
      p.transitions = {{0}};
      p.outputs = {{Vec(static_cast<std::size_t>(g.fan), 1)}};
      break;
    }
    case GateKind::toppler: {
      p.letters_in = {"in0"};
      p.letters_out = {"out0"};
      for (std::int64_t q = 0; q < g.lambda; ++q)
        p.states.push_back(std::to_string(q));
      p.initial = static_cast<int>(g.prime);
      std::vector<int> t;
      std::vector<Vec> o;
      for (std::int64_t q = 0; q < g.lambda; ++q) {
        t.push_back(static_cast<int>((q + 1) % g.lambda));
        o.push_back(Vec{q == g.lambda - 1 ? 1 : 0});
      }
      p.transitions = {t};
      p.outputs = {o};
      break;
    }
    case GateKind::delayer: {
      p.letters_in = {"in0"};
      p.letters_out = {"out0"};
      p.states = {"0", "1"};
      p.transitions = {{1, 1}};
      p.outputs = {{Vec{0}, Vec{1}}};
      break;
    }
    case GateKind::presink: {
      p.letters_in = {"in0"};
      p.letters_out = {"out0"};
      p.states = {"0", "1"};
      p.transitions = {{1, 1}};
      p.outputs = {{Vec{1}, Vec{0}}};
      break;
    }
  }
  return p;
}

}  // namespace abforge
