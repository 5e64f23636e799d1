#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "abforge/network.hpp"
#include "abforge/processor.hpp"
#include "abforge/zilep.hpp"

namespace abforge {

using json = nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// processor = {letters_in, letters_out, states, initial, transitions, outputs}

inline json processor_to_json(const AbelianProcessor& p) {
  json j;
  j["letters_in"] = p.letters_in;
  j["letters_out"] = p.letters_out;
  j["states"] = p.states;
  j["initial"] = p.initial;
  j["transitions"] = p.transitions;
  j["outputs"] = p.outputs;
  return j;
}

inline AbelianProcessor processor_from_json(const json& j) {
  AbelianProcessor p;
  try {
    p.letters_in = j.at("letters_in").get<std::vector<std::string>>();
    p.letters_out = j.at("letters_out").get<std::vector<std::string>>();
    p.states = j.at("states").get<std::vector<std::string>>();
    p.initial = j.at("initial").get<int>();
    p.transitions = j.at("transitions").get<std::vector<std::vector<int>>>();
    p.outputs = j.at("outputs").get<std::vector<std::vector<Vec>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("processor: ") + e.what());
  }
  check_wellformed(p);
  return p;
}

// ---------------------------------------------------------------------------
// zilep = {k, l, coeffs, periods, margins, table}; coeffs are "num/den"
// strings row-major over outputs x arity, table is flat row-major over the
// box with the l output values of a point stored consecutively.

inline json zilep_to_json(const ZilepFunction& f) {
  json j;
  j["k"] = f.arity;
  j["l"] = f.outputs;
  std::vector<std::string> coeffs;
  coeffs.reserve(f.coeffs.size());
  for (const auto& c : f.coeffs) coeffs.push_back(c.to_string());
  j["coeffs"] = coeffs;
  j["periods"] = f.periods;
  j["margins"] = f.margins;
  j["table"] = f.table;
  return j;
}

inline ZilepFunction zilep_from_json(const json& j) {
  try {
    int k = j.at("k").get<int>();
    int l = j.at("l").get<int>();
    std::vector<Rational> coeffs;
    for (const auto& c : j.at("coeffs")) {
      if (c.is_string())
        coeffs.push_back(Rational::parse(c.get<std::string>()));
      else
        coeffs.push_back(Rational(c.get<std::int64_t>()));
    }
    Vec periods = j.at("periods").get<Vec>();
    Vec margins = j.at("margins").get<Vec>();
    std::vector<std::int64_t> table =
        j.at("table").get<std::vector<std::int64_t>>();
    return make_zilep(k, l, std::move(coeffs), std::move(periods),
                      std::move(margins), std::move(table));
  } catch (const json::exception& e) {
    throw ParseError(std::string("zilep: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// network = {nodes: [{id, gate|processor}], edges: [{id, from, to, from_port,
// to_port}], inputs, outputs, trash}. "from" is a node id or "input"; "to" is
// a node id, "output", or "trash".

inline json gate_to_json(const GateSpec& g) {
  json j;
  j["kind"] = gate_kind_name(g.kind);
  if (g.kind == GateKind::toppler) {
    j["lambda"] = g.lambda;
    j["prime"] = g.prime;
  }
  if (g.kind == GateKind::adder || g.kind == GateKind::splitter)
    j["fan"] = g.fan;
  return j;
}

inline GateSpec gate_from_json(const json& j) {
  GateSpec g;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "adder") g.kind = GateKind::adder;
  else if (kind == "splitter") g.kind = GateKind::splitter;
  else if (kind == "toppler") g.kind = GateKind::toppler;
  else if (kind == "delayer") g.kind = GateKind::delayer;
  else if (kind == "presink") g.kind = GateKind::presink;
  else throw ParseError("gate: unknown kind '" + kind + "'");
  if (g.kind == GateKind::toppler) {
    g.lambda = j.at("lambda").get<std::int64_t>();
    g.prime = j.value("prime", 0);
  }
  if (g.kind == GateKind::adder || g.kind == GateKind::splitter)
    g.fan = j.value("fan", 2);
  check_gate(g);
  return g;
}

inline json network_to_json(const Network& net) {
  json j;
  j["nodes"] = json::array();
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    json n;
    n["id"] = v;
    if (net.nodes[v].gate)
      n["gate"] = gate_to_json(*net.nodes[v].gate);
    else
      n["processor"] = processor_to_json(net.nodes[v].proc);
    if (!net.nodes[v].name.empty()) n["name"] = net.nodes[v].name;
    j["nodes"].push_back(n);
  }
  j["edges"] = json::array();
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const NetEdge& ed = net.edges[e];
    json je;
    je["id"] = e;
    if (ed.from_node >= 0) {
      je["from"] = ed.from_node;
      je["from_port"] = ed.from_port;
    } else {
      je["from"] = "input";
    }
    if (ed.to_node >= 0) {
      je["to"] = ed.to_node;
      je["to_port"] = ed.to_port;
    } else {
      bool is_trash = std::find(net.trash.begin(), net.trash.end(),
                                static_cast<int>(e)) != net.trash.end();
      je["to"] = is_trash ? "trash" : "output";
    }
    j["edges"].push_back(je);
  }
  j["inputs"] = net.inputs;
  j["outputs"] = net.outputs;
  j["trash"] = net.trash;
  return j;
}

inline Network network_from_json(const json& j) {
  Network net;
  std::map<std::int64_t, int> node_ix, edge_ix;
  try {
    for (const auto& n : j.at("nodes")) {
      std::int64_t id = n.at("id").get<std::int64_t>();
      if (node_ix.count(id))
        throw ParseError("network: duplicate node id " + std::to_string(id));
      node_ix[id] = static_cast<int>(net.nodes.size());
      NetNode node;
      if (n.contains("gate")) {
        node.gate = gate_from_json(n.at("gate"));
        node.proc = gate_processor(*node.gate);
      } else if (n.contains("processor")) {
        node.proc = processor_from_json(n.at("processor"));
      } else {
        throw ParseError("network: node " + std::to_string(id) +
                         " carries neither gate nor processor");
      }
      if (n.contains("name")) node.name = n.at("name").get<std::string>();
      net.nodes.push_back(std::move(node));
    }
    for (const auto& e : j.at("edges")) {
      std::int64_t id = e.at("id").get<std::int64_t>();
      if (edge_ix.count(id))
        throw ParseError("network: duplicate edge id " + std::to_string(id));
      edge_ix[id] = static_cast<int>(net.edges.size());
      NetEdge ed;
      const auto& from = e.at("from");
      if (from.is_string()) {
        if (from.get<std::string>() != "input")
          throw ParseError("network: edge " + std::to_string(id) +
                           " has bad 'from'");
      } else {
        std::int64_t v = from.get<std::int64_t>();
        if (!node_ix.count(v))
          throw ParseError("network: edge " + std::to_string(id) +
                           " references unknown source node " +
                           std::to_string(v));
        ed.from_node = node_ix[v];
        if (!e.contains("from_port"))
          throw ParseError("network: edge " + std::to_string(id) +
                           " missing from_port");
        ed.from_port = e.at("from_port").get<int>();
      }
      if (!e.contains("to"))
        throw ParseError("network: edge " + std::to_string(id) +
                         " missing target");
      const auto& to = e.at("to");
      if (to.is_string()) {
        std::string s = to.get<std::string>();
        if (s != "output" && s != "trash")
          throw ParseError("network: edge " + std::to_string(id) +
                           " has bad 'to'");
      } else {
        std::int64_t v = to.get<std::int64_t>();
        if (!node_ix.count(v))
          throw ParseError("network: edge " + std::to_string(id) +
                           " references unknown target node " +
                           std::to_string(v));
        ed.to_node = node_ix[v];
        if (!e.contains("to_port"))
          throw ParseError("network: edge " + std::to_string(id) +
                           " missing to_port");
        ed.to_port = e.at("to_port").get<int>();
      }
      net.edges.push_back(ed);
    }
    auto remap = [&](const json& arr, const char* what) {
      std::vector<int> out;
      for (const auto& x : arr) {
        std::int64_t id = x.get<std::int64_t>();
        if (!edge_ix.count(id))
          throw ParseError(std::string("network: ") + what +
                           " references unknown edge " + std::to_string(id));
        out.push_back(edge_ix[id]);
      }
      return out;
    };
    net.inputs = remap(j.at("inputs"), "inputs");
    net.outputs = remap(j.at("outputs"), "outputs");
    net.trash = remap(j.at("trash"), "trash");
  } catch (const json::exception& e) {
    throw ParseError(std::string("network: ") + e.what());
  }
  validate(net);
  return net;
}

// ---------------------------------------------------------------------------

inline std::string export_dot(const Network& net) {
  auto shape = [](const NetNode& n) -> const char* {
    if (!n.gate) return "box";
    switch (n.gate->kind) {
      case GateKind::adder: return "invtriangle";
      case GateKind::splitter: return "triangle";
      case GateKind::toppler: return "square";
      case GateKind::delayer: return "diamond";
      case GateKind::presink: return "hexagon";
    }
    return "box";
  };
  std::string out = "digraph network {\n  rankdir=LR;\n";
  for (std::size_t v = 0; v < net.nodes.size(); ++v)
    out += "  n" + std::to_string(v) + " [label=\"" + net.nodes[v].label() +
           "\" shape=" + shape(net.nodes[v]) + "];\n";
  for (std::size_t i = 0; i < net.inputs.size(); ++i)
    out += "  i" + std::to_string(i) + " [label=\"x" + std::to_string(i) +
           "\" shape=plaintext];\n";
  for (std::size_t j = 0; j < net.outputs.size(); ++j)
    out += "  o" + std::to_string(j) + " [label=\"y" + std::to_string(j) +
           "\" shape=plaintext];\n";
  int trash_count = 0;
  std::map<int, int> trash_ix;
  for (int e : net.trash) trash_ix[e] = trash_count++;
  for (int t = 0; t < trash_count; ++t)
    out += "  t" + std::to_string(t) + " [label=\"#\" shape=point];\n";
  std::map<int, int> out_ix;
  for (std::size_t j = 0; j < net.outputs.size(); ++j)
    out_ix[net.outputs[j]] = static_cast<int>(j);
  std::map<int, int> in_ix;
  for (std::size_t i = 0; i < net.inputs.size(); ++i)
    in_ix[net.inputs[i]] = static_cast<int>(i);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const NetEdge& ed = net.edges[e];
    std::string from = ed.from_node >= 0
                           ? "n" + std::to_string(ed.from_node)
                           : (in_ix.count(static_cast<int>(e))
                                  ? "i" + std::to_string(in_ix[static_cast<int>(e)])
                                  : "z" + std::to_string(e));
    std::string to, attr;
    if (ed.to_node >= 0) {
      to = "n" + std::to_string(ed.to_node);
    } else if (out_ix.count(static_cast<int>(e))) {
      to = "o" + std::to_string(out_ix[static_cast<int>(e)]);
    } else {
      to = "t" + std::to_string(trash_ix[static_cast<int>(e)]);
      attr = " [style=dashed]";
    }
    if (from[0] == 'z')
      out += "  " + from + " [label=\"0\" shape=plaintext];\n";
    out += "  " + from + " -> " + to + attr + ";\n";
  }
  out += "}\n";
  return out;
}

inline std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace abforge
