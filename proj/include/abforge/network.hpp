#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abforge/gates.hpp"
#include "abforge/processor.hpp"
#include "abforge/rational.hpp"

namespace abforge {

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetNode {
  std::optional<GateSpec> gate;  // set for gate nodes
  AbelianProcessor proc;
  std::string name;

  int in_arity() const { return proc.num_letters(); }
  int out_arity() const { return proc.num_outputs(); }
  std::string label() const {
    if (gate) return gate->label();
    return name.empty() ? "proc" : name;
  }
};

// Endpoint node index -1 means dangling: no tail for input edges, no head for
// output and trash edges. An edge dangling on both ends and listed as an
// output is a constant-zero output wire.
struct NetEdge {
  int from_node = -1;
  int from_port = 0;
  int to_node = -1;
  int to_port = 0;
};

struct Network {
  std::vector<NetNode> nodes;
  std::vector<NetEdge> edges;
  std::vector<int> inputs;   // edge ids, input coordinate order
  std::vector<int> outputs;  // edge ids, output coordinate order
  std::vector<int> trash;    // edge ids

  int num_inputs() const { return static_cast<int>(inputs.size()); }
  int num_outputs() const { return static_cast<int>(outputs.size()); }
};

inline void validate(const Network& net) {
  const int nn = static_cast<int>(net.nodes.size());
  const int ne = static_cast<int>(net.edges.size());
  std::vector<std::vector<int>> in_cover(net.nodes.size()),
      out_cover(net.nodes.size());
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    check_wellformed(net.nodes[v].proc);
    in_cover[v].assign(static_cast<std::size_t>(net.nodes[v].in_arity()), -1);
    out_cover[v].assign(static_cast<std::size_t>(net.nodes[v].out_arity()), -1);
  }
  auto edge_name = [](int e) { return "edge " + std::to_string(e); };
  for (int e = 0; e < ne; ++e) {
    const NetEdge& ed = net.edges[static_cast<std::size_t>(e)];
    if (ed.from_node >= nn || ed.to_node >= nn)
      throw NetworkError(edge_name(e) + ": endpoint node out of range");
    if (ed.from_node >= 0) {
      auto& cov = out_cover[static_cast<std::size_t>(ed.from_node)];
      if (ed.from_port < 0 || ed.from_port >= static_cast<int>(cov.size()))
        throw NetworkError(edge_name(e) + ": source port out of range");
      if (cov[static_cast<std::size_t>(ed.from_port)] != -1)
        throw NetworkError(edge_name(e) + ": source port already wired");
      cov[static_cast<std::size_t>(ed.from_port)] = e;
    }
    if (ed.to_node >= 0) {
      auto& cov = in_cover[static_cast<std::size_t>(ed.to_node)];
      if (ed.to_port < 0 || ed.to_port >= static_cast<int>(cov.size()))
        throw NetworkError(edge_name(e) + ": target port out of range");
      if (cov[static_cast<std::size_t>(ed.to_port)] != -1)
        throw NetworkError(edge_name(e) + ": target port already wired");
      cov[static_cast<std::size_t>(ed.to_port)] = e;
    }
  }
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    for (std::size_t p = 0; p < in_cover[v].size(); ++p)
      if (in_cover[v][p] == -1)
        throw NetworkError("node " + std::to_string(v) + ": input port " +
                           std::to_string(p) + " unwired");
    for (std::size_t p = 0; p < out_cover[v].size(); ++p)
      if (out_cover[v][p] == -1)
        throw NetworkError("node " + std::to_string(v) + ": output port " +
                           std::to_string(p) + " unwired");
  }
  std::vector<int> role(static_cast<std::size_t>(ne), 0);  // 1=I, 2=O, 3=T
  auto mark = [&](const std::vector<int>& ids, int r, const char* what) {
    for (int e : ids) {
      if (e < 0 || e >= ne)
        throw NetworkError(std::string(what) + " list: edge id out of range");
      if (role[static_cast<std::size_t>(e)] != 0)
        throw NetworkError(edge_name(e) +
                           ": input/output/trash sets must be disjoint");
      role[static_cast<std::size_t>(e)] = r;
    }
  };
  mark(net.inputs, 1, "inputs");
  mark(net.outputs, 2, "outputs");
  mark(net.trash, 3, "trash");
  for (int e = 0; e < ne; ++e) {
    const NetEdge& ed = net.edges[static_cast<std::size_t>(e)];
    int r = role[static_cast<std::size_t>(e)];
    if (ed.from_node < 0 && ed.to_node >= 0 && r != 1)
      throw NetworkError(edge_name(e) + ": tailless edge must be an input");
    if (ed.from_node >= 0 && ed.to_node < 0 && r != 2 && r != 3)
      throw NetworkError(edge_name(e) +
                         ": headless edge must be an output or trash");
    if (ed.from_node < 0 && ed.to_node < 0 && r != 2)
      throw NetworkError(edge_name(e) +
                         ": fully dangling edge only allowed as a zero output");
    if (ed.from_node >= 0 && ed.to_node >= 0 && r != 0)
      throw NetworkError(edge_name(e) + ": internal edge cannot be designated");
    if (r == 1 && ed.from_node >= 0)
      throw NetworkError(edge_name(e) + ": input edge cannot have a tail");
    if ((r == 2 || r == 3) && ed.to_node >= 0)
      throw NetworkError(edge_name(e) + ": output/trash edge cannot have a head");
  }
}

inline std::optional<std::vector<int>> topo_order(const Network& net) {
  const int nn = static_cast<int>(net.nodes.size());
  std::vector<int> indeg(static_cast<std::size_t>(nn), 0);
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(nn));
  for (const auto& e : net.edges)
    if (e.from_node >= 0 && e.to_node >= 0) {
      ++indeg[static_cast<std::size_t>(e.to_node)];
      succ[static_cast<std::size_t>(e.from_node)].push_back(e.to_node);
    }
  std::vector<int> order;
  std::vector<int> queue;
  for (int v = 0; v < nn; ++v)
    if (indeg[static_cast<std::size_t>(v)] == 0) queue.push_back(v);
  for (std::size_t h = 0; h < queue.size(); ++h) {
    int v = queue[h];
    order.push_back(v);
    for (int w : succ[static_cast<std::size_t>(v)])
      if (--indeg[static_cast<std::size_t>(w)] == 0) queue.push_back(w);
  }
  if (static_cast<int>(order.size()) != nn) return std::nullopt;
  return order;
}

inline bool is_acyclic(const Network& net) { return topo_order(net).has_value(); }

enum class SchedulePolicy { lowest_edge, round_robin, seeded_random };

struct Schedule {
  SchedulePolicy policy = SchedulePolicy::lowest_edge;
  std::uint64_t seed = 0;
};

namespace detail {

struct SplitMix64 {
  std::uint64_t s;
  explicit SplitMix64(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

}  // namespace detail

struct ExecState {
  std::vector<int> node_state;
  Vec edge_count;
  std::int64_t steps = 0;
};

struct TraceEntry {
  int edge = 0;
  int node = 0;
  int state_before = 0;
};

struct RunResult {
  bool halted = false;
  Vec output;
  Vec trash;
  std::vector<int> final_states;
  std::int64_t steps = 0;
  ExecState state;  // fixed point, or the live state on budget exhaustion
  std::vector<TraceEntry> trace;
};

inline std::int64_t default_step_budget(const Network& net, const Vec& input) {
  std::int64_t letters = 0;
  for (auto v : input) letters += v;
  return 1000 * (1 + letters) *
         std::max<std::int64_t>(1, static_cast<std::int64_t>(net.nodes.size()));
}

namespace detail {

// Worst-case total-step bound for acyclic runs: per-edge letter bounds pushed
// through topological order with per-port amplification, saturating on
// overflow.
inline std::int64_t acyclic_step_bound(const Network& net, const Vec& input,
                                       const std::vector<int>& order) {
  constexpr std::int64_t kInf = INT64_MAX / 2;
  auto sat_mul = [](std::int64_t a, std::int64_t b) -> std::int64_t {
    __int128 p = static_cast<__int128>(a) * b;
    return p > INT64_MAX / 2 ? INT64_MAX / 2 : static_cast<std::int64_t>(p);
  };
  auto sat_add = [](std::int64_t a, std::int64_t b) {
    return a > INT64_MAX / 2 - b ? INT64_MAX / 2 : a + b;
  };
  std::vector<std::int64_t> bound(net.edges.size(), 0);
  for (std::size_t i = 0; i < net.inputs.size(); ++i)
    bound[static_cast<std::size_t>(net.inputs[i])] = input[i];
  std::vector<std::vector<int>> in_edges(net.nodes.size()),
      out_edges(net.nodes.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    if (net.edges[e].from_node >= 0)
      out_edges[static_cast<std::size_t>(net.edges[e].from_node)].push_back(
          static_cast<int>(e));
    if (net.edges[e].to_node >= 0)
      in_edges[static_cast<std::size_t>(net.edges[e].to_node)].push_back(
          static_cast<int>(e));
  }
  std::int64_t total = 0;
  for (int v : order) {
    const auto& p = net.nodes[static_cast<std::size_t>(v)].proc;
    std::int64_t arriving = 0;
    for (int e : in_edges[static_cast<std::size_t>(v)])
      arriving = sat_add(arriving, bound[static_cast<std::size_t>(e)]);
    total = sat_add(total, arriving);
    for (int e : out_edges[static_cast<std::size_t>(v)]) {
      int port = net.edges[static_cast<std::size_t>(e)].from_port;
      std::int64_t amp = 0;
      for (int i = 0; i < p.num_letters(); ++i)
        for (int q = 0; q < p.num_states(); ++q)
          amp = std::max(amp, p.outputs[static_cast<std::size_t>(i)]
                                        [static_cast<std::size_t>(q)]
                                        [static_cast<std::size_t>(port)]);
      bound[static_cast<std::size_t>(e)] = sat_mul(amp, arriving);
    }
  }
  (void)kInf;
  return total;
}

}  // namespace detail

inline ExecState initial_state(const Network& net, const Vec& input) {
  if (static_cast<int>(input.size()) != net.num_inputs())
    throw NetworkError("run: input arity mismatch");
  ExecState st;
  st.node_state.reserve(net.nodes.size());
  for (const auto& n : net.nodes) st.node_state.push_back(n.proc.initial);
  st.edge_count.assign(net.edges.size(), 0);
  for (std::size_t i = 0; i < net.inputs.size(); ++i) {
    if (input[i] < 0) throw NetworkError("run: negative input count");
    st.edge_count[static_cast<std::size_t>(net.inputs[i])] = input[i];
  }
  return st;
}

inline RunResult run_from(const Network& net, ExecState st, Schedule sched,
                          std::int64_t budget, bool trace = false) {
  if (budget <= 0) throw NetworkError("run: step budget must be positive");
  // a-priori halting bound for acyclic networks; exceeding it means the
  // engine itself is broken
  std::int64_t hard_bound = -1;
  if (auto order = topo_order(net)) {
    Vec in(net.inputs.size());
    for (std::size_t i = 0; i < net.inputs.size(); ++i)
      in[i] = st.edge_count[static_cast<std::size_t>(net.inputs[i])];
    hard_bound = detail::acyclic_step_bound(net, in, *order);
  }
  std::vector<std::vector<int>> out_edges(net.nodes.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e)
    if (net.edges[e].from_node >= 0)
      out_edges[static_cast<std::size_t>(net.edges[e].from_node)].push_back(
          static_cast<int>(e));
  RunResult res;
  bool over_budget = false;
  std::vector<int> fresh;  // edges that went from empty to loaded this step
  // one letter off edge e; returns false on budget exhaustion
  auto process = [&](int e) {
    if (st.steps >= budget) {
      over_budget = true;
      return false;
    }
    const NetEdge& ed = net.edges[static_cast<std::size_t>(e)];
    int v = ed.to_node;
    const auto& proc = net.nodes[static_cast<std::size_t>(v)].proc;
    int q = st.node_state[static_cast<std::size_t>(v)];
    if (trace) res.trace.push_back({e, v, q});
    --st.edge_count[static_cast<std::size_t>(e)];
    const Vec& out = proc.outputs[static_cast<std::size_t>(ed.to_port)]
                                 [static_cast<std::size_t>(q)];
    st.node_state[static_cast<std::size_t>(v)] =
        proc.transitions[static_cast<std::size_t>(ed.to_port)]
                        [static_cast<std::size_t>(q)];
    for (int g : out_edges[static_cast<std::size_t>(v)]) {
      const NetEdge& oe = net.edges[static_cast<std::size_t>(g)];
      std::int64_t amount = out[static_cast<std::size_t>(oe.from_port)];
      if (amount == 0) continue;
      if (st.edge_count[static_cast<std::size_t>(g)] == 0 && oe.to_node >= 0)
        fresh.push_back(g);
      st.edge_count[static_cast<std::size_t>(g)] += amount;
    }
    ++st.steps;
    if (hard_bound >= 0 && st.steps > hard_bound)
      throw std::logic_error("run: acyclic step bound exceeded");
    return true;
  };
  auto consumable = [&](int e) {
    return st.edge_count[static_cast<std::size_t>(e)] > 0 &&
           net.edges[static_cast<std::size_t>(e)].to_node >= 0;
  };
  switch (sched.policy) {
    case SchedulePolicy::lowest_edge: {
      // lazy min-heap; a drained entry is simply skipped on pop
      std::vector<int> heap;
      auto push = [&](int e) {
        heap.push_back(e);
        std::push_heap(heap.begin(), heap.end(), std::greater<int>());
      };
      for (std::size_t e = 0; e < net.edges.size(); ++e)
        if (consumable(static_cast<int>(e))) push(static_cast<int>(e));
      while (!heap.empty()) {
        int e = heap.front();
        std::pop_heap(heap.begin(), heap.end(), std::greater<int>());
        heap.pop_back();
        if (!consumable(e)) continue;
        // drain e while it stays the lowest eligible edge
        bool keep = true;
        while (keep && consumable(e)) {
          fresh.clear();
          if (!process(e)) break;
          for (int g : fresh) {
            push(g);
            if (g < e) keep = false;
          }
          if (!heap.empty() && heap.front() < e) keep = false;
        }
        if (over_budget) break;
        if (consumable(e)) push(e);
      }
      break;
    }
    case SchedulePolicy::round_robin: {
      std::set<int> eligible;
      for (std::size_t e = 0; e < net.edges.size(); ++e)
        if (consumable(static_cast<int>(e))) eligible.insert(static_cast<int>(e));
      int cursor = 0;
      while (!eligible.empty()) {
        auto it = eligible.lower_bound(cursor);
        if (it == eligible.end()) it = eligible.begin();
        int e = *it;
        cursor = e + 1;
        fresh.clear();
        if (!process(e)) break;
        if (!consumable(e)) eligible.erase(e);
        for (int g : fresh) eligible.insert(g);
      }
      break;
    }
    case SchedulePolicy::seeded_random: {
      detail::SplitMix64 rng(sched.seed);
      std::vector<int> pool;  // unsorted; swap-remove keeps picks O(1)
      std::vector<int> pos(net.edges.size(), -1);
      auto add = [&](int e) {
        pos[static_cast<std::size_t>(e)] = static_cast<int>(pool.size());
        pool.push_back(e);
      };
      auto remove = [&](int e) {
        int p = pos[static_cast<std::size_t>(e)];
        int last = pool.back();
        pool[static_cast<std::size_t>(p)] = last;
        pos[static_cast<std::size_t>(last)] = p;
        pool.pop_back();
        pos[static_cast<std::size_t>(e)] = -1;
      };
      for (std::size_t e = 0; e < net.edges.size(); ++e)
        if (consumable(static_cast<int>(e))) add(static_cast<int>(e));
      while (!pool.empty()) {
        int e = pool[static_cast<std::size_t>(rng.next() % pool.size())];
        fresh.clear();
        if (!process(e)) break;
        if (!consumable(e)) remove(e);
        for (int g : fresh) add(g);
      }
      break;
    }
  }
  if (over_budget) {
    res.halted = false;
    res.steps = st.steps;
    res.state = std::move(st);
    return res;
  }
  res.halted = true;
  res.steps = st.steps;
  res.output.reserve(net.outputs.size());
  for (int e : net.outputs)
    res.output.push_back(st.edge_count[static_cast<std::size_t>(e)]);
  res.trash.reserve(net.trash.size());
  for (int e : net.trash)
    res.trash.push_back(st.edge_count[static_cast<std::size_t>(e)]);
  res.final_states = st.node_state;
  res.state = std::move(st);
  return res;
}

inline RunResult run(const Network& net, const Vec& input,
                     Schedule sched = {}, std::int64_t budget = -1,
                     bool trace = false) {
  validate(net);
  if (budget < 0) budget = default_step_budget(net, input);
  return run_from(net, initial_state(net, input), sched, budget, trace);
}

// Per-node out-edge adjacency is scanned linearly in run_from; cache-friendly
// enough at the scales this engine targets.

struct HaltingVerdict {
  enum class Kind { acyclic, feedback_ok, unknown } kind =
      Kind::unknown;
  int iterations = 0;
  Rational norm;  // max row sum of the iterated production matrix at exit

  bool halts_guaranteed() const { return kind != Kind::unknown; }
};

// Acyclic networks halt outright. Otherwise we build the production-rate
// matrix (long-run letters emitted per letter consumed, the cycle average of
// each letter's transition orbit, maximized over cycles) and certify halting
// when some power of it has all row sums below one.
inline HaltingVerdict check_halting(const Network& net, int max_steps = 200) {
  validate(net);
  HaltingVerdict verdict;
  if (is_acyclic(net)) {
    verdict.kind = HaltingVerdict::Kind::acyclic;
    verdict.norm = Rational(0);
    return verdict;
  }
  const int ne = static_cast<int>(net.edges.size());
  // rate[e][f]: letters produced on edge e per letter consumed from edge f
  std::vector<std::vector<Rational>> rate(
      static_cast<std::size_t>(ne),
      std::vector<Rational>(static_cast<std::size_t>(ne), Rational(0)));
  for (int f = 0; f < ne; ++f) {
    const NetEdge& fe = net.edges[static_cast<std::size_t>(f)];
    if (fe.to_node < 0) continue;
    const auto& p = net.nodes[static_cast<std::size_t>(fe.to_node)].proc;
    int letter = fe.to_port;
    const int n = p.num_states();
    // cycle average of emissions per output port, maximized over start states
    std::vector<Rational> best(static_cast<std::size_t>(p.num_outputs()),
                               Rational(0));
    for (int q0 = 0; q0 < n; ++q0) {
      std::vector<int> when(static_cast<std::size_t>(n), -1);
      std::vector<int> orbit;
      int q = q0;
      while (when[static_cast<std::size_t>(q)] == -1) {
        when[static_cast<std::size_t>(q)] = static_cast<int>(orbit.size());
        orbit.push_back(q);
        q = p.transitions[static_cast<std::size_t>(letter)]
                         [static_cast<std::size_t>(q)];
      }
      int start = when[static_cast<std::size_t>(q)];
      std::int64_t len = static_cast<std::int64_t>(orbit.size()) - start;
      for (int j = 0; j < p.num_outputs(); ++j) {
        std::int64_t total = 0;
        for (std::size_t s = static_cast<std::size_t>(start); s < orbit.size();
             ++s)
          total += p.outputs[static_cast<std::size_t>(letter)]
                            [static_cast<std::size_t>(orbit[s])]
                            [static_cast<std::size_t>(j)];
        Rational avg(total, len);
        if (avg > best[static_cast<std::size_t>(j)])
          best[static_cast<std::size_t>(j)] = avg;
      }
    }
    for (int e = 0; e < ne; ++e) {
      const NetEdge& ee = net.edges[static_cast<std::size_t>(e)];
      if (ee.from_node != fe.to_node) continue;
      rate[static_cast<std::size_t>(e)][static_cast<std::size_t>(f)] =
          best[static_cast<std::size_t>(ee.from_port)];
    }
  }
  // integer power iteration on a common denominator
  BigInt denom_step(1);
  for (const auto& row : rate)
    for (const auto& r : row) {
      BigInt d = r.den();
      BigInt g = BigInt::gcd(denom_step, d);
      denom_step = denom_step * (d / g);
    }
  std::vector<std::vector<BigInt>> numer(
      static_cast<std::size_t>(ne),
      std::vector<BigInt>(static_cast<std::size_t>(ne), BigInt(0)));
  for (int e = 0; e < ne; ++e)
    for (int f = 0; f < ne; ++f) {
      const Rational& r = rate[static_cast<std::size_t>(e)]
                              [static_cast<std::size_t>(f)];
      numer[static_cast<std::size_t>(e)][static_cast<std::size_t>(f)] =
          r.num() * (denom_step / r.den());
    }
  std::vector<BigInt> v(static_cast<std::size_t>(ne), BigInt(1));
  BigInt denom(1);
  for (int s = 1; s <= max_steps; ++s) {
    std::vector<BigInt> w(static_cast<std::size_t>(ne), BigInt(0));
    for (int e = 0; e < ne; ++e) {
      BigInt acc(0);
      for (int f = 0; f < ne; ++f) {
        const BigInt& c =
            numer[static_cast<std::size_t>(e)][static_cast<std::size_t>(f)];
        if (!c.is_zero()) acc += c * v[static_cast<std::size_t>(f)];
      }
      w[static_cast<std::size_t>(e)] = std::move(acc);
    }
    v = std::move(w);
    denom = denom * denom_step;
    BigInt vmax(0);
    for (const auto& x : v)
      if (x > vmax) vmax = x;
    verdict.iterations = s;
    verdict.norm = Rational(vmax, denom);
    if (vmax < denom) {
      verdict.kind = HaltingVerdict::Kind::feedback_ok;
      return verdict;
    }
    // clearly diverging: norm at least doubled relative to start
    if (vmax > denom + denom && s >= 8) break;
  }
  verdict.kind = HaltingVerdict::Kind::unknown;
  return verdict;
}

// Collapses a halting network into the processor it emulates: breadth-first
// over reachable joint states, one halted run per (state, input letter).
inline AbelianProcessor network_to_processor(const Network& net,
                                             std::int64_t state_cap = 100000) {
  validate(net);
  HaltingVerdict hv = check_halting(net);
  if (!hv.halts_guaranteed())
    throw NetworkError(
        "network_to_processor: halting could not be certified");
  const int k = net.num_inputs();
  const int l = net.num_outputs();
  AbelianProcessor p;
  for (int i = 0; i < k; ++i) p.letters_in.push_back("a" + std::to_string(i));
  for (int j = 0; j < l; ++j) p.letters_out.push_back("b" + std::to_string(j));
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> pool;
  std::vector<int> start;
  for (const auto& n : net.nodes) start.push_back(n.proc.initial);
  ids.emplace(start, 0);
  pool.push_back(start);
  p.transitions.assign(static_cast<std::size_t>(k), {});
  p.outputs.assign(static_cast<std::size_t>(k), {});
  for (std::size_t h = 0; h < pool.size(); ++h) {
    for (int i = 0; i < k; ++i) {
      ExecState st;
      st.node_state = pool[h];
      st.edge_count.assign(net.edges.size(), 0);
      st.edge_count[static_cast<std::size_t>(net.inputs[static_cast<std::size_t>(i)])] = 1;
      Vec one(static_cast<std::size_t>(k), 0);
      one[static_cast<std::size_t>(i)] = 1;
      RunResult r = run_from(net, std::move(st), Schedule{},
                             default_step_budget(net, one));
      if (!r.halted)
        throw NetworkError("network_to_processor: step budget exhausted");
      auto [it, fresh] = ids.emplace(r.final_states,
                                     static_cast<int>(pool.size()));
      if (fresh) {
        pool.push_back(r.final_states);
        if (static_cast<std::int64_t>(pool.size()) > state_cap)
          throw NetworkError("network_to_processor: state cap exceeded");
      }
      p.transitions[static_cast<std::size_t>(i)].push_back(it->second);
      Vec out;
      for (int e : net.outputs)
        out.push_back(r.state.edge_count[static_cast<std::size_t>(e)]);
      p.outputs[static_cast<std::size_t>(i)].push_back(std::move(out));
    }
  }
  for (const auto& s : pool) {
    std::string name;
    for (std::size_t i = 0; i < s.size(); ++i)
      name += (i ? "|" : "") + std::to_string(s[i]);
    p.states.push_back(name);
  }
  p.initial = 0;
  return p;
}

// ---------------------------------------------------------------------------
// Construction

// Assembles networks from taps (value sources) and sinks. Pending edges are
// materialized in wiring order, which fixes edge ids deterministically.
class NetBuilder {
 public:
  struct Tap {
    int node = -1;  // -1: network input, port = coordinate
    int port = 0;
  };
  struct Sink {
    enum class Kind { node, output, trash } kind = Kind::node;
    int node = 0;
    int port = 0;
  };

  NetBuilder(int num_inputs, int num_outputs)
      : num_inputs_(num_inputs), num_outputs_(num_outputs) {}

  static Tap input(int i) { return {-1, i}; }
  static Sink output(int j) { return {Sink::Kind::output, 0, j}; }
  static Sink trash_sink() { return {Sink::Kind::trash, 0, 0}; }
  static Sink port(int node, int p) { return {Sink::Kind::node, node, p}; }

  int add_gate(const GateSpec& g) {
    NetNode n;
    n.gate = g;
    n.proc = gate_processor(g);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_processor(AbelianProcessor p, std::string name = "") {
    NetNode n;
    n.proc = std::move(p);
    n.name = std::move(name);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void wire(Tap from, Sink to) {
    if (from.node < 0 && to.kind == Sink::Kind::output) {
      // keep network inputs and outputs on separate edges
      int s = add_gate(GateSpec::splitter(2));
      wire(from, port(s, 0));
      pending_.push_back({{s, 0}, to});
      pending_.push_back({{s, 1}, trash_sink()});
      return;
    }
    pending_.push_back({from, to});
  }

  // A constant-zero output: an edge with neither tail nor head.
  void wire_zero_output(int j) {
    pending_.push_back({{kFloating, 0}, output(j)});
  }

  std::vector<Tap> split(Tap src, int n) {
    if (n < 1) throw NetworkError("split: fan must be >= 1");
    if (n == 1) return {src};
    int s = add_gate(GateSpec::splitter(2));
    wire(src, port(s, 0));
    int left = (n + 1) / 2;
    std::vector<Tap> out = split({s, 0}, left);
    std::vector<Tap> right = split({s, 1}, n - left);
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }

  Tap add_many(const std::vector<Tap>& srcs) {
    if (srcs.empty()) throw NetworkError("add_many: no sources");
    if (srcs.size() == 1) return srcs[0];
    std::size_t left = (srcs.size() + 1) / 2;
    Tap a = add_many({srcs.begin(), srcs.begin() + static_cast<std::ptrdiff_t>(left)});
    Tap b = add_many({srcs.begin() + static_cast<std::ptrdiff_t>(left), srcs.end()});
    int ad = add_gate(GateSpec::adder(2));
    wire(a, port(ad, 0));
    wire(b, port(ad, 1));
    return {ad, 0};
  }

  Tap through_toppler(Tap src, std::int64_t lambda, std::int64_t prime) {
    if (lambda == 1) {
      if (prime != 0) throw NetworkError("toppler: prime must be 0 when trivial");
      return src;
    }
    int t = add_gate(GateSpec::toppler(lambda, prime));
    wire(src, port(t, 0));
    return {t, 0};
  }

  Tap through_delayer(Tap src) {
    int d = add_gate(GateSpec::delayer());
    wire(src, port(d, 0));
    return {d, 0};
  }

  Tap through_presink(Tap src) {
    int d = add_gate(GateSpec::presink());
    wire(src, port(d, 0));
    return {d, 0};
  }

  // Adder tree feeding `target`; returns the n leaf ports in order.
  std::vector<Sink> add_tree_sinks(int n, Sink target) {
    if (n < 1) throw NetworkError("add_tree_sinks: need at least one leaf");
    if (n == 1) return {target};
    int ad = add_gate(GateSpec::adder(2));
    wire({ad, 0}, target);
    int left = (n + 1) / 2;
    std::vector<Sink> out = add_tree_sinks(left, port(ad, 0));
    std::vector<Sink> right = add_tree_sinks(n - left, port(ad, 1));
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }

  void absorb(Tap src) {
    if (src.node >= 0) {
      wire(src, trash_sink());
      return;
    }
    // a network input cannot itself be a trash edge; burn it in a splitter
    int s = add_gate(GateSpec::splitter(2));
    wire(src, port(s, 0));
    wire({s, 0}, trash_sink());
    wire({s, 1}, trash_sink());
  }

  // Embeds a whole sub-network: its input i is fed from feeds[i], its output
  // j flows into sinks[j], its trash stays trash. Sub-networks with constant
  // zero outputs may only target parent outputs or trash.
  void merge(const Network& sub, const std::vector<Tap>& feeds,
             const std::vector<Sink>& sinks) {
    if (static_cast<int>(sinks.size()) != sub.num_outputs())
      throw NetworkError("merge: sink arity mismatch");
    merge_core(sub, feeds, sinks, false);
  }

 private:
  void merge_skipping_output(const Network& sub, const std::vector<Tap>& feeds) {
    merge_core(sub, feeds, {}, true);
  }

  void merge_core(const Network& sub, const std::vector<Tap>& feeds,
                  const std::vector<Sink>& sinks, bool skip_first_output) {
    if (static_cast<int>(feeds.size()) != sub.num_inputs())
      throw NetworkError("merge: feed arity mismatch");
    const int off = static_cast<int>(nodes_.size());
    nodes_.insert(nodes_.end(), sub.nodes.begin(), sub.nodes.end());
    std::vector<int> input_of(sub.edges.size(), -1),
        output_of(sub.edges.size(), -1);
    std::vector<bool> is_trash(sub.edges.size(), false);
    for (std::size_t i = 0; i < sub.inputs.size(); ++i)
      input_of[static_cast<std::size_t>(sub.inputs[i])] = static_cast<int>(i);
    for (std::size_t j = 0; j < sub.outputs.size(); ++j)
      output_of[static_cast<std::size_t>(sub.outputs[j])] = static_cast<int>(j);
    for (int e : sub.trash) is_trash[static_cast<std::size_t>(e)] = true;
    for (std::size_t e = 0; e < sub.edges.size(); ++e) {
      const NetEdge& ed = sub.edges[e];
      Tap from;
      if (ed.from_node >= 0) {
        from = {off + ed.from_node, ed.from_port};
      } else if (input_of[e] >= 0) {
        from = feeds[static_cast<std::size_t>(input_of[e])];
      } else {
        from = {kFloating, 0};  // constant-zero source
      }
      Sink to;
      if (ed.to_node >= 0) {
        to = port(off + ed.to_node, ed.to_port);
      } else if (output_of[e] >= 0) {
        if (skip_first_output && output_of[e] == 0) continue;
        to = sinks[static_cast<std::size_t>(output_of[e])];
      } else if (is_trash[e]) {
        to = trash_sink();
      } else {
        throw NetworkError("merge: sub-network edge dangles without a role");
      }
      if (from.node == kFloating) {
        if (to.kind == Sink::Kind::trash) continue;  // zero into trash: drop
        if (to.kind == Sink::Kind::node)
          throw NetworkError("merge: constant-zero output cannot feed a port");
        pending_.push_back({from, to});
        continue;
      }
      wire(from, to);
    }
  }

 public:
  // Embeds a unary-output sub-network and returns the tap that drives its
  // output, leaving the caller free to wire it anywhere. The sub-network's
  // output must come off a real node.
  Tap merge_tapped(const Network& sub, const std::vector<Tap>& feeds) {
    if (sub.num_outputs() != 1)
      throw NetworkError("merge_tapped: sub-network must have one output");
    const NetEdge& oe =
        sub.edges[static_cast<std::size_t>(sub.outputs[0])];
    if (oe.from_node < 0)
      throw NetworkError("merge_tapped: constant-zero output has no tap");
    const int off = static_cast<int>(nodes_.size());
    merge_skipping_output(sub, feeds);
    return {off + oe.from_node, oe.from_port};
  }

  Network build() {
    Network net;
    net.nodes = nodes_;
    net.inputs.assign(static_cast<std::size_t>(num_inputs_), -1);
    net.outputs.assign(static_cast<std::size_t>(num_outputs_), -1);
    for (const auto& pe : pending_) {
      NetEdge ed;
      int id = static_cast<int>(net.edges.size());
      if (pe.from.node >= 0) {
        ed.from_node = pe.from.node;
        ed.from_port = pe.from.port;
      } else {
        ed.from_node = -1;
        if (pe.from.node == -1) {
          if (pe.from.port < 0 || pe.from.port >= num_inputs_)
            throw NetworkError("build: input coordinate out of range");
          if (net.inputs[static_cast<std::size_t>(pe.from.port)] != -1)
            throw NetworkError("build: input coordinate wired twice");
          net.inputs[static_cast<std::size_t>(pe.from.port)] = id;
        }
      }
      switch (pe.to.kind) {
        case Sink::Kind::node:
          ed.to_node = pe.to.node;
          ed.to_port = pe.to.port;
          break;
        case Sink::Kind::output:
          ed.to_node = -1;
          if (pe.to.port < 0 || pe.to.port >= num_outputs_)
            throw NetworkError("build: output coordinate out of range");
          if (net.outputs[static_cast<std::size_t>(pe.to.port)] != -1)
            throw NetworkError("build: output coordinate wired twice");
          net.outputs[static_cast<std::size_t>(pe.to.port)] = id;
          break;
        case Sink::Kind::trash:
          ed.to_node = -1;
          net.trash.push_back(id);
          break;
      }
      net.edges.push_back(ed);
    }
    for (int i = 0; i < num_inputs_; ++i)
      if (net.inputs[static_cast<std::size_t>(i)] == -1)
        throw NetworkError("build: input coordinate " + std::to_string(i) +
                           " left unwired");
    for (int j = 0; j < num_outputs_; ++j)
      if (net.outputs[static_cast<std::size_t>(j)] == -1)
        throw NetworkError("build: output coordinate " + std::to_string(j) +
                           " left unwired");
    validate(net);
    return net;
  }

 private:
  static constexpr int kFloating = -2;
  struct Pending {
    Tap from;
    Sink to;
  };
  int num_inputs_, num_outputs_;
  std::vector<NetNode> nodes_;
  std::vector<Pending> pending_;
};

// Balanced binary tree of two-way gates emulating one n-way splitter or
// adder; exactly n-1 gates, left subtree takes the extra leaf.
inline Network multiway_tree(GateKind kind, int n) {
  if (n < 2) throw NetworkError("multiway_tree: fan must be >= 2");
  if (kind == GateKind::splitter) {
    NetBuilder b(1, n);
    auto taps = b.split(NetBuilder::input(0), n);
    for (int j = 0; j < n; ++j)
      b.wire(taps[static_cast<std::size_t>(j)], NetBuilder::output(j));
    return b.build();
  }
  if (kind == GateKind::adder) {
    NetBuilder b(n, 1);
    std::vector<NetBuilder::Tap> srcs;
    for (int i = 0; i < n; ++i) srcs.push_back(NetBuilder::input(i));
    b.wire(b.add_many(srcs), NetBuilder::output(0));
    return b.build();
  }
  throw NetworkError("multiway_tree: only splitters and adders fan out");
}

namespace detail {

inline Network identity_network() {
  NetBuilder b(1, 1);
  auto taps = b.split(NetBuilder::input(0), 2);
  b.wire(taps[0], NetBuilder::output(0));
  b.absorb(taps[1]);
  return b.build();
}

}  // namespace detail

// Degree-d rotor: adder, splitter, and d topplers primed d-1, d-2, ..., 0, so
// the first letter in emits on branch 0.
inline Network rotor_node(int d, bool aggregation = false) {
  if (d < 1) throw NetworkError("rotor_node: degree must be >= 1");
  if (d == 1 && !aggregation) return detail::identity_network();
  NetBuilder b(d, d);
  NetBuilder::Tap stream;
  if (d >= 2) {
    int ad = b.add_gate(GateSpec::adder(d));
    for (int i = 0; i < d; ++i)
      b.wire(NetBuilder::input(i), NetBuilder::port(ad, i));
    stream = {ad, 0};
  } else {
    int s0 = b.add_gate(GateSpec::splitter(2));
    b.wire(NetBuilder::input(0), NetBuilder::port(s0, 0));
    b.absorb(NetBuilder::Tap{s0, 1});
    stream = {s0, 0};
  }
  if (aggregation) stream = b.through_delayer(stream);
  if (d >= 2) {
    int sp = b.add_gate(GateSpec::splitter(d));
    b.wire(stream, NetBuilder::port(sp, 0));
    for (int j = 0; j < d; ++j) {
      auto t = b.through_toppler({sp, j}, d, d - 1 - j);
      b.wire(t, NetBuilder::output(j));
    }
  } else {
    b.wire(stream, NetBuilder::output(0));
  }
  return b.build();
}

inline Network rotor_aggregation_node(int d) { return rotor_node(d, true); }

// Degree-d sandpile: one toppler behind the adder, then a splitter; all
// branches fire together once d letters have arrived.
inline Network sandpile_node(int d, std::int64_t prime = 0) {
  if (d < 1) throw NetworkError("sandpile_node: degree must be >= 1");
  if (d == 1) return detail::identity_network();
  NetBuilder b(d, d);
  int ad = b.add_gate(GateSpec::adder(d));
  for (int i = 0; i < d; ++i)
    b.wire(NetBuilder::input(i), NetBuilder::port(ad, i));
  auto t = b.through_toppler({ad, 0}, d, prime);
  int sp = b.add_gate(GateSpec::splitter(d));
  b.wire(t, NetBuilder::port(sp, 0));
  for (int j = 0; j < d; ++j) b.wire({sp, j}, NetBuilder::output(j));
  return b.build();
}

}  // namespace abforge
