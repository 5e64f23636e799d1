#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abforge/json_io.hpp"
#include "abforge/network.hpp"
#include "abforge/pseudomin.hpp"
#include "abforge/zilep.hpp"

namespace abforge {

struct SynthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void synth_fail(const std::string& msg,
                                    const ZilepFunction& f) {
  throw SynthError(msg + " [function: " + zilep_to_json(f).dump() + "]");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Structure report

struct SynthReport {
  std::map<std::string, int> gate_counts;
  int nodes = 0;
  int edges = 0;
  bool acyclic = false;
  int toppler_count = 0;
  // max topplers on any directed path; an upper bound on the floor depth of
  // the computed function
  int floor_depth_bound = 0;
  int depth = 0;  // longest node path
  std::vector<std::string> passes;
};

inline SynthReport report(const Network& net) {
  SynthReport r;
  r.nodes = static_cast<int>(net.nodes.size());
  r.edges = static_cast<int>(net.edges.size());
  for (const auto& n : net.nodes) {
    std::string key = n.gate ? gate_kind_name(n.gate->kind) : "processor";
    ++r.gate_counts[key];
    if (n.gate && n.gate->kind == GateKind::toppler) ++r.toppler_count;
  }
  auto order = topo_order(net);
  r.acyclic = order.has_value();
  if (!r.acyclic) {
    r.floor_depth_bound = r.toppler_count;
    r.depth = r.nodes;
    return r;
  }
  std::vector<std::vector<int>> succ(net.nodes.size());
  for (const auto& e : net.edges)
    if (e.from_node >= 0 && e.to_node >= 0)
      succ[static_cast<std::size_t>(e.from_node)].push_back(e.to_node);
  std::vector<int> tpath(net.nodes.size(), 0), dpath(net.nodes.size(), 0);
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    int v = *it;
    bool is_toppler = net.nodes[static_cast<std::size_t>(v)].gate &&
                      net.nodes[static_cast<std::size_t>(v)].gate->kind ==
                          GateKind::toppler;
    int best_t = 0, best_d = 0;
    for (int w : succ[static_cast<std::size_t>(v)]) {
      best_t = std::max(best_t, tpath[static_cast<std::size_t>(w)]);
      best_d = std::max(best_d, dpath[static_cast<std::size_t>(w)]);
    }
    tpath[static_cast<std::size_t>(v)] = best_t + (is_toppler ? 1 : 0);
    dpath[static_cast<std::size_t>(v)] = best_d + 1;
    r.floor_depth_bound =
        std::max(r.floor_depth_bound, tpath[static_cast<std::size_t>(v)]);
    r.depth = std::max(r.depth, dpath[static_cast<std::size_t>(v)]);
  }
  return r;
}

inline json report_to_json(const SynthReport& r) {
  json j;
  j["gate_counts"] = r.gate_counts;
  j["nodes"] = r.nodes;
  j["edges"] = r.edges;
  j["acyclic"] = r.acyclic;
  j["topplers"] = r.toppler_count;
  j["floor_depth_bound"] = r.floor_depth_bound;
  j["depth"] = r.depth;
  j["passes"] = r.passes;
  return j;
}

// ---------------------------------------------------------------------------
// Function-level passes

// Unary-output components, re-minimized individually.
inline std::vector<ZilepFunction> split_outputs(const ZilepFunction& f) {
  std::vector<ZilepFunction> out;
  for (int j = 0; j < f.outputs; ++j) {
    ZilepFunction fj = f.component(j);
    out.push_back(tabulate1(
        f.arity, [&fj](const Vec& x) { return fj.eval1(x); }, f.periods,
        f.margins));
  }
  return out;
}

inline bool is_exact_linear(const ZilepFunction& f) {
  for (const auto& c : f.coeffs)
    if (!c.is_integer()) return false;
  Box b = f.box();
  Vec x = b.origin();
  std::int64_t p = 0;
  do {
    for (int j = 0; j < f.outputs; ++j) {
      std::int64_t lin = 0;
      for (int i = 0; i < f.arity; ++i)
        lin += f.coeff(j, i).num().to_i64() * x[static_cast<std::size_t>(i)];
      if (f.table[static_cast<std::size_t>(p * f.outputs + j)] != lin)
        return false;
    }
    ++p;
  } while (b.next(x));
  return true;
}

// Splitter trees into adder trees with the matrix entry as multiplicity.
inline Network synth_linear(const ZilepFunction& f) {
  if (!is_exact_linear(f))
    detail::synth_fail("synth_linear: function is not an integer matrix", f);
  const int k = f.arity, l = f.outputs;
  NetBuilder b(k, l);
  std::vector<std::vector<NetBuilder::Tap>> pool(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::int64_t uses = 0;
    for (int j = 0; j < l; ++j) uses += f.coeff(j, i).num().to_i64();
    if (uses == 0)
      b.absorb(NetBuilder::input(i));
    else
      pool[static_cast<std::size_t>(i)] =
          b.split(NetBuilder::input(i), static_cast<int>(uses));
  }
  std::vector<std::size_t> cursor(static_cast<std::size_t>(k), 0);
  for (int j = 0; j < l; ++j) {
    std::vector<NetBuilder::Tap> feeds;
    for (int i = 0; i < k; ++i) {
      std::int64_t mult = f.coeff(j, i).num().to_i64();
      for (std::int64_t c = 0; c < mult; ++c)
        feeds.push_back(pool[static_cast<std::size_t>(i)]
                            [cursor[static_cast<std::size_t>(i)]++]);
    }
    if (feeds.empty())
      b.wire_zero_output(j);
    else
      b.wire(b.add_many(feeds), NetBuilder::output(j));
  }
  return b.build();
}

// One toppler per unit of slope-quantum, primed to reproduce the first
// period of increments.
inline Network synth_unary_recurrent(const ZilepFunction& f) {
  if (f.arity != 1 || f.outputs != 1 || !f.is_zilp())
    detail::synth_fail("synth_unary_recurrent: needs a unary ZILP function", f);
  const std::int64_t lambda = f.periods[0];
  const std::int64_t m = f.quantum(0, 0);
  NetBuilder b(1, 1);
  if (m == 0) {
    b.absorb(NetBuilder::input(0));
    b.wire_zero_output(0);
    return b.build();
  }
  if (lambda == 1) {
    auto taps = b.split(NetBuilder::input(0), static_cast<int>(m));
    b.wire(b.add_many(taps), NetBuilder::output(0));
    return b.build();
  }
  auto taps = b.split(NetBuilder::input(0), static_cast<int>(m));
  std::vector<NetBuilder::Tap> joined;
  std::size_t cursor = 0;
  for (std::int64_t i = 1; i <= lambda; ++i) {
    std::int64_t d = f.table[static_cast<std::size_t>(i)] -
                     f.table[static_cast<std::size_t>(i - 1)];
    for (std::int64_t c = 0; c < d; ++c)
      joined.push_back(b.through_toppler(taps[cursor++], lambda, lambda - i));
  }
  b.wire(b.add_many(joined), NetBuilder::output(0));
  return b.build();
}

// f as the sum of m staggered quotient slices floor((f+j)/m); works for any
// unary-output function, eventually periodic parameters included.
inline std::vector<ZilepFunction> meagerize_by(const ZilepFunction& f,
                                               std::int64_t m) {
  if (f.outputs != 1)
    detail::synth_fail("meagerize: unary output required", f);
  if (m < 1) detail::synth_fail("meagerize: modulus must be positive", f);
  if (m == 1) return {f};
  Vec periods(static_cast<std::size_t>(f.arity));
  for (int i = 0; i < f.arity; ++i) {
    std::int64_t q = f.quantum(0, i);
    std::int64_t g = std::gcd(m, q);
    periods[static_cast<std::size_t>(i)] =
        f.periods[static_cast<std::size_t>(i)] * (g == 0 ? 1 : m / g);
  }
  std::vector<ZilepFunction> pieces;
  for (std::int64_t j = 0; j < m; ++j) {
    auto fn = [&f, j, m](const Vec& x) {
      return floordiv(f.eval1(x) + j, m);
    };
    pieces.push_back(tabulate1(f.arity, fn, periods, f.margins));
  }
  return pieces;
}

// Spec'd entry point: split along a coordinate's full quantum so every piece
// becomes meager there.
inline std::vector<ZilepFunction> meagerize(const ZilepFunction& f,
                                            int coord) {
  if (!f.is_zilp()) detail::synth_fail("meagerize: function must be ZILP", f);
  std::int64_t m = f.quantum(0, coord);
  if (m == 0)
    detail::synth_fail("meagerize: coordinate is degenerate", f);
  return meagerize_by(f, m);
}

struct MainReduction {
  ZilepFunction g;      // arity k-1
  std::int64_t offset;  // c with 0 <= c < lambda
  std::int64_t lambda;  // period of the folded coordinate
};

// Folds the last coordinate of a meager function into one primed toppler fed
// by an arity-(k-1) function: f(y,z) = floor((g(y) + z + c)/lambda).
inline MainReduction main_reduction(const ZilepFunction& f) {
  const int k = f.arity;
  if (f.outputs != 1 || !f.is_zilp() || k < 2)
    detail::synth_fail("main_reduction: needs a multi-ary unary ZILP", f);
  const int c = k - 1;
  if (f.quantum(0, c) != 1)
    detail::synth_fail("main_reduction: last coordinate must be meager", f);
  const std::int64_t lambda = f.periods[static_cast<std::size_t>(c)];
  // extension to negative z through meagerness
  auto fneg = [&f, c, lambda](Vec y, std::int64_t z) {
    y.push_back(z);
    if (z >= 0) return f.eval1(y);
    std::int64_t steps = (-z + lambda - 1) / lambda;
    y[static_cast<std::size_t>(c)] = z + steps * lambda;
    return f.eval1(y) - steps;
  };
  auto min_nonneg = [&](const Vec& y) {
    Vec x0 = y;
    x0.push_back(0);
    std::int64_t lo = -lambda * (f.eval1(x0) + 1);
    if (fneg(y, lo) >= 0)
      detail::synth_fail("main_reduction: search window too narrow", f);
    std::int64_t hi = 0;  // f(y,0) >= 0 always
    while (lo + 1 < hi) {
      std::int64_t mid = lo + (hi - lo) / 2;
      (fneg(y, mid) >= 0 ? hi : lo) = mid;
    }
    return hi;
  };
  const std::int64_t offset =
      -min_nonneg(Vec(static_cast<std::size_t>(k - 1), 0));
  if (offset < 0 || offset >= lambda)
    detail::synth_fail("main_reduction: offset out of range", f);
  Vec periods(f.periods.begin(), f.periods.end() - 1);
  Vec margins(static_cast<std::size_t>(k - 1), 0);
  ZilepFunction g = tabulate1(
      k - 1, [&](const Vec& y) { return -offset - min_nonneg(y); }, periods,
      margins);
  // reconstruction identity over the whole stored box
  Box b = f.box();
  Vec x = b.origin();
  do {
    Vec y(x.begin(), x.end() - 1);
    std::int64_t want = f.eval1(x);
    std::int64_t got = floordiv(
        g.eval1(y) + x[static_cast<std::size_t>(c)] + offset, lambda);
    if (want != got)
      detail::synth_fail("main_reduction: reconstruction identity failed", f);
  } while (b.next(x));
  return {std::move(g), offset, lambda};
}

// ---------------------------------------------------------------------------
// Interleave plan (general-case machinery)

struct InterleavePlan {
  std::int64_t layers = 1;  // n
  int case1 = 0;            // 0: layers constant past zeta=1; 1: slope 1/n
  Vec offsets;              // u_i = F(0, i)
  std::vector<ZilepFunction> layer_fns;  // G_i(y, zeta), arity k
  ZilepFunction combiner;                // v -> M(v + u), ZILP over N^n
};

inline Vec zeta_targets(std::int64_t n, std::int64_t z) {
  Vec out;
  for (std::int64_t i = 0; i < n; ++i)
    out.push_back(n * floordiv(z + n - i - 1, n) + i);
  return out;
}

// Builds layer functions, offsets, and the pseudo-minimum combiner for a
// piece with roughness 1 and period = margin = n in its last coordinate, then
// asserts the interleaving identity on the stored box.
inline InterleavePlan interleave_plan(const ZilepFunction& F, std::int64_t n,
                                      int case1) {
  const int k = F.arity;
  const int c = k - 1;
  InterleavePlan plan;
  plan.layers = n;
  plan.case1 = case1;
  for (std::int64_t i = 0; i < n; ++i) {
    Vec x(static_cast<std::size_t>(k), 0);
    x[static_cast<std::size_t>(c)] = i;
    plan.offsets.push_back(F.eval1(x));
  }
  Vec yper(F.periods.begin(), F.periods.end() - 1);
  Vec ymar(F.margins.begin(), F.margins.end() - 1);
  for (std::int64_t i = 0; i < n; ++i) {
    Vec periods = yper, margins = ymar;
    periods.push_back(1);
    margins.push_back(1);
    std::int64_t ui = plan.offsets[static_cast<std::size_t>(i)];
    auto fn = [&F, n, i, ui, c](const Vec& x) {
      Vec z = x;
      z[static_cast<std::size_t>(c)] = n * x[static_cast<std::size_t>(c)] + i;
      return F.eval1(z) - ui;
    };
    plan.layer_fns.push_back(tabulate1(k, fn, periods, margins));
  }
  plan.combiner = pseudomin_zilep(static_cast<int>(n), plan.offsets);
  Box b = F.box();
  Vec x = b.origin();
  do {
    Vec v;
    for (std::int64_t i = 0; i < n; ++i) {
      Vec yz = x;
      yz[static_cast<std::size_t>(c)] =
          floordiv(x[static_cast<std::size_t>(c)] + n - i - 1, n);
      v.push_back(plan.layer_fns[static_cast<std::size_t>(i)].eval1(yz));
    }
    if (plan.combiner.eval1(v) != F.eval1(x))
      detail::synth_fail("interleave: central identity failed on the grid", F);
  } while (b.next(x));
  return plan;
}

// ---------------------------------------------------------------------------
// Drivers

enum class SynthMode { automatic, recurrent, bounded, general };

class Synthesizer {
 public:
  explicit Synthesizer(std::vector<std::string>* log = nullptr) : log_(log) {}

  Network recurrent(const ZilepFunction& f) {
    if (!f.is_zilp())
      detail::synth_fail("recurrent synthesis requires zero margins", f);
    return with_outputs_split(
        f, [this](const ZilepFunction& u) { return recurrent_u(u); });
  }

  Network bounded(const ZilepFunction& f) {
    if (!is_bounded(f).first)
      detail::synth_fail("bounded synthesis requires zero linear part", f);
    return with_outputs_split(
        f, [this](const ZilepFunction& u) { return bounded_u(u); });
  }

  Network general(const ZilepFunction& f) {
    return with_outputs_split(
        f, [this](const ZilepFunction& u) { return general_u(u); });
  }

  Network two_layer(const ZilepFunction& f) { return two_layer_u(f); }

 private:
  std::vector<std::string>* log_;

  void fire(const std::string& pass) {
    if (log_ && std::find(log_->begin(), log_->end(), pass) == log_->end())
      log_->push_back(pass);
  }

  static Network zero_network(int arity) {
    NetBuilder b(arity, 1);
    for (int i = 0; i < arity; ++i) b.absorb(NetBuilder::input(i));
    b.wire_zero_output(0);
    return b.build();
  }

  template <typename Fn>
  Network with_outputs_split(const ZilepFunction& f, Fn&& unary) {
    if (f.outputs == 1) return unary(f);
    fire("split-outputs");
    std::vector<ZilepFunction> comps = split_outputs(f);
    std::vector<int> live;
    for (int j = 0; j < f.outputs; ++j)
      if (!is_identically_zero(comps[static_cast<std::size_t>(j)]))
        live.push_back(j);
    std::vector<Network> nets;
    for (int j : live) nets.push_back(unary(comps[static_cast<std::size_t>(j)]));
    NetBuilder b(f.arity, f.outputs);
    std::vector<std::vector<NetBuilder::Tap>> fan(
        static_cast<std::size_t>(f.arity));
    for (int i = 0; i < f.arity; ++i) {
      if (live.empty())
        b.absorb(NetBuilder::input(i));
      else
        fan[static_cast<std::size_t>(i)] =
            b.split(NetBuilder::input(i), static_cast<int>(live.size()));
    }
    for (std::size_t s = 0; s < live.size(); ++s) {
      std::vector<NetBuilder::Tap> feeds;
      for (int i = 0; i < f.arity; ++i)
        feeds.push_back(fan[static_cast<std::size_t>(i)][s]);
      b.merge(nets[s], feeds, {NetBuilder::output(live[s])});
    }
    for (int j = 0; j < f.outputs; ++j)
      if (std::find(live.begin(), live.end(), j) == live.end())
        b.wire_zero_output(j);
    return b.build();
  }

  // Strip any provably ignored coordinate and wrap the reduced network.
  std::optional<Network> strip_degenerate(
      const ZilepFunction& f,
      Network (Synthesizer::*rec)(const ZilepFunction&)) {
    if (f.arity == 1) return std::nullopt;
    for (int i = 0; i < f.arity; ++i) {
      if (!is_degenerate_coord(f, i)) continue;
      fire("drop-degenerate");
      Network inner = (this->*rec)(drop_coord(f, i));
      NetBuilder b(f.arity, 1);
      b.absorb(NetBuilder::input(i));
      std::vector<NetBuilder::Tap> feeds;
      for (int t = 0; t < f.arity; ++t)
        if (t != i) feeds.push_back(NetBuilder::input(t));
      b.merge(inner, feeds, {NetBuilder::output(0)});
      return b.build();
    }
    return std::nullopt;
  }

  Network recurrent_u(const ZilepFunction& f) {
    if (is_identically_zero(f)) return zero_network(f.arity);
    if (auto stripped = strip_degenerate(f, &Synthesizer::recurrent_u))
      return *stripped;
    if (is_exact_linear(f)) {
      fire("linear");
      return synth_linear(f);
    }
    if (f.arity == 1) {
      fire("unary-recurrent");
      return synth_unary_recurrent(f);
    }
    const int k = f.arity;
    std::vector<ZilepFunction> pieces = meagerize(f, k - 1);
    fire("meagerize");
    struct Piece {
      MainReduction mr;
      Network gnet;
      bool g_zero;
    };
    std::vector<Piece> built;
    for (const auto& piece : pieces) {
      MainReduction mr = main_reduction(piece);
      fire("main-reduction");
      bool gz = is_identically_zero(mr.g);
      Network gn = gz ? Network{} : recurrent_u(mr.g);
      built.push_back({std::move(mr), std::move(gn), gz});
    }
    NetBuilder b(k, 1);
    const int m = static_cast<int>(built.size());
    int g_users = 0;
    for (const auto& pc : built)
      if (!pc.g_zero) ++g_users;
    std::vector<std::vector<NetBuilder::Tap>> ytaps(
        static_cast<std::size_t>(k - 1));
    for (int i = 0; i < k - 1; ++i) {
      if (g_users == 0)
        b.absorb(NetBuilder::input(i));
      else
        ytaps[static_cast<std::size_t>(i)] =
            b.split(NetBuilder::input(i), g_users);
    }
    auto ztaps = b.split(NetBuilder::input(k - 1), m);
    std::vector<NetBuilder::Tap> piece_out;
    int gslot = 0;
    for (int j = 0; j < m; ++j) {
      const Piece& pc = built[static_cast<std::size_t>(j)];
      NetBuilder::Tap stream = ztaps[static_cast<std::size_t>(j)];
      if (!pc.g_zero) {
        std::vector<NetBuilder::Tap> feeds;
        for (int i = 0; i < k - 1; ++i)
          feeds.push_back(ytaps[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(gslot)]);
        NetBuilder::Tap g_out = b.merge_tapped(pc.gnet, feeds);
        stream = b.add_many({g_out, stream});
        ++gslot;
      }
      piece_out.push_back(
          b.through_toppler(stream, pc.mr.lambda, pc.mr.offset));
    }
    b.wire(b.add_many(piece_out), NetBuilder::output(0));
    return b.build();
  }

  Network bounded_u(const ZilepFunction& f) {
    auto [ok, bound] = is_bounded(f);
    if (!ok) detail::synth_fail("bounded synthesis on unbounded function", f);
    if (bound == 0) return zero_network(f.arity);
    if (auto stripped = strip_degenerate(f, &Synthesizer::bounded_u))
      return *stripped;
    fire("bounded-thresholds");
    const int k = f.arity;
    Box b = f.box();
    std::vector<std::vector<Vec>> minimals;
    for (std::int64_t j = 0; j < bound; ++j) {
      std::vector<Vec> pts;
      Vec x = b.origin();
      do {
        if (f.eval1(x) > j) pts.push_back(x);
      } while (b.next(x));
      std::vector<Vec> mins;
      for (const auto& p : pts) {
        bool minimal = true;
        for (const auto& q : pts) {
          if (q == p) continue;
          bool leq = true;
          for (int i = 0; i < k; ++i)
            if (q[static_cast<std::size_t>(i)] >
                p[static_cast<std::size_t>(i)])
              leq = false;
          if (leq) {
            minimal = false;
            break;
          }
        }
        if (minimal) mins.push_back(p);
      }
      if (mins.empty())
        detail::synth_fail("bounded synthesis: threshold set empty", f);
      minimals.push_back(std::move(mins));
    }
    NetBuilder nb(k, 1);
    Vec uses(static_cast<std::size_t>(k), 0);
    for (const auto& mins : minimals)
      for (const auto& mpt : mins)
        for (int i = 0; i < k; ++i)
          if (mpt[static_cast<std::size_t>(i)] >= 1)
            ++uses[static_cast<std::size_t>(i)];
    std::vector<std::vector<NetBuilder::Tap>> taps(static_cast<std::size_t>(k));
    std::vector<std::size_t> cursor(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) {
      if (uses[static_cast<std::size_t>(i)] == 0)
        nb.absorb(NetBuilder::input(i));
      else
        taps[static_cast<std::size_t>(i)] =
            nb.split(NetBuilder::input(i),
                     static_cast<int>(uses[static_cast<std::size_t>(i)]));
    }
    std::vector<NetBuilder::Tap> thresholds;
    for (const auto& mins : minimals) {
      std::optional<NetBuilder::Tap> any;
      for (const auto& mpt : mins) {
        std::optional<NetBuilder::Tap> all;
        for (int i = 0; i < k; ++i) {
          std::int64_t need = mpt[static_cast<std::size_t>(i)];
          if (need < 1) continue;
          NetBuilder::Tap t = taps[static_cast<std::size_t>(i)]
                                  [cursor[static_cast<std::size_t>(i)]++];
          for (std::int64_t d = 1; d < need; ++d) t = nb.through_delayer(t);
          t = nb.through_presink(t);
          all = all ? nb.through_delayer(nb.add_many({*all, t})) : t;
        }
        any = any ? nb.through_presink(nb.add_many({*any, *all})) : *all;
      }
      thresholds.push_back(*any);
    }
    nb.wire(nb.add_many(thresholds), NetBuilder::output(0));
    return nb.build();
  }

  static bool constant_after_one(const ZilepFunction& f) {
    const int c = f.arity - 1;
    Box b = f.box();
    Vec x = b.origin();
    do {
      if (x[static_cast<std::size_t>(c)] <= 1) continue;
      Vec y = x;
      y[static_cast<std::size_t>(c)] = 1;
      if (f.table[static_cast<std::size_t>(b.index(x))] !=
          f.table[static_cast<std::size_t>(b.index(y))])
        return false;
    } while (b.next(x));
    return true;
  }

  // Inductive fragment for a function constant in its last coordinate past
  // one: both layer restrictions plus a presink, folded by a primed
  // 2-toppler.
  Network two_layer_u(const ZilepFunction& f) {
    const int k = f.arity;
    if (f.outputs != 1 || k < 2)
      detail::synth_fail("two_layer: needs arity >= 2 and unary output", f);
    if (!constant_after_one(f))
      detail::synth_fail("two_layer: layer condition violated", f);
    const int c = k - 1;
    std::int64_t w = 0;
    {
      Box b = f.box();
      Vec x = b.origin();
      do {
        if (x[static_cast<std::size_t>(c)] != 0) continue;
        Vec y = x;
        y[static_cast<std::size_t>(c)] = 1;
        w = std::max(w, f.table[static_cast<std::size_t>(b.index(y))] -
                            f.table[static_cast<std::size_t>(b.index(x))]);
      } while (b.next(x));
    }
    if (w == 0) {
      Network inner = general_u(drop_coord(f, c));
      NetBuilder b(k, 1);
      b.absorb(NetBuilder::input(c));
      std::vector<NetBuilder::Tap> feeds;
      for (int t = 0; t < c; ++t) feeds.push_back(NetBuilder::input(t));
      b.merge(inner, feeds, {NetBuilder::output(0)});
      return b.build();
    }
    if (w >= 2) {
      fire("two-layer-meagerize");
      std::vector<ZilepFunction> pieces = meagerize_by(f, w);
      std::vector<int> live;
      for (std::size_t j = 0; j < pieces.size(); ++j)
        if (!is_identically_zero(pieces[j]))
          live.push_back(static_cast<int>(j));
      if (live.empty()) return zero_network(k);
      std::vector<Network> nets;
      for (int j : live)
        nets.push_back(two_layer_u(pieces[static_cast<std::size_t>(j)]));
      NetBuilder b(k, 1);
      std::vector<std::vector<NetBuilder::Tap>> fan(
          static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i)
        fan[static_cast<std::size_t>(i)] =
            b.split(NetBuilder::input(i), static_cast<int>(live.size()));
      std::vector<NetBuilder::Tap> outs;
      for (std::size_t s = 0; s < live.size(); ++s) {
        std::vector<NetBuilder::Tap> feeds;
        for (int i = 0; i < k; ++i)
          feeds.push_back(fan[static_cast<std::size_t>(i)][s]);
        outs.push_back(b.merge_tapped(nets[s], feeds));
      }
      b.wire(b.add_many(outs), NetBuilder::output(0));
      return b.build();
    }
    fire("two-layer");
    std::int64_t u;
    {
      Vec x0(static_cast<std::size_t>(k), 0);
      x0[static_cast<std::size_t>(c)] = 1;
      u = f.eval1(x0);
    }
    if (u < 0 || u > 1)
      detail::synth_fail("two_layer: offset outside {0,1}", f);
    Vec yper(f.periods.begin(), f.periods.end() - 1);
    Vec ymar(f.margins.begin(), f.margins.end() - 1);
    ZilepFunction f0 = tabulate1(
        k - 1,
        [&f](const Vec& y) {
          Vec x = y;
          x.push_back(0);
          return f.eval1(x);
        },
        yper, ymar);
    ZilepFunction f1 = tabulate1(
        k - 1,
        [&f, u](const Vec& y) {
          Vec x = y;
          x.push_back(1);
          return f.eval1(x) - u;
        },
        yper, ymar);
    {
      Box bb = f.box();
      Vec x = bb.origin();
      do {
        Vec y(x.begin(), x.end() - 1);
        std::int64_t ind = x[static_cast<std::size_t>(c)] > 0 ? 1 : 0;
        std::int64_t want = f.eval1(x);
        std::int64_t got = floordiv(f0.eval1(y) + f1.eval1(y) + u + ind, 2);
        if (want != got)
          detail::synth_fail("two_layer: reconstruction identity failed", f);
      } while (bb.next(x));
    }
    bool z0 = is_identically_zero(f0), z1 = is_identically_zero(f1);
    Network n0 = z0 ? Network{} : general_u(f0);
    Network n1 = z1 ? Network{} : general_u(f1);
    NetBuilder b(k, 1);
    int consumers = (z0 ? 0 : 1) + (z1 ? 0 : 1);
    std::vector<std::vector<NetBuilder::Tap>> fan(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
      if (consumers == 0)
        b.absorb(NetBuilder::input(i));
      else
        fan[static_cast<std::size_t>(i)] =
            b.split(NetBuilder::input(i), consumers);
    }
    std::vector<NetBuilder::Tap> addends;
    int slot = 0;
    for (const auto* net : {z0 ? nullptr : &n0, z1 ? nullptr : &n1}) {
      if (!net) continue;
      std::vector<NetBuilder::Tap> feeds;
      for (int i = 0; i < c; ++i)
        feeds.push_back(fan[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(slot)]);
      addends.push_back(b.merge_tapped(*net, feeds));
      ++slot;
    }
    addends.push_back(b.through_presink(NetBuilder::input(c)));
    NetBuilder::Tap sum = b.add_many(addends);
    b.wire(b.through_toppler(sum, 2, u), NetBuilder::output(0));
    return b.build();
  }

  Network general_u(const ZilepFunction& f) {
    if (is_identically_zero(f)) return zero_network(f.arity);
    if (f.is_zilp()) return recurrent_u(f);
    if (auto stripped = strip_degenerate(f, &Synthesizer::general_u))
      return *stripped;
    if (f.arity == 1) return general_unary(f);
    const int c = f.arity - 1;
    LayerProfile prof = layer_profile(f, c);
    if (prof.roughness == 0) {
      Network inner = general_u(drop_coord(f, c));
      NetBuilder b(f.arity, 1);
      b.absorb(NetBuilder::input(c));
      std::vector<NetBuilder::Tap> feeds;
      for (int t = 0; t < c; ++t) feeds.push_back(NetBuilder::input(t));
      b.merge(inner, feeds, {NetBuilder::output(0)});
      return b.build();
    }
    std::int64_t n;
    int case1;
    std::int64_t slices;
    if (prof.slope.is_zero()) {
      case1 = 0;
      n = prof.margin;  // roughness > 0 with zero slope forces margin >= 1
      slices = prof.roughness;
    } else {
      case1 = 1;
      std::int64_t wl = prof.roughness * prof.period;
      std::int64_t r = std::max<std::int64_t>(prof.margin, 1);
      n = ((r + wl - 1) / wl) * wl;  // least multiple of W*L at or above R
      Rational sn = prof.slope * Rational(n);
      if (!sn.is_integer())
        detail::synth_fail("general: slice count not integral", f);
      slices = sn.num().to_i64();
    }
    fire(case1 ? "interleave-case1" : "interleave-case0");
    std::vector<ZilepFunction> pieces = meagerize_by(f, slices);
    std::vector<int> live;
    for (std::size_t j = 0; j < pieces.size(); ++j)
      if (!is_identically_zero(pieces[j])) live.push_back(static_cast<int>(j));
    if (live.empty()) return zero_network(f.arity);
    std::vector<Network> nets;
    for (int j : live) {
      const auto& piece = pieces[static_cast<std::size_t>(j)];
      LayerProfile pp = layer_profile(piece, c);
      nets.push_back(pp.roughness == 0 || is_degenerate_coord(piece, c)
                         ? general_u_wrap_drop(piece, c)
                         : interleave_synth(piece, n, case1));
    }
    if (live.size() == 1) return nets[0];
    NetBuilder b(f.arity, 1);
    std::vector<std::vector<NetBuilder::Tap>> fan(
        static_cast<std::size_t>(f.arity));
    for (int i = 0; i < f.arity; ++i)
      fan[static_cast<std::size_t>(i)] =
          b.split(NetBuilder::input(i), static_cast<int>(live.size()));
    std::vector<NetBuilder::Tap> outs;
    for (std::size_t s = 0; s < live.size(); ++s) {
      std::vector<NetBuilder::Tap> feeds;
      for (int i = 0; i < f.arity; ++i)
        feeds.push_back(fan[static_cast<std::size_t>(i)][s]);
      outs.push_back(b.merge_tapped(nets[s], feeds));
    }
    b.wire(b.add_many(outs), NetBuilder::output(0));
    return b.build();
  }

  Network general_u_wrap_drop(const ZilepFunction& f, int coord) {
    Network inner = general_u(drop_coord(f, coord));
    NetBuilder b(f.arity, 1);
    b.absorb(NetBuilder::input(coord));
    std::vector<NetBuilder::Tap> feeds;
    for (int t = 0; t < f.arity; ++t)
      if (t != coord) feeds.push_back(NetBuilder::input(t));
    b.merge(inner, feeds, {NetBuilder::output(0)});
    return b.build();
  }

  // Margin-stripping base case: a delayer chain with presink taps feeding a
  // recurrent core on the shifted argument.
  Network general_unary(const ZilepFunction& f) {
    const std::int64_t margin = f.margins[0];
    if (margin == 0) return recurrent_u(f);
    fire("unary-general");
    const std::int64_t lambda = f.periods[0];
    ZilepFunction core = tabulate1(
        1,
        [&f, margin](const Vec& x) {
          return f.eval1({x[0] + margin}) - f.eval1({margin});
        },
        {lambda}, {0});
    Vec d;
    for (std::int64_t i = 0; i < margin; ++i)
      d.push_back(f.eval1({i + 1}) - f.eval1({i}));
    bool core_zero = is_identically_zero(core);
    std::int64_t taps_total = 0;
    for (auto v : d) taps_total += v;
    if (taps_total == 0 && core_zero) return zero_network(1);
    NetBuilder b(1, 1);
    std::vector<NetBuilder::Tap> contribs;
    NetBuilder::Tap cur = NetBuilder::input(0);
    for (std::int64_t i = 0; i < margin; ++i) {
      if (d[static_cast<std::size_t>(i)] > 0) {
        auto pair = b.split(cur, 2);
        NetBuilder::Tap ind = b.through_presink(pair[1]);
        auto copies =
            b.split(ind, static_cast<int>(d[static_cast<std::size_t>(i)]));
        contribs.insert(contribs.end(), copies.begin(), copies.end());
        cur = b.through_delayer(pair[0]);
      } else {
        cur = b.through_delayer(cur);
      }
    }
    if (core_zero) {
      b.absorb(cur);
    } else {
      contribs.push_back(b.merge_tapped(recurrent_u(core), {cur}));
    }
    b.wire(b.add_many(contribs), NetBuilder::output(0));
    return b.build();
  }

  // One piece with roughness 1 and period = margin = n in the last
  // coordinate: primed topplers compute the staircase indices, per-layer
  // networks feed the pseudo-minimum combiner.
  Network interleave_synth(const ZilepFunction& piece, std::int64_t n,
                           int case1) {
    InterleavePlan plan = interleave_plan(piece, n, case1);
    const int k = piece.arity;
    const int c = k - 1;
    // per-layer sub-functions: case 0 keeps G_i, case 1 peels off (zeta-1)^+
    std::vector<ZilepFunction> subs;
    std::vector<bool> sub_zero;
    for (std::int64_t i = 0; i < n; ++i) {
      const ZilepFunction& gi = plan.layer_fns[static_cast<std::size_t>(i)];
      if (case1 == 0) {
        subs.push_back(gi);
      } else {
        Vec per = gi.periods, mar = gi.margins;
        per[static_cast<std::size_t>(c)] = 1;
        mar[static_cast<std::size_t>(c)] = 1;
        ZilepFunction hi = tabulate1(
            k,
            [&gi, c](const Vec& x) {
              Vec y = x;
              y[static_cast<std::size_t>(c)] =
                  std::min<std::int64_t>(x[static_cast<std::size_t>(c)], 1);
              return gi.eval1(y);
            },
            per, mar);
        // peel identity: G_i(y,zeta) = H_i(y,zeta) + (zeta-1)^+
        Box bb = gi.box();
        Vec x = bb.origin();
        do {
          std::int64_t zeta = x[static_cast<std::size_t>(c)];
          if (gi.eval1(x) !=
              hi.eval1(x) + std::max<std::int64_t>(zeta - 1, 0))
            detail::synth_fail("interleave: layer peel identity failed",
                               piece);
        } while (bb.next(x));
        subs.push_back(std::move(hi));
      }
      sub_zero.push_back(is_identically_zero(subs.back()));
    }
    std::vector<Network> subnets;
    for (std::int64_t i = 0; i < n; ++i)
      subnets.push_back(sub_zero[static_cast<std::size_t>(i)]
                            ? Network{}
                            : two_layer_u(subs[static_cast<std::size_t>(i)]));
    Network combnet = recurrent(plan.combiner);
    NetBuilder b(k, 1);
    int yfan = 0;
    for (std::int64_t i = 0; i < n; ++i)
      if (!sub_zero[static_cast<std::size_t>(i)]) ++yfan;
    std::vector<std::vector<NetBuilder::Tap>> fan(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
      if (yfan == 0)
        b.absorb(NetBuilder::input(i));
      else
        fan[static_cast<std::size_t>(i)] = b.split(NetBuilder::input(i), yfan);
    }
    auto ztaps = b.split(NetBuilder::input(c), static_cast<int>(n));
    std::vector<NetBuilder::Tap> vtaps;
    int slot = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      NetBuilder::Tap zeta =
          b.through_toppler(ztaps[static_cast<std::size_t>(i)], n, n - 1 - i);
      if (sub_zero[static_cast<std::size_t>(i)]) {
        // layer contributes only the peeled ramp (case 1) or nothing at all
        vtaps.push_back(case1 == 1
                            ? b.through_delayer(zeta)
                            : b.through_delayer(b.through_presink(zeta)));
        continue;
      }
      NetBuilder::Tap layer_z = zeta;
      std::optional<NetBuilder::Tap> ramp;
      if (case1 == 1) {
        auto pair = b.split(zeta, 2);
        layer_z = pair[0];
        ramp = b.through_delayer(pair[1]);
      }
      std::vector<NetBuilder::Tap> feeds;
      for (int t = 0; t < c; ++t)
        feeds.push_back(fan[static_cast<std::size_t>(t)]
                           [static_cast<std::size_t>(slot)]);
      feeds.push_back(layer_z);
      NetBuilder::Tap out = b.merge_tapped(
          subnets[static_cast<std::size_t>(i)], feeds);
      if (ramp) out = b.add_many({out, *ramp});
      vtaps.push_back(out);
      ++slot;
    }
    b.merge(combnet, vtaps, {NetBuilder::output(0)});
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// Network rewrites

namespace detail {

inline constexpr const char* kTombstone = "\x01tombstone";

// Splices a 1-in/1-out fragment in place of node v: the node's in-edge is
// retargeted at the fragment's entry port, its out-edge re-sourced from the
// fragment's exit port. Fragment inputs/outputs must sit on real nodes.
inline void substitute_node(Network& net, int v, const Network& frag) {
  if (frag.num_inputs() != 1 || frag.num_outputs() != 1)
    throw NetworkError("substitute_node: fragment must be 1-in/1-out");
  const int off = static_cast<int>(net.nodes.size());
  net.nodes.insert(net.nodes.end(), frag.nodes.begin(), frag.nodes.end());
  const NetEdge& fin = frag.edges[static_cast<std::size_t>(frag.inputs[0])];
  const NetEdge& fout = frag.edges[static_cast<std::size_t>(frag.outputs[0])];
  if (fin.to_node < 0 || fout.from_node < 0)
    throw NetworkError("substitute_node: fragment ports must be real nodes");
  for (auto& e : net.edges) {
    if (e.to_node == v) {
      e.to_node = off + fin.to_node;
      e.to_port = fin.to_port;
    }
    if (e.from_node == v) {
      e.from_node = off + fout.from_node;
      e.from_port = fout.from_port;
    }
  }
  for (std::size_t fe = 0; fe < frag.edges.size(); ++fe) {
    if (static_cast<int>(fe) == frag.inputs[0] ||
        static_cast<int>(fe) == frag.outputs[0])
      continue;
    NetEdge e = frag.edges[fe];
    if (e.from_node >= 0) e.from_node += off;
    if (e.to_node >= 0) e.to_node += off;
    bool is_trash = std::find(frag.trash.begin(), frag.trash.end(),
                              static_cast<int>(fe)) != frag.trash.end();
    if (e.to_node < 0 && !is_trash)
      throw NetworkError("substitute_node: fragment has stray dangling edge");
    net.edges.push_back(e);
    if (is_trash) net.trash.push_back(static_cast<int>(net.edges.size()) - 1);
  }
  // tombstone the replaced node; compaction happens after all substitutions
  net.nodes[static_cast<std::size_t>(v)] = NetNode{};
  net.nodes[static_cast<std::size_t>(v)].name = kTombstone;
}

inline void compact_nodes(Network& net) {
  std::vector<int> remap(net.nodes.size(), -1);
  std::vector<NetNode> keep;
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    if (net.nodes[v].name == kTombstone) continue;
    remap[v] = static_cast<int>(keep.size());
    keep.push_back(std::move(net.nodes[v]));
  }
  net.nodes = std::move(keep);
  for (auto& e : net.edges) {
    if (e.from_node >= 0) e.from_node = remap[static_cast<std::size_t>(e.from_node)];
    if (e.to_node >= 0) e.to_node = remap[static_cast<std::size_t>(e.to_node)];
  }
  validate(net);
}

inline Network unprime_fragment(std::int64_t lambda, std::int64_t q) {
  NetBuilder b(1, 1);
  auto pair = b.split(NetBuilder::input(0), 2);
  NetBuilder::Tap mark = b.through_presink(pair[1]);
  std::vector<NetBuilder::Tap> feeds = {pair[0]};
  auto copies = b.split(mark, static_cast<int>(q));
  feeds.insert(feeds.end(), copies.begin(), copies.end());
  NetBuilder::Tap sum = b.add_many(feeds);
  b.wire(b.through_toppler(sum, lambda, 0), NetBuilder::output(0));
  return b.build();
}

// Chain of 2-topplers counting in binary from 2^r - lambda up to 2^r - 1,
// with the carry fan-out re-priming the marked stages.
inline Network binary_counter_fragment(std::int64_t lambda, std::int64_t q) {
  int r = 0;
  while ((std::int64_t{1} << r) < lambda) ++r;
  std::int64_t residue = (std::int64_t{1} << r) - lambda;
  std::vector<int> bits(static_cast<std::size_t>(r), 0);
  for (int i = 0; i < r; ++i) bits[static_cast<std::size_t>(i)] =
      static_cast<int>((residue >> i) & 1);
  NetBuilder b(1, 1);
  std::vector<int> loop_adders;
  NetBuilder::Tap stream = NetBuilder::input(0);
  for (int i = 0; i < r; ++i) {
    if (bits[static_cast<std::size_t>(i)]) {
      int ad = b.add_gate(GateSpec::adder(2));
      b.wire(stream, NetBuilder::port(ad, 0));
      loop_adders.push_back(ad);
      stream = {ad, 0};
    }
    stream = b.through_toppler(stream, 2, bits[static_cast<std::size_t>(i)]);
  }
  if (loop_adders.empty()) {
    b.wire(stream, NetBuilder::output(0));
  } else {
    int fan = static_cast<int>(loop_adders.size()) + 1;
    int sp = b.add_gate(GateSpec::splitter(fan));
    b.wire(stream, NetBuilder::port(sp, 0));
    b.wire(NetBuilder::Tap{sp, 0}, NetBuilder::output(0));
    for (std::size_t i = 0; i < loop_adders.size(); ++i)
      b.wire(NetBuilder::Tap{sp, static_cast<int>(i) + 1},
             NetBuilder::port(loop_adders[i], 1));
  }
  Network net = b.build();
  if (q > 0) {
    // a primed toppler is the same loop after q letters have passed through
    RunResult warm = run(net, Vec{q});
    if (!warm.halted)
      throw NetworkError("binary counter: priming run did not halt");
    for (std::size_t v = 0; v < net.nodes.size(); ++v) {
      net.nodes[v].proc.initial = warm.final_states[v];
      if (net.nodes[v].gate && net.nodes[v].gate->kind == GateKind::toppler)
        net.nodes[v].gate->prime = warm.final_states[v];
    }
    // the warm-up letters themselves never leave: they became state
    for (int e : net.outputs)
      if (warm.state.edge_count[static_cast<std::size_t>(e)] != 0)
        throw NetworkError("binary counter: priming emitted output");
  }
  return net;
}

inline Network delayer_loop_fragment() {
  NetBuilder b(1, 1);
  int ad = b.add_gate(GateSpec::adder(2));
  b.wire(NetBuilder::input(0), NetBuilder::port(ad, 0));
  NetBuilder::Tap t = b.through_toppler({ad, 0}, 2, 0);
  int sp = b.add_gate(GateSpec::splitter(2));
  b.wire(t, NetBuilder::port(sp, 0));
  b.wire(NetBuilder::Tap{sp, 0}, NetBuilder::output(0));
  b.wire(NetBuilder::Tap{sp, 1}, NetBuilder::port(ad, 1));
  return b.build();
}

}  // namespace detail

// Replaces every primed toppler by the presink unpriming fragment; the
// resulting network is acyclic whenever the input was.
inline Network rewrite_unprime(const Network& net) {
  Network out = net;
  const int nn = static_cast<int>(out.nodes.size());
  for (int v = 0; v < nn; ++v) {
    const auto& g = out.nodes[static_cast<std::size_t>(v)].gate;
    if (!g || g->kind != GateKind::toppler || g->prime == 0) continue;
    detail::substitute_node(out, v,
                            detail::unprime_fragment(g->lambda, g->prime));
  }
  detail::compact_nodes(out);
  return out;
}

// Replaces every toppler of threshold three or more by its binary-counter
// loop and every delayer by the toppler-splitter feedback loop; only
// 2-topplers, adders, splitters and presinks remain.
inline Network rewrite_feedback(const Network& net) {
  Network out = net;
  const int nn = static_cast<int>(out.nodes.size());
  for (int v = 0; v < nn; ++v) {
    const auto& g = out.nodes[static_cast<std::size_t>(v)].gate;
    if (!g) continue;
    if (g->kind == GateKind::toppler && g->lambda >= 3)
      detail::substitute_node(
          out, v, detail::binary_counter_fragment(g->lambda, g->prime));
    else if (g->kind == GateKind::delayer)
      detail::substitute_node(out, v, detail::delayer_loop_fragment());
  }
  detail::compact_nodes(out);
  return out;
}

// ---------------------------------------------------------------------------

struct CompileResult {
  Network net;
  SynthReport report;
};

inline CompileResult compile(const ZilepFunction& f, SynthMode mode,
                             const std::vector<std::string>& rewrites = {}) {
  std::vector<std::string> passes;
  SynthMode resolved = mode;
  if (mode == SynthMode::automatic) {
    if (f.is_zilp())
      resolved = SynthMode::recurrent;
    else if (is_bounded(f).first)
      resolved = SynthMode::bounded;
    else
      resolved = SynthMode::general;
  }
  Synthesizer synth(&passes);
  Network net;
  switch (resolved) {
    case SynthMode::recurrent:
      net = synth.recurrent(f);
      break;
    case SynthMode::bounded:
      net = synth.bounded(f);
      break;
    case SynthMode::general:
    default:
      net = synth.general(f);
      break;
  }
  for (const auto& rw : rewrites) {
    if (rw == "unprime") {
      net = rewrite_unprime(net);
      passes.push_back("rewrite-unprime");
    } else if (rw == "feedback") {
      net = rewrite_feedback(net);
      passes.push_back("rewrite-feedback");
    } else {
      throw SynthError("unknown rewrite '" + rw + "'");
    }
  }
  CompileResult res;
  res.report = report(net);
  res.report.passes = std::move(passes);
  res.net = std::move(net);
  return res;
}

inline Network synth_recurrent(const ZilepFunction& f,
                               std::vector<std::string>* log = nullptr) {
  return Synthesizer(log).recurrent(f);
}
inline Network synth_bounded(const ZilepFunction& f,
                             std::vector<std::string>* log = nullptr) {
  return Synthesizer(log).bounded(f);
}
inline Network synth_general(const ZilepFunction& f,
                             std::vector<std::string>* log = nullptr) {
  return Synthesizer(log).general(f);
}
inline Network synth_two_layer(const ZilepFunction& f,
                               std::vector<std::string>* log = nullptr) {
  return Synthesizer(log).two_layer(f);
}

}  // namespace abforge
