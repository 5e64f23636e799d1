#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abforge/zilep.hpp"

namespace abforge {

struct ProcessorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Finite automaton with one transition map and one output vector per input
// letter. The abelian laws (checked separately) make its cumulative output
// independent of input order.
struct AbelianProcessor {
  std::vector<std::string> letters_in;
  std::vector<std::string> letters_out;
  std::vector<std::string> states;
  int initial = 0;
  // transitions[letter][state] -> state
  std::vector<std::vector<int>> transitions;
  // outputs[letter][state] -> vector over letters_out
  std::vector<std::vector<Vec>> outputs;

  int num_letters() const { return static_cast<int>(letters_in.size()); }
  int num_outputs() const { return static_cast<int>(letters_out.size()); }
  int num_states() const { return static_cast<int>(states.size()); }

  int step(int letter, int state, Vec& accum) const {
    const Vec& o = outputs[static_cast<std::size_t>(letter)]
                          [static_cast<std::size_t>(state)];
    for (std::size_t j = 0; j < o.size(); ++j) accum[j] += o[j];
    return transitions[static_cast<std::size_t>(letter)]
                      [static_cast<std::size_t>(state)];
  }
};

inline void check_wellformed(const AbelianProcessor& p) {
  auto k = static_cast<std::size_t>(p.num_letters());
  auto l = static_cast<std::size_t>(p.num_outputs());
  auto n = static_cast<std::size_t>(p.num_states());
  if (k == 0 || l == 0 || n == 0)
    throw ProcessorError("processor: alphabets and state set must be nonempty");
  if (p.initial < 0 || p.initial >= static_cast<int>(n))
    throw ProcessorError("processor: initial state out of range");
  if (p.transitions.size() != k || p.outputs.size() != k)
    throw ProcessorError("processor: one transition/output map per letter");
  for (std::size_t i = 0; i < k; ++i) {
    if (p.transitions[i].size() != n || p.outputs[i].size() != n)
      throw ProcessorError("processor: maps must cover every state");
    for (std::size_t q = 0; q < n; ++q) {
      int t = p.transitions[i][q];
      if (t < 0 || t >= static_cast<int>(n))
        throw ProcessorError("processor: transition target out of range");
      if (p.outputs[i][q].size() != l)
        throw ProcessorError("processor: output vector arity mismatch");
      for (auto v : p.outputs[i][q])
        if (v < 0) throw ProcessorError("processor: negative output count");
    }
  }
}

struct AbelianVerdict {
  bool ok = true;
  int letter_i = -1, letter_j = -1, state = -1;
};

// Both commutation identities, checked for every letter pair and state;
// reports the lexicographically first violation.
inline AbelianVerdict check_abelian(const AbelianProcessor& p) {
  check_wellformed(p);
  const int k = p.num_letters(), n = p.num_states(), l = p.num_outputs();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      for (int q = 0; q < n; ++q) {
        auto qi = static_cast<std::size_t>(q);
        int ti = p.transitions[static_cast<std::size_t>(i)][qi];
        int tj = p.transitions[static_cast<std::size_t>(j)][qi];
        int tij = p.transitions[static_cast<std::size_t>(j)]
                               [static_cast<std::size_t>(ti)];
        int tji = p.transitions[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(tj)];
        if (tij != tji) return {false, i, j, q};
        for (int b = 0; b < l; ++b) {
          auto bb = static_cast<std::size_t>(b);
          std::int64_t lhs =
              p.outputs[static_cast<std::size_t>(i)][qi][bb] +
              p.outputs[static_cast<std::size_t>(j)]
                       [static_cast<std::size_t>(ti)][bb];
          std::int64_t rhs =
              p.outputs[static_cast<std::size_t>(j)][qi][bb] +
              p.outputs[static_cast<std::size_t>(i)]
                       [static_cast<std::size_t>(tj)][bb];
          if (lhs != rhs) return {false, i, j, q};
        }
      }
  return {};
}

struct EvalResult {
  Vec output;
  int state = 0;
};

// Feeds x_i copies of letter i, letters grouped by coordinate; order does not
// matter for processors passing check_abelian.
inline EvalResult eval_processor(const AbelianProcessor& p, const Vec& x) {
  if (static_cast<int>(x.size()) != p.num_letters())
    throw ProcessorError("eval: input arity mismatch");
  EvalResult r;
  r.output.assign(static_cast<std::size_t>(p.num_outputs()), 0);
  r.state = p.initial;
  for (int i = 0; i < p.num_letters(); ++i) {
    if (x[static_cast<std::size_t>(i)] < 0)
      throw ProcessorError("eval: negative input count");
    for (std::int64_t c = 0; c < x[static_cast<std::size_t>(i)]; ++c)
      r.state = p.step(i, r.state, r.output);
  }
  return r;
}

struct RecurrenceInfo {
  bool recurrent = false;
  std::vector<int> recurrent_class;  // unique terminal component from q0
  std::optional<std::string> error;  // set when the action structure is broken
};

// Strong connectivity of the state digraph under all letters. A well-formed
// abelian action reaches exactly one terminal strongly connected component
// from the initial state.
inline RecurrenceInfo classify_recurrence(const AbelianProcessor& p) {
  check_wellformed(p);
  const int n = p.num_states(), k = p.num_letters();
  // Tarjan SCC, iterative
  std::vector<int> idx(static_cast<std::size_t>(n), -1),
      low(static_cast<std::size_t>(n), 0), comp(static_cast<std::size_t>(n), -1);
  std::vector<bool> onstack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  struct Frame {
    int v;
    int edge;
  };
  for (int root = 0; root < n; ++root) {
    if (idx[static_cast<std::size_t>(root)] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    idx[static_cast<std::size_t>(root)] =
        low[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    onstack[static_cast<std::size_t>(root)] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < k) {
        int w = p.transitions[static_cast<std::size_t>(f.edge++)]
                             [static_cast<std::size_t>(f.v)];
        if (idx[static_cast<std::size_t>(w)] == -1) {
          idx[static_cast<std::size_t>(w)] =
              low[static_cast<std::size_t>(w)] = counter++;
          stack.push_back(w);
          onstack[static_cast<std::size_t>(w)] = true;
          call.push_back({w, 0});
        } else if (onstack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.v)] =
              std::min(low[static_cast<std::size_t>(f.v)],
                       idx[static_cast<std::size_t>(w)]);
        }
      } else {
        if (low[static_cast<std::size_t>(f.v)] ==
            idx[static_cast<std::size_t>(f.v)]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            onstack[static_cast<std::size_t>(w)] = false;
            comp[static_cast<std::size_t>(w)] = ncomp;
            if (w == f.v) break;
          }
          ++ncomp;
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty())
          low[static_cast<std::size_t>(call.back().v)] =
              std::min(low[static_cast<std::size_t>(call.back().v)],
                       low[static_cast<std::size_t>(v)]);
      }
    }
  }
  // terminal components reachable from q0
  std::vector<bool> terminal(static_cast<std::size_t>(ncomp), true);
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < k; ++i) {
      int w = p.transitions[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(q)];
      if (comp[static_cast<std::size_t>(q)] != comp[static_cast<std::size_t>(w)])
        terminal[static_cast<std::size_t>(comp[static_cast<std::size_t>(q)])] =
            false;
    }
  std::vector<bool> reach(static_cast<std::size_t>(n), false);
  std::vector<int> queue{p.initial};
  reach[static_cast<std::size_t>(p.initial)] = true;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int i = 0; i < k; ++i) {
      int w = p.transitions[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(queue[h])];
      if (!reach[static_cast<std::size_t>(w)]) {
        reach[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  std::vector<int> terminal_comps;
  for (int q = 0; q < n; ++q)
    if (reach[static_cast<std::size_t>(q)] &&
        terminal[static_cast<std::size_t>(comp[static_cast<std::size_t>(q)])]) {
      int c = comp[static_cast<std::size_t>(q)];
      if (std::find(terminal_comps.begin(), terminal_comps.end(), c) ==
          terminal_comps.end())
        terminal_comps.push_back(c);
    }
  RecurrenceInfo info;
  if (terminal_comps.size() != 1) {
    info.error = "multiple terminal components reachable; the transition maps "
                 "do not form an abelian monoid action";
    return info;
  }
  for (int q = 0; q < n; ++q)
    if (comp[static_cast<std::size_t>(q)] == terminal_comps[0])
      info.recurrent_class.push_back(q);
  info.recurrent =
      static_cast<int>(info.recurrent_class.size()) == n && ncomp == 1;
  return info;
}

// Least m >= 1 with t_i^m the identity on the recurrent class, for every
// letter: the lcm of the letter permutation orders.
inline std::int64_t exponent(const AbelianProcessor& p) {
  RecurrenceInfo info = classify_recurrence(p);
  if (info.error) throw ProcessorError(*info.error);
  std::vector<int> pos(static_cast<std::size_t>(p.num_states()), -1);
  for (std::size_t s = 0; s < info.recurrent_class.size(); ++s)
    pos[static_cast<std::size_t>(info.recurrent_class[s])] =
        static_cast<int>(s);
  std::int64_t m = 1;
  for (int i = 0; i < p.num_letters(); ++i) {
    std::vector<int> perm(info.recurrent_class.size(), -1);
    for (std::size_t s = 0; s < info.recurrent_class.size(); ++s) {
      int w = p.transitions[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(info.recurrent_class[s])];
      if (pos[static_cast<std::size_t>(w)] < 0)
        throw ProcessorError("exponent: letter leaves the recurrent class");
      perm[s] = pos[static_cast<std::size_t>(w)];
    }
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t s = 0; s < perm.size(); ++s) {
      if (seen[s]) continue;
      std::int64_t len = 0;
      for (std::size_t t = s; !seen[t]; t = static_cast<std::size_t>(perm[t])) {
        seen[t] = true;
        ++len;
      }
      m = std::lcm(m, len);
    }
  }
  return m;
}

namespace detail {

// Pre-period and least period of the iteration t, t^2, t^3, ... as maps on
// the full state set (tail plus cycle of the functional-composition orbit).
inline std::pair<std::int64_t, std::int64_t> map_rho(
    const std::vector<int>& t) {
  std::map<std::vector<int>, std::int64_t> seen;
  std::vector<int> cur(t.size());
  for (std::size_t q = 0; q < t.size(); ++q) cur[q] = static_cast<int>(q);
  std::int64_t n = 0;
  while (true) {
    auto it = seen.find(cur);
    if (it != seen.end()) return {it->second, n - it->second};
    seen.emplace(cur, n);
    std::vector<int> nxt(t.size());
    for (std::size_t q = 0; q < t.size(); ++q)
      nxt[q] = t[static_cast<std::size_t>(cur[q])];
    cur = std::move(nxt);
    ++n;
  }
}

}  // namespace detail

// Extracts the exact linear + eventually periodic form computed by p. Valid
// margins/periods come from the tail and cycle of each letter's transition
// map; the tabulation then minimizes both.
inline ZilepFunction processor_to_zilep(const AbelianProcessor& p) {
  AbelianVerdict v = check_abelian(p);
  if (!v.ok) throw ProcessorError("processor_to_zilep: not abelian");
  const int k = p.num_letters();
  Vec periods(static_cast<std::size_t>(k)), margins(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    auto [r, lam] = detail::map_rho(p.transitions[static_cast<std::size_t>(i)]);
    margins[static_cast<std::size_t>(i)] = r;
    periods[static_cast<std::size_t>(i)] = std::max<std::int64_t>(lam, 1);
  }
  auto fn = [&p](const Vec& x) { return eval_processor(p, x).output; };
  return tabulate(k, p.num_outputs(), fn, periods, margins);
}

// Canonical processor for a valid function: states are the box points reduced
// by one period wherever a coordinate passes margin + period, transitions add
// a letter, outputs are the one-step increments.
inline AbelianProcessor zilep_to_processor(const ZilepFunction& f) {
  validate(f);
  Vec dims(static_cast<std::size_t>(f.arity));
  for (int i = 0; i < f.arity; ++i)
    dims[static_cast<std::size_t>(i)] =
        f.margins[static_cast<std::size_t>(i)] +
        f.periods[static_cast<std::size_t>(i)];
  Box sb = checked_box(dims, "zilep_to_processor");
  AbelianProcessor p;
  for (int i = 0; i < f.arity; ++i)
    p.letters_in.push_back("a" + std::to_string(i));
  for (int j = 0; j < f.outputs; ++j)
    p.letters_out.push_back("b" + std::to_string(j));
  std::int64_t n = sb.size();
  {
    Vec x = sb.origin();
    do {
      std::string name;
      for (std::size_t i = 0; i < x.size(); ++i)
        name += (i ? "," : "") + std::to_string(x[i]);
      p.states.push_back(name);
    } while (sb.next(x));
  }
  p.initial = 0;
  p.transitions.assign(static_cast<std::size_t>(f.arity), {});
  p.outputs.assign(static_cast<std::size_t>(f.arity), {});
  for (int i = 0; i < f.arity; ++i) {
    auto& ti = p.transitions[static_cast<std::size_t>(i)];
    auto& oi = p.outputs[static_cast<std::size_t>(i)];
    ti.resize(static_cast<std::size_t>(n));
    oi.resize(static_cast<std::size_t>(n));
    Vec x = sb.origin();
    std::int64_t idx = 0;
    do {
      Vec y = x;
      ++y[static_cast<std::size_t>(i)];
      Vec fy = f.eval(y);
      Vec fx = f.eval(x);
      Vec delta(static_cast<std::size_t>(f.outputs));
      for (int j = 0; j < f.outputs; ++j)
        delta[static_cast<std::size_t>(j)] =
            fy[static_cast<std::size_t>(j)] - fx[static_cast<std::size_t>(j)];
      if (y[static_cast<std::size_t>(i)] >= dims[static_cast<std::size_t>(i)])
        y[static_cast<std::size_t>(i)] -=
            f.periods[static_cast<std::size_t>(i)];
      ti[static_cast<std::size_t>(idx)] = static_cast<int>(sb.index(y));
      oi[static_cast<std::size_t>(idx)] = std::move(delta);
      ++idx;
    } while (sb.next(x));
  }
  return p;
}

}  // namespace abforge
