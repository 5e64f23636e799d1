#pragma once

// Deterministic random families used by the acceptance suite: ZILP functions
// with small shared moduli, bounded step functions, eventually periodic
// functions with mild layer counts, and small abelian processors.

#include <algorithm>
#include <cstdint>
#include <optional>

#include "abforge/processor.hpp"
#include "abforge/synth.hpp"
#include "abforge/zilep.hpp"

namespace gen {

using abforge::AbelianProcessor;
using abforge::LayerProfile;
using abforge::Rational;
using abforge::Vec;
using abforge::ZilepFunction;

struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::int64_t below(std::int64_t n) {
    return static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(n));
  }
};

// Sum of floor((p.x + q)/mu) terms plus a sparse integer-linear part, all
// terms sharing one modulus so every minimal period divides mu <= 5.
inline ZilepFunction random_zilp(Rng& rng, int k) {
  while (true) {
    std::int64_t mu = 2 + rng.below(4);
    int terms = 1 + static_cast<int>(rng.below(2));
    std::vector<Vec> p(static_cast<std::size_t>(terms),
                       Vec(static_cast<std::size_t>(k), 0));
    Vec q(static_cast<std::size_t>(terms), 0);
    for (int t = 0; t < terms; ++t) {
      for (int i = 0; i < k; ++i)
        p[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] =
            rng.below(k >= 3 ? 2 : 3);
      q[static_cast<std::size_t>(t)] = rng.below(mu);
    }
    Vec lin(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i)
      if (rng.below(4) == 0) lin[static_cast<std::size_t>(i)] = 1;
    auto fn = [&](const Vec& x) {
      std::int64_t v = 0;
      for (int t = 0; t < terms; ++t) {
        std::int64_t num = q[static_cast<std::size_t>(t)];
        for (int i = 0; i < k; ++i)
          num += p[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] *
                 x[static_cast<std::size_t>(i)];
        v += num / mu;
      }
      for (int i = 0; i < k; ++i)
        v += lin[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      return v;
    };
    ZilepFunction f = abforge::tabulate1(
        k, fn, Vec(static_cast<std::size_t>(k), mu),
        Vec(static_cast<std::size_t>(k), 0));
    if (abforge::is_identically_zero(f)) continue;
    return f;
  }
}

// Weighted sums of box indicators: range bounded by 4, margins at most 4.
inline ZilepFunction random_bounded(Rng& rng, int k) {
  while (true) {
    int terms = 1 + static_cast<int>(rng.below(3));
    std::vector<Vec> corner;
    Vec weight;
    std::int64_t total = 0;
    for (int t = 0; t < terms; ++t) {
      Vec m(static_cast<std::size_t>(k), 0);
      std::int64_t sum = 0;
      for (int i = 0; i < k; ++i) {
        m[static_cast<std::size_t>(i)] = rng.below(5);
        sum += m[static_cast<std::size_t>(i)];
      }
      if (sum == 0) m[static_cast<std::size_t>(rng.below(k))] = 1;
      std::int64_t w = 1 + rng.below(2);
      if (total + w > 4) w = 1;
      if (total + w > 4) break;
      corner.push_back(m);
      weight.push_back(w);
      total += w;
    }
    if (corner.empty()) continue;
    Vec margins(static_cast<std::size_t>(k), 0);
    for (const auto& m : corner)
      for (int i = 0; i < k; ++i)
        margins[static_cast<std::size_t>(i)] = std::max(
            margins[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(i)]);
    auto fn = [&](const Vec& x) {
      std::int64_t v = 0;
      for (std::size_t t = 0; t < corner.size(); ++t) {
        bool ge = true;
        for (int i = 0; i < k; ++i)
          if (x[static_cast<std::size_t>(i)] <
              corner[t][static_cast<std::size_t>(i)])
            ge = false;
        if (ge) v += weight[t];
      }
      return v;
    };
    return abforge::tabulate1(k, fn,
                              Vec(static_cast<std::size_t>(k), 1), margins);
  }
}

// Layer count the general pass will pick for the last coordinate.
inline std::int64_t planned_layers(const ZilepFunction& f) {
  LayerProfile p = abforge::layer_profile(f, f.arity - 1);
  if (p.roughness == 0) return 0;
  if (p.slope.is_zero()) return p.margin;
  std::int64_t wl = p.roughness * p.period;
  std::int64_t r = std::max<std::int64_t>(p.margin, 1);
  return ((r + wl - 1) / wl) * wl;
}

// Eventually periodic functions of one or two variables: a recurrent core on
// shifted arguments plus bounded bumps. Periods <= 4, margins <= 4; draws
// whose interleave would need more than three layers are redrawn so desk-
// scale synthesis stays small.
inline ZilepFunction random_general(Rng& rng) {
  while (true) {
    int k = rng.below(4) == 0 ? 1 : 2;
    std::int64_t mu = 2 + rng.below(3);
    Vec pcoef(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) pcoef[static_cast<std::size_t>(i)] = rng.below(3);
    std::int64_t q0 = rng.below(mu);
    Vec lin(static_cast<std::size_t>(k), 0);
    if (rng.below(3) == 0) lin[static_cast<std::size_t>(rng.below(k))] = 1;
    Vec shift(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) shift[static_cast<std::size_t>(i)] = rng.below(4);
    int bumps = static_cast<int>(rng.below(3));
    std::vector<Vec> corner;
    for (int t = 0; t < bumps; ++t) {
      Vec m(static_cast<std::size_t>(k), 0);
      std::int64_t sum = 0;
      for (int i = 0; i < k; ++i) {
        m[static_cast<std::size_t>(i)] = rng.below(5);
        sum += m[static_cast<std::size_t>(i)];
      }
      if (sum > 0) corner.push_back(m);
    }
    auto fn = [&](const Vec& x) {
      std::int64_t num = q0;
      std::int64_t v = 0;
      for (int i = 0; i < k; ++i) {
        std::int64_t xi = std::max<std::int64_t>(
            x[static_cast<std::size_t>(i)] - shift[static_cast<std::size_t>(i)],
            0);
        num += pcoef[static_cast<std::size_t>(i)] * xi;
        v += lin[static_cast<std::size_t>(i)] * xi;
      }
      v += num / mu;
      for (const auto& m : corner) {
        bool ge = true;
        for (int i = 0; i < k; ++i)
          if (x[static_cast<std::size_t>(i)] < m[static_cast<std::size_t>(i)])
            ge = false;
        if (ge) ++v;
      }
      return v;
    };
    Vec margins(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      margins[static_cast<std::size_t>(i)] = shift[static_cast<std::size_t>(i)];
      for (const auto& m : corner)
        margins[static_cast<std::size_t>(i)] =
            std::max(margins[static_cast<std::size_t>(i)],
                     m[static_cast<std::size_t>(i)]);
    }
    ZilepFunction f;
    try {
      f = abforge::tabulate1(k, fn, Vec(static_cast<std::size_t>(k), mu),
                             margins);
    } catch (const std::exception&) {
      continue;
    }
    if (abforge::is_identically_zero(f)) continue;
    bool ok = true;
    for (int i = 0; i < k; ++i) {
      if (f.periods[static_cast<std::size_t>(i)] > 4 ||
          f.margins[static_cast<std::size_t>(i)] > 4)
        ok = false;
    }
    if (!ok) continue;
    if (k == 2) {
      std::int64_t n = planned_layers(f);
      if (n > 3) continue;
      LayerProfile p = abforge::layer_profile(f, 1);
      std::int64_t slices =
          p.slope.is_zero()
              ? p.roughness
              : (p.slope * Rational(n)).num().to_i64();
      if (slices > 6) continue;
    }
    return f;
  }
}

// Small abelian processors: random unary automata (always abelian), direct
// products of two unary automata, and canonical processors of tiny binary
// functions. At most eight states, at most two letters.
inline AbelianProcessor random_processor(Rng& rng) {
  while (true) {
    int kind = static_cast<int>(rng.below(3));
    if (kind == 0) {
      int n = 1 + static_cast<int>(rng.below(8));
      int l = 1 + static_cast<int>(rng.below(2));
      AbelianProcessor p;
      p.letters_in = {"a0"};
      for (int j = 0; j < l; ++j)
        p.letters_out.push_back("b" + std::to_string(j));
      std::vector<int> t(static_cast<std::size_t>(n));
      std::vector<Vec> o(static_cast<std::size_t>(n));
      for (int s = 0; s < n; ++s) {
        t[static_cast<std::size_t>(s)] = static_cast<int>(rng.below(n));
        Vec ov(static_cast<std::size_t>(l));
        for (int j = 0; j < l; ++j)
          ov[static_cast<std::size_t>(j)] = rng.below(3);
        o[static_cast<std::size_t>(s)] = std::move(ov);
      }
      // restrict to the part reachable from state 0
      std::vector<int> remap(static_cast<std::size_t>(n), -1);
      std::vector<int> order{0};
      remap[0] = 0;
      for (std::size_t h = 0; h < order.size(); ++h) {
        int w = t[static_cast<std::size_t>(order[h])];
        if (remap[static_cast<std::size_t>(w)] == -1) {
          remap[static_cast<std::size_t>(w)] = static_cast<int>(order.size());
          order.push_back(w);
        }
      }
      for (int s : order) p.states.push_back("q" + std::to_string(s));
      p.initial = 0;
      p.transitions.resize(1);
      p.outputs.resize(1);
      for (int s : order) {
        p.transitions[0].push_back(remap[static_cast<std::size_t>(
            t[static_cast<std::size_t>(s)])]);
        p.outputs[0].push_back(o[static_cast<std::size_t>(s)]);
      }
      return p;
    }
    if (kind == 1) {
      int n1 = 1 + static_cast<int>(rng.below(3));
      int n2 = 1 + static_cast<int>(rng.below(2));
      AbelianProcessor p;
      p.letters_in = {"a0", "a1"};
      p.letters_out = {"b0"};
      for (int s1 = 0; s1 < n1; ++s1)
        for (int s2 = 0; s2 < n2; ++s2)
          p.states.push_back(std::to_string(s1) + "." + std::to_string(s2));
      p.initial = 0;
      std::vector<int> t1(static_cast<std::size_t>(n1)),
          t2(static_cast<std::size_t>(n2));
      Vec o1(static_cast<std::size_t>(n1)), o2(static_cast<std::size_t>(n2));
      for (int s = 0; s < n1; ++s) {
        t1[static_cast<std::size_t>(s)] = static_cast<int>(rng.below(n1));
        o1[static_cast<std::size_t>(s)] = rng.below(3);
      }
      for (int s = 0; s < n2; ++s) {
        t2[static_cast<std::size_t>(s)] = static_cast<int>(rng.below(n2));
        o2[static_cast<std::size_t>(s)] = rng.below(3);
      }
      p.transitions.assign(2, {});
      p.outputs.assign(2, {});
      for (int s1 = 0; s1 < n1; ++s1)
        for (int s2 = 0; s2 < n2; ++s2) {
          p.transitions[0].push_back(t1[static_cast<std::size_t>(s1)] * n2 + s2);
          p.transitions[1].push_back(s1 * n2 + t2[static_cast<std::size_t>(s2)]);
          p.outputs[0].push_back(Vec{o1[static_cast<std::size_t>(s1)]});
          p.outputs[1].push_back(Vec{o2[static_cast<std::size_t>(s2)]});
        }
      // drop unreachable product states by accessibility cleanup
      AbelianProcessor q = p;
      std::vector<int> remap(p.states.size(), -1);
      std::vector<int> order{p.initial};
      remap[static_cast<std::size_t>(p.initial)] = 0;
      for (std::size_t h = 0; h < order.size(); ++h)
        for (int letter = 0; letter < 2; ++letter) {
          int w = p.transitions[static_cast<std::size_t>(letter)]
                               [static_cast<std::size_t>(order[h])];
          if (remap[static_cast<std::size_t>(w)] == -1) {
            remap[static_cast<std::size_t>(w)] = static_cast<int>(order.size());
            order.push_back(w);
          }
        }
      q.states.clear();
      q.transitions.assign(2, {});
      q.outputs.assign(2, {});
      q.initial = 0;
      for (int s : order) {
        q.states.push_back(p.states[static_cast<std::size_t>(s)]);
        for (int letter = 0; letter < 2; ++letter) {
          q.transitions[static_cast<std::size_t>(letter)].push_back(
              remap[static_cast<std::size_t>(
                  p.transitions[static_cast<std::size_t>(letter)]
                               [static_cast<std::size_t>(s)])]);
          q.outputs[static_cast<std::size_t>(letter)].push_back(
              p.outputs[static_cast<std::size_t>(letter)]
                       [static_cast<std::size_t>(s)]);
        }
      }
      return q;
    }
    // canonical processor of a small binary function
    std::int64_t mu = 2 + rng.below(2);
    std::int64_t pa = rng.below(3), pb = rng.below(3), qq = rng.below(mu);
    if (pa + pb == 0) continue;
    ZilepFunction f = abforge::tabulate1(
        2,
        [&](const Vec& x) { return (pa * x[0] + pb * x[1] + qq) / mu; },
        {mu, mu}, {0, 0});
    std::int64_t states = 1;
    for (int i = 0; i < 2; ++i)
      states *= f.margins[static_cast<std::size_t>(i)] +
                f.periods[static_cast<std::size_t>(i)];
    if (states > 8) continue;
    return abforge::zilep_to_processor(f);
  }
}

}  // namespace gen
