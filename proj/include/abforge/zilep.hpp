#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abforge/box.hpp"
#include "abforge/rational.hpp"

namespace abforge {

struct ZilepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An increasing function N^k -> N^l that is linear plus (eventually) periodic,
// stored exactly: rational linear part plus a dense value table over the box
// [0, margin_i + period_i] per coordinate. All margins zero means the
// function is linear plus periodic and computable by a recurrent processor.
struct ZilepFunction {
  int arity = 0;    // k
  int outputs = 0;  // l
  std::vector<Rational> coeffs;  // outputs x arity, row-major
  Vec periods;                   // per coordinate, >= 1
  Vec margins;                   // per coordinate, >= 0
  std::vector<std::int64_t> table;  // point-major over box(), then output index
  Vec quanta;                       // period_i * coeff(j,i), row-major

  Box box() const {
    Vec d(static_cast<std::size_t>(arity));
    for (int i = 0; i < arity; ++i)
      d[static_cast<std::size_t>(i)] =
          margins[static_cast<std::size_t>(i)] +
          periods[static_cast<std::size_t>(i)] + 1;
    return Box(std::move(d));
  }

  const Rational& coeff(int j, int i) const {
    return coeffs[static_cast<std::size_t>(j * arity + i)];
  }
  std::int64_t quantum(int j, int i) const {
    return quanta[static_cast<std::size_t>(j * arity + i)];
  }

  bool is_zilp() const {
    for (auto r : margins)
      if (r != 0) return false;
    return true;
  }

  // Exact evaluation anywhere in N^k: coordinates beyond the box are pulled
  // back by whole periods, each step adding one quantum.
  Vec eval(const Vec& x) const {
    if (static_cast<int>(x.size()) != arity)
      throw ZilepError("eval: argument arity mismatch");
    Vec reduced = x;
    Vec out(static_cast<std::size_t>(outputs), 0);
    for (int i = 0; i < arity; ++i) {
      auto ii = static_cast<std::size_t>(i);
      if (x[ii] < 0) throw ZilepError("eval: negative coordinate");
      std::int64_t hi = margins[ii] + periods[ii];
      if (reduced[ii] > hi) {
        std::int64_t steps = (reduced[ii] - hi + periods[ii] - 1) / periods[ii];
        reduced[ii] -= steps * periods[ii];
        for (int j = 0; j < outputs; ++j)
          out[static_cast<std::size_t>(j)] += steps * quantum(j, i);
      }
    }
    Box b = box();
    std::int64_t base = b.index(reduced) * outputs;
    for (int j = 0; j < outputs; ++j)
      out[static_cast<std::size_t>(j)] +=
          table[static_cast<std::size_t>(base + j)];
    return out;
  }

  std::int64_t eval1(const Vec& x) const {
    if (outputs != 1) throw ZilepError("eval1: function is not unary-output");
    return eval(x)[0];
  }

  ZilepFunction component(int j) const {
    ZilepFunction f;
    f.arity = arity;
    f.outputs = 1;
    f.periods = periods;
    f.margins = margins;
    f.coeffs.assign(coeffs.begin() + j * arity,
                    coeffs.begin() + (j + 1) * arity);
    f.quanta.assign(quanta.begin() + j * arity,
                    quanta.begin() + (j + 1) * arity);
    std::int64_t n = box().size();
    f.table.resize(static_cast<std::size_t>(n));
    for (std::int64_t p = 0; p < n; ++p)
      f.table[static_cast<std::size_t>(p)] =
          table[static_cast<std::size_t>(p * outputs + j)];
    return f;
  }
};

namespace detail {

inline void check_shape(const ZilepFunction& f) {
  if (f.arity < 1 || f.outputs < 1)
    throw ZilepError("zilep: arity and output count must be positive");
  auto k = static_cast<std::size_t>(f.arity);
  auto l = static_cast<std::size_t>(f.outputs);
  if (f.periods.size() != k || f.margins.size() != k ||
      f.coeffs.size() != k * l || f.quanta.size() != k * l)
    throw ZilepError("zilep: field sizes inconsistent with arity/outputs");
  for (std::size_t i = 0; i < k; ++i) {
    if (f.periods[i] < 1) throw ZilepError("zilep: period must be >= 1");
    if (f.margins[i] < 0) throw ZilepError("zilep: margin must be >= 0");
  }
}

}  // namespace detail

// Checks every structural invariant: f(0)=0, weak monotonicity along each
// axis, integrality of period*coefficient, and the periodic extension rule on
// the last in-box row of each coordinate.
inline void validate(const ZilepFunction& f) {
  detail::check_shape(f);
  Box b = f.box();
  std::int64_t n = b.size();
  if (n > kMaxBoxEntries) throw std::length_error("zilep: table box too big");
  if (f.table.size() != static_cast<std::size_t>(n * f.outputs))
    throw ZilepError("zilep: table size does not match box");
  for (int j = 0; j < f.outputs; ++j) {
    if (f.table[static_cast<std::size_t>(j)] != 0)
      throw ZilepError("zilep: f(0) must be 0");
    for (int i = 0; i < f.arity; ++i) {
      if (Rational(f.quantum(j, i)) !=
          f.coeff(j, i) * Rational(f.periods[static_cast<std::size_t>(i)]))
        throw ZilepError("zilep: period*coeff is not the stored quantum");
      if (f.quantum(j, i) < 0) throw ZilepError("zilep: negative quantum");
    }
  }
  // strides for single-coordinate steps
  Vec stride(static_cast<std::size_t>(f.arity), 1);
  for (int i = f.arity - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] *
        b.dims[static_cast<std::size_t>(i + 1)];
  Vec x = b.origin();
  std::int64_t p = 0;
  do {
    for (int i = 0; i < f.arity; ++i) {
      auto ii = static_cast<std::size_t>(i);
      if (x[ii] + 1 < b.dims[ii]) {
        std::int64_t q = p + stride[ii];
        for (int j = 0; j < f.outputs; ++j)
          if (f.table[static_cast<std::size_t>(q * f.outputs + j)] <
              f.table[static_cast<std::size_t>(p * f.outputs + j)])
            throw ZilepError("zilep: table not weakly increasing");
      }
      if (x[ii] == f.margins[ii]) {
        std::int64_t q = p + stride[ii] * f.periods[ii];
        for (int j = 0; j < f.outputs; ++j)
          if (f.table[static_cast<std::size_t>(q * f.outputs + j)] !=
              f.table[static_cast<std::size_t>(p * f.outputs + j)] +
                  f.quantum(j, i))
            throw ZilepError("zilep: periodic extension inconsistent");
      }
    }
    ++p;
  } while (b.next(x));
}

inline ZilepFunction make_zilep(int arity, int outputs,
                                std::vector<Rational> coeffs, Vec periods,
                                Vec margins, std::vector<std::int64_t> table) {
  ZilepFunction f;
  f.arity = arity;
  f.outputs = outputs;
  f.coeffs = std::move(coeffs);
  f.periods = std::move(periods);
  f.margins = std::move(margins);
  f.table = std::move(table);
  f.quanta.resize(f.coeffs.size());
  for (int j = 0; j < outputs; ++j)
    for (int i = 0; i < arity; ++i) {
      Rational q = f.coeffs[static_cast<std::size_t>(j * arity + i)] *
                   Rational(f.periods[static_cast<std::size_t>(i)]);
      if (!q.is_integer())
        throw ZilepError("zilep: period*coeff must be an integer");
      f.quanta[static_cast<std::size_t>(j * arity + i)] = q.num().to_i64();
    }
  validate(f);
  return f;
}

using PointFn = std::function<Vec(const Vec&)>;

// Builds a ZilepFunction from an evaluator together with periods/margins that
// are KNOWN to be valid for it. Margins are minimized first, then periods,
// each by scanning one full period's worth of representatives; the final
// table covers the minimized box. Throws if the stated parameters are not
// actually valid for the evaluator.
inline ZilepFunction tabulate(int arity, int outputs, const PointFn& fn,
                              const Vec& apriori_periods,
                              const Vec& apriori_margins) {
  auto k = static_cast<std::size_t>(arity);
  // evaluation cache over [0, R_i + 2*Lam_i]
  Vec cache_dims(k);
  for (std::size_t i = 0; i < k; ++i)
    cache_dims[i] = apriori_margins[i] + 2 * apriori_periods[i] + 1;
  Box cb = checked_box(cache_dims, "tabulate");
  std::vector<std::int64_t> cache(
      static_cast<std::size_t>(cb.size() * outputs));
  {
    Vec x = cb.origin();
    std::int64_t p = 0;
    do {
      Vec v = fn(x);
      if (static_cast<int>(v.size()) != outputs)
        throw ZilepError("tabulate: evaluator output arity mismatch");
      for (int j = 0; j < outputs; ++j)
        cache[static_cast<std::size_t>(p * outputs + j)] =
            v[static_cast<std::size_t>(j)];
      ++p;
    } while (cb.next(x));
  }
  auto at = [&](const Vec& x, int j) {
    return cache[static_cast<std::size_t>(cb.index(x) * outputs + j)];
  };

  // a-priori quanta along each axis, measured at the margin point
  std::vector<std::int64_t> aq(k * static_cast<std::size_t>(outputs));
  for (std::size_t i = 0; i < k; ++i) {
    Vec lo(k, 0), hi(k, 0);
    lo[i] = apriori_margins[i];
    hi[i] = apriori_margins[i] + apriori_periods[i];
    for (int j = 0; j < outputs; ++j)
      aq[static_cast<std::size_t>(j) * k + i] = at(hi, j) - at(lo, j);
  }

  Vec margins(k, 0), periods(k, 1);
  for (std::size_t i = 0; i < k; ++i) {
    const std::int64_t Lam = apriori_periods[i];
    const std::int64_t R = apriori_margins[i];
    // scan representatives: x_j in [0, R_j + Lam_j), x_i in [0, R + Lam)
    Vec scan_dims(k);
    for (std::size_t j = 0; j < k; ++j)
      scan_dims[j] = apriori_margins[j] + apriori_periods[j];
    Box sb(scan_dims);
    // minimal margin for the stated period
    std::int64_t min_margin = 0;
    {
      Vec x = sb.origin();
      do {
        Vec y = x;
        y[i] += Lam;
        for (int j = 0; j < outputs; ++j)
          if (at(y, j) - at(x, j) != aq[static_cast<std::size_t>(j) * k + i]) {
            if (x[i] >= R)
              throw ZilepError(
                  "tabulate: stated period/margin do not hold for evaluator");
            min_margin = std::max(min_margin, x[i] + 1);
          }
      } while (sb.next(x));
    }
    margins[i] = min_margin;
    // minimal period at that margin; the shift must be an integer multiple
    // of the slope, so candidate lambdas are filtered by divisibility
    for (std::int64_t lam = 1; lam <= Lam; ++lam) {
      bool divisible = true;
      for (int j = 0; j < outputs; ++j)
        if ((aq[static_cast<std::size_t>(j) * k + i] * lam) % Lam != 0)
          divisible = false;
      if (!divisible) continue;
      bool ok = true;
      Vec x = sb.origin();
      x[i] = min_margin;
      Box pb(scan_dims);
      pb.dims[i] = 1;  // drive coordinate i manually
      Vec rest = pb.origin();
      do {
        for (std::size_t j = 0; j < k; ++j)
          if (j != i) x[j] = rest[j];
        for (std::int64_t xi = min_margin; ok && xi < min_margin + Lam; ++xi) {
          x[i] = xi;
          Vec y = x;
          y[i] += lam;
          for (int j = 0; j < outputs; ++j)
            if (at(y, j) - at(x, j) !=
                (aq[static_cast<std::size_t>(j) * k + i] * lam) / Lam) {
              ok = false;
              break;
            }
        }
        if (!ok) break;
      } while (pb.next(rest));
      if (ok) {
        periods[i] = lam;
        break;
      }
    }
  }

  std::vector<Rational> coeffs(static_cast<std::size_t>(outputs) * k);
  for (int j = 0; j < outputs; ++j)
    for (std::size_t i = 0; i < k; ++i)
      coeffs[static_cast<std::size_t>(j) * k + i] =
          Rational(aq[static_cast<std::size_t>(j) * k + i], apriori_periods[i]);

  Vec tdims(k);
  for (std::size_t i = 0; i < k; ++i) tdims[i] = margins[i] + periods[i] + 1;
  Box tb = checked_box(tdims, "tabulate");
  std::vector<std::int64_t> table(
      static_cast<std::size_t>(tb.size() * outputs));
  {
    Vec x = tb.origin();
    std::int64_t p = 0;
    do {
      for (int j = 0; j < outputs; ++j)
        table[static_cast<std::size_t>(p * outputs + j)] = at(x, j);
      ++p;
    } while (tb.next(x));
  }
  return make_zilep(arity, outputs, std::move(coeffs), std::move(periods),
                    std::move(margins), std::move(table));
}

inline ZilepFunction tabulate1(int arity,
                               const std::function<std::int64_t(const Vec&)>& fn,
                               const Vec& apriori_periods,
                               const Vec& apriori_margins) {
  return tabulate(
      arity, 1, [&fn](const Vec& x) { return Vec{fn(x)}; }, apriori_periods,
      apriori_margins);
}

// Re-tabulates f at the given (coarser) parameters. new_periods must be
// multiples of f's periods, new_margins at least f's margins.
inline ZilepFunction normalize_to(const ZilepFunction& f, const Vec& new_periods,
                                  const Vec& new_margins) {
  for (int i = 0; i < f.arity; ++i) {
    auto ii = static_cast<std::size_t>(i);
    if (new_periods[ii] % f.periods[ii] != 0 ||
        new_margins[ii] < f.margins[ii])
      throw ZilepError("normalize: parameters not refinable");
  }
  Vec dims(static_cast<std::size_t>(f.arity));
  for (int i = 0; i < f.arity; ++i)
    dims[static_cast<std::size_t>(i)] =
        new_margins[static_cast<std::size_t>(i)] +
        new_periods[static_cast<std::size_t>(i)] + 1;
  Box b = checked_box(dims, "normalize");
  std::vector<std::int64_t> table;
  table.reserve(static_cast<std::size_t>(b.size() * f.outputs));
  Vec x = b.origin();
  do {
    Vec v = f.eval(x);
    table.insert(table.end(), v.begin(), v.end());
  } while (b.next(x));
  std::vector<Rational> coeffs = f.coeffs;
  return make_zilep(f.arity, f.outputs, std::move(coeffs), new_periods,
                    new_margins, std::move(table));
}

// Decides extensional equality by normalizing both sides to common
// parameters; the linear + eventually-periodic decomposition is unique, so
// coefficients and tables must match exactly.
inline bool zilep_equal(const ZilepFunction& f, const ZilepFunction& g) {
  if (f.arity != g.arity || f.outputs != g.outputs) return false;
  if (f.coeffs != g.coeffs) return false;
  Vec periods(static_cast<std::size_t>(f.arity)),
      margins(static_cast<std::size_t>(f.arity));
  for (int i = 0; i < f.arity; ++i) {
    auto ii = static_cast<std::size_t>(i);
    periods[ii] = std::lcm(f.periods[ii], g.periods[ii]);
    margins[ii] = std::max(f.margins[ii], g.margins[ii]);
  }
  ZilepFunction fn = normalize_to(f, periods, margins);
  ZilepFunction gn = normalize_to(g, periods, margins);
  return fn.table == gn.table;
}

// A coordinate is degenerate when the function provably ignores it: zero
// slope and a table constant along the axis. Zero slope alone is not enough
// for functions with margins.
inline bool is_degenerate_coord(const ZilepFunction& f, int coord) {
  for (int j = 0; j < f.outputs; ++j)
    if (!f.coeff(j, coord).is_zero()) return false;
  Box b = f.box();
  Vec x = b.origin();
  do {
    if (x[static_cast<std::size_t>(coord)] == 0) continue;
    Vec y = x;
    y[static_cast<std::size_t>(coord)] = 0;
    std::int64_t px = b.index(x) * f.outputs;
    std::int64_t py = b.index(y) * f.outputs;
    for (int j = 0; j < f.outputs; ++j)
      if (f.table[static_cast<std::size_t>(px + j)] !=
          f.table[static_cast<std::size_t>(py + j)])
        return false;
  } while (b.next(x));
  return true;
}

inline ZilepFunction drop_coord(const ZilepFunction& f, int coord) {
  if (!is_degenerate_coord(f, coord))
    throw ZilepError("drop_coord: coordinate is not degenerate");
  if (f.arity == 1) throw ZilepError("drop_coord: cannot drop last coordinate");
  auto c = static_cast<std::size_t>(coord);
  ZilepFunction g;
  g.arity = f.arity - 1;
  g.outputs = f.outputs;
  g.periods = f.periods;
  g.margins = f.margins;
  g.periods.erase(g.periods.begin() + static_cast<std::ptrdiff_t>(c));
  g.margins.erase(g.margins.begin() + static_cast<std::ptrdiff_t>(c));
  for (int j = 0; j < f.outputs; ++j)
    for (int i = 0; i < f.arity; ++i)
      if (i != coord) {
        g.coeffs.push_back(f.coeff(j, i));
        g.quanta.push_back(f.quantum(j, i));
      }
  Box gb = g.box();
  Box fb = f.box();
  g.table.reserve(static_cast<std::size_t>(gb.size() * g.outputs));
  Vec y = gb.origin();
  do {
    Vec x(static_cast<std::size_t>(f.arity), 0);
    for (int i = 0, t = 0; i < f.arity; ++i)
      if (i != coord) x[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(t++)];
    std::int64_t p = fb.index(x) * f.outputs;
    for (int j = 0; j < f.outputs; ++j)
      g.table.push_back(f.table[static_cast<std::size_t>(p + j)]);
  } while (gb.next(y));
  validate(g);
  return g;
}

// Period, slope, margin, and roughness of a unary-output function with
// respect to one coordinate.
struct LayerProfile {
  int coord = 0;
  std::int64_t period = 1;   // L
  Rational slope;            // S
  std::int64_t margin = 0;   // R
  std::int64_t roughness = 0;  // W: max one-step increment along the axis
};

inline LayerProfile layer_profile(const ZilepFunction& f, int coord) {
  if (f.outputs != 1) throw ZilepError("layer_profile: unary output required");
  LayerProfile p;
  p.coord = coord;
  auto c = static_cast<std::size_t>(coord);
  p.period = f.periods[c];
  p.margin = f.margins[c];
  p.slope = f.coeff(0, coord);
  Box b = f.box();
  Vec x = b.origin();
  do {
    if (x[c] + 1 >= b.dims[c]) continue;
    bool rep = true;  // only class representatives matter
    for (int i = 0; i < f.arity; ++i) {
      auto ii = static_cast<std::size_t>(i);
      if (x[ii] >= f.margins[ii] + f.periods[ii]) rep = false;
    }
    if (!rep) continue;
    Vec y = x;
    ++y[c];
    p.roughness = std::max(
        p.roughness, f.table[static_cast<std::size_t>(b.index(y))] -
                         f.table[static_cast<std::size_t>(b.index(x))]);
  } while (b.next(x));
  return p;
}

// f(period_c * e_c) = 1, i.e. one output letter per full period along coord.
inline std::pair<bool, std::int64_t> is_meager(const ZilepFunction& f,
                                               int coord) {
  if (!f.is_zilp()) throw ZilepError("is_meager: function must be ZILP");
  if (f.outputs != 1) throw ZilepError("is_meager: unary output required");
  std::int64_t m = f.quantum(0, coord);
  return {m == 1, m};
}

inline std::pair<bool, std::int64_t> is_bounded(const ZilepFunction& f) {
  for (const auto& c : f.coeffs)
    if (!c.is_zero()) return {false, 0};
  std::int64_t j = 0;
  for (auto v : f.table) j = std::max(j, v);
  return {true, j};
}

inline bool is_identically_zero(const ZilepFunction& f) {
  auto [bounded, bound] = is_bounded(f);
  return bounded && bound == 0;
}

}  // namespace abforge
