#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "abforge/box.hpp"
#include "abforge/zilep.hpp"

namespace abforge {

inline std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}
inline std::int64_t floormod(std::int64_t a, std::int64_t b) {
  return a - floordiv(a, b) * b;
}

// A ZILP stand-in for the n-ary minimum: increasing, adds n under a shift by
// n^2 along any coordinate, and equal to min on points of spread at most n-1.
// Values come from a partially defined seed function on shifted copies of the
// diagonal slab K = [0,n-1]^n \ [1,n-1]^n, completed by a running maximum
// over the downward cone.
class PseudoMin {
 public:
  explicit PseudoMin(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("pseudo-min arity must be >= 1");
  }

  int arity() const { return n_; }

  // Seed value: defined iff x lies in K + n^2 u + s 1 for some integer vector
  // u and integer s; then the value n*sum(u) + s is independent of the
  // representation, which is asserted.
  std::optional<std::int64_t> seed(const Vec& x) const {
    const std::int64_t nn = static_cast<std::int64_t>(n_) * n_;
    std::optional<std::int64_t> found;
    for (int j = 0; j < n_; ++j) {
      // a representation puts coordinate j on the slab floor: s == x_j mod n^2
      std::int64_t s = x[static_cast<std::size_t>(j)];
      bool ok = true;
      std::int64_t usum = 0;
      bool some_zero = false;
      for (int i = 0; i < n_ && ok; ++i) {
        std::int64_t w = x[static_cast<std::size_t>(i)] - s;
        std::int64_t v = floormod(w, nn);
        if (v > n_ - 1) {
          ok = false;
          break;
        }
        if (v == 0) some_zero = true;
        usum += (w - v) / nn;
      }
      if (!ok || !some_zero) continue;
      std::int64_t value = n_ * usum + s;
      if (found && *found != value)
        throw std::logic_error("pseudo-min seed is not well defined");
      found = value;
    }
    return found;
  }

  std::int64_t eval(const Vec& x) const {
    if (static_cast<int>(x.size()) != n_)
      throw std::invalid_argument("pseudo-min: arity mismatch");
    if (n_ == 1) return x[0];
    if (n_ == 2) return floordiv(x[0] + x[1], 2);
    return eval_general(x);
  }

  // The seed+fill construction without the small-arity closed forms; the
  // closed forms are valid pseudo-minima in their own right but differ
  // pointwise from this one.
  std::int64_t eval_general(const Vec& x) const {
    const std::int64_t nn = static_cast<std::int64_t>(n_) * n_;
    Vec red = x;
    std::int64_t offset = 0;
    for (int i = 0; i < n_; ++i) {
      std::int64_t q = floordiv(red[static_cast<std::size_t>(i)], nn);
      red[static_cast<std::size_t>(i)] -= q * nn;
      offset += n_ * q;
    }
    ensure_table();
    Vec idx(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
      idx[static_cast<std::size_t>(i)] = red[static_cast<std::size_t>(i)] + pad_;
    return offset + table_[static_cast<std::size_t>(tbox_.index(idx))];
  }

 private:
  int n_;
  mutable std::mutex mu_;
  mutable Box tbox_;
  mutable std::vector<std::int32_t> table_;
  mutable std::int64_t pad_ = 0;

  // Fills M on [-pad, n^2-1]^n by the cone-maximum recurrence
  // M(x) = max(seed(x), max_j M(x - e_j)); the pad is wide enough that every
  // maximizer for a fundamental-domain point lies inside the scratch box.
  void ensure_table() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!table_.empty()) return;
    const std::int64_t nn = static_cast<std::int64_t>(n_) * n_;
    pad_ = 2 * nn + n_;
    const std::int64_t side = pad_ + nn;
    Vec dims(static_cast<std::size_t>(n_), side);
    tbox_ = checked_box(dims, "pseudo-min");
    const std::int64_t total = tbox_.size();
    table_.assign(static_cast<std::size_t>(total), 0);
    constexpr std::int32_t kNone = INT32_MIN / 2;
    Vec x = tbox_.origin();
    std::int64_t p = 0;
    Vec pt(static_cast<std::size_t>(n_));
    Vec stride(static_cast<std::size_t>(n_), 1);
    for (int i = n_ - 2; i >= 0; --i)
      stride[static_cast<std::size_t>(i)] =
          stride[static_cast<std::size_t>(i + 1)] * side;
    do {
      for (int i = 0; i < n_; ++i)
        pt[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - pad_;
      std::int64_t best = kNone;
      if (auto s = seed(pt)) best = *s;
      for (int i = 0; i < n_; ++i)
        if (x[static_cast<std::size_t>(i)] > 0)
          best = std::max(
              best, static_cast<std::int64_t>(
                        table_[static_cast<std::size_t>(
                            p - stride[static_cast<std::size_t>(i)])]));
      table_[static_cast<std::size_t>(p)] = static_cast<std::int32_t>(best);
      ++p;
    } while (tbox_.next(x));
  }
};

namespace detail {

inline const PseudoMin& pseudo_min_instance(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<PseudoMin>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[n];
  if (!slot) slot = std::make_unique<PseudoMin>(n);
  return *slot;
}

}  // namespace detail

inline std::optional<std::int64_t> mhat(int n, const Vec& x) {
  return detail::pseudo_min_instance(n).seed(x);
}

inline std::int64_t eval_M(int n, const Vec& x) {
  return detail::pseudo_min_instance(n).eval(x);
}

inline std::int64_t eval_M_general(int n, const Vec& x) {
  return detail::pseudo_min_instance(n).eval_general(x);
}

// Packages v -> M(v + u) as a ZILP function: periods n^2, slopes 1/n.
// Requires M(u) = 0 so that the function maps zero to zero.
inline ZilepFunction pseudomin_zilep(int n, const Vec& u) {
  if (static_cast<int>(u.size()) != n)
    throw std::invalid_argument("pseudomin_zilep: offset arity mismatch");
  if (eval_M(n, u) != 0)
    throw std::invalid_argument("pseudomin_zilep: offset must satisfy M(u)=0");
  const std::int64_t nn = static_cast<std::int64_t>(n) * n;
  Vec periods(static_cast<std::size_t>(n), nn);
  Vec margins(static_cast<std::size_t>(n), 0);
  std::vector<Rational> coeffs(static_cast<std::size_t>(n), Rational(1, n));
  Box b = checked_box(Vec(static_cast<std::size_t>(n), nn + 1),
                      "pseudomin_zilep");
  std::vector<std::int64_t> table;
  table.reserve(static_cast<std::size_t>(b.size()));
  Vec v = b.origin();
  do {
    Vec shifted(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      shifted[static_cast<std::size_t>(i)] =
          v[static_cast<std::size_t>(i)] + u[static_cast<std::size_t>(i)];
    table.push_back(eval_M(n, shifted));
  } while (b.next(v));
  return make_zilep(n, 1, std::move(coeffs), std::move(periods),
                    std::move(margins), std::move(table));
}

}  // namespace abforge
