#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace abforge {

using Vec = std::vector<std::int64_t>;

inline constexpr std::int64_t kMaxBoxEntries = 10'000'000;

// Dense row-major index space over [0, dims_i) per coordinate; the first
// coordinate varies slowest.
struct Box {
  Vec dims;

  Box() = default;
  explicit Box(Vec d) : dims(std::move(d)) {}

  std::int64_t size() const {
    std::int64_t n = 1;
    for (auto d : dims) {
      if (d <= 0) return 0;
      if (n > kMaxBoxEntries / d + 1) return kMaxBoxEntries + 1;
      n *= d;
    }
    return n;
  }

  std::int64_t index(const Vec& x) const {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) idx = idx * dims[i] + x[i];
    return idx;
  }

  bool contains(const Vec& x) const {
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (x[i] < 0 || x[i] >= dims[i]) return false;
    return true;
  }

  // Lexicographic successor; returns false after the last point.
  bool next(Vec& x) const {
    for (std::size_t i = dims.size(); i-- > 0;) {
      if (++x[i] < dims[i]) return true;
      x[i] = 0;
    }
    return false;
  }

  Vec origin() const { return Vec(dims.size(), 0); }
};

inline Box checked_box(Vec dims, const char* what) {
  Box b(std::move(dims));
  if (b.size() > kMaxBoxEntries)
    throw std::length_error(std::string(what) +
                            ": table box exceeds entry limit");
  return b;
}

}  // namespace abforge
