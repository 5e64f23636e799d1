#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abforge {

// Arbitrary-precision signed integer, sign + little-endian 32-bit limbs.
// Magnitude vectors never carry trailing zero limbs; zero has sign 0 and an
// empty magnitude.
class BigInt {
 public:
  BigInt() = default;

  BigInt(long long v) {  // NOLINT: implicit by design
    if (v == 0) return;
    sign_ = v < 0 ? -1 : 1;
    unsigned long long m = v < 0 ? 0ULL - static_cast<unsigned long long>(v)
                                 : static_cast<unsigned long long>(v);
    while (m != 0) {
      mag_.push_back(static_cast<std::uint32_t>(m & 0xffffffffULL));
      m >>= 32;
    }
  }

  explicit BigInt(std::string_view s) {
    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    if (i == s.size()) throw std::invalid_argument("bigint: empty literal");
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9')
        throw std::invalid_argument("bigint: bad digit in literal");
      mul_small_inplace(10);
      add_small_inplace(static_cast<std::uint32_t>(s[i] - '0'));
    }
    sign_ = mag_.empty() ? 0 : (neg ? -1 : 1);
  }

  bool is_zero() const { return sign_ == 0; }
  int sign() const { return sign_; }
  bool is_negative() const { return sign_ < 0; }

  bool fits_i64() const {
    if (mag_.size() > 2) return false;
    unsigned long long m = mag_u64();
    if (sign_ >= 0) return m <= 0x7fffffffffffffffULL;
    return m <= 0x8000000000000000ULL;
  }
  long long to_i64() const {
    if (!fits_i64()) throw std::overflow_error("bigint: value exceeds int64");
    unsigned long long m = mag_u64();
    return sign_ < 0 ? -static_cast<long long>(m - 1) - 1
                     : static_cast<long long>(m);
  }

  friend BigInt operator-(const BigInt& a) {
    BigInt r = a;
    r.sign_ = -r.sign_;
    return r;
  }

  friend BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    BigInt r;
    if (a.sign_ == b.sign_) {
      r.mag_ = add_mag(a.mag_, b.mag_);
      r.sign_ = a.sign_;
    } else {
      int c = cmp_mag(a.mag_, b.mag_);
      if (c == 0) return BigInt();
      const BigInt& big = c > 0 ? a : b;
      const BigInt& small = c > 0 ? b : a;
      r.mag_ = sub_mag(big.mag_, small.mag_);
      r.sign_ = big.sign_;
    }
    return r;
  }
  friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

  friend BigInt operator*(const BigInt& a, const BigInt& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return BigInt();
    BigInt r;
    r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
    for (std::size_t i = 0; i < a.mag_.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < b.mag_.size(); ++j) {
        std::uint64_t cur = static_cast<std::uint64_t>(a.mag_[i]) * b.mag_[j] +
                            r.mag_[i + j] + carry;
        r.mag_[i + j] = static_cast<std::uint32_t>(cur);
        carry = cur >> 32;
      }
      r.mag_[i + b.mag_.size()] += static_cast<std::uint32_t>(carry);
    }
    trim(r.mag_);
    r.sign_ = a.sign_ * b.sign_;
    return r;
  }

  // Truncated division: quotient rounds toward zero, remainder keeps the
  // dividend's sign, |r| < |b|.
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    if (b.sign_ == 0) throw std::domain_error("bigint: division by zero");
    if (cmp_mag(a.mag_, b.mag_) < 0) {
      q = BigInt();
      r = a;
      return;
    }
    std::vector<std::uint32_t> qm, rm;
    divmod_mag(a.mag_, b.mag_, qm, rm);
    q.mag_ = std::move(qm);
    r.mag_ = std::move(rm);
    q.sign_ = q.mag_.empty() ? 0 : a.sign_ * b.sign_;
    r.sign_ = r.mag_.empty() ? 0 : a.sign_;
  }
  friend BigInt operator/(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return q;
  }
  friend BigInt operator%(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return r;
  }

  friend bool operator==(const BigInt& a, const BigInt& b) {
    return a.sign_ == b.sign_ && a.mag_ == b.mag_;
  }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return !(a == b); }
  friend bool operator<(const BigInt& a, const BigInt& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
    int c = cmp_mag(a.mag_, b.mag_);
    return a.sign_ >= 0 ? c < 0 : c > 0;
  }
  friend bool operator>(const BigInt& a, const BigInt& b) { return b < a; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return !(b < a); }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return !(a < b); }

  BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
  BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
  BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

  BigInt abs() const {
    BigInt r = *this;
    if (r.sign_ < 0) r.sign_ = 1;
    return r;
  }

  // Stein's binary gcd; avoids long division entirely.
  static BigInt gcd(BigInt a, BigInt b) {
    a.sign_ = a.mag_.empty() ? 0 : 1;
    b.sign_ = b.mag_.empty() ? 0 : 1;
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    unsigned sa = a.trailing_zero_bits();
    unsigned sb = b.trailing_zero_bits();
    unsigned common = std::min(sa, sb);
    a.shr_bits(sa);
    b.shr_bits(sb);
    while (true) {
      int c = cmp_mag(a.mag_, b.mag_);
      if (c == 0) break;
      if (c < 0) std::swap(a, b);
      a.mag_ = sub_mag(a.mag_, b.mag_);
      if (a.mag_.empty()) {
        a = b;
        break;
      }
      a.shr_bits(a.trailing_zero_bits());
    }
    a.shl_bits(common);
    return a;
  }

  std::string to_string() const {
    if (sign_ == 0) return "0";
    std::vector<std::uint32_t> m = mag_;
    std::string digits;
    while (!m.empty()) {
      // divide magnitude by 10^9 in place, collecting the remainder
      std::uint64_t rem = 0;
      for (std::size_t i = m.size(); i-- > 0;) {
        std::uint64_t cur = (rem << 32) | m[i];
        m[i] = static_cast<std::uint32_t>(cur / 1000000000ULL);
        rem = cur % 1000000000ULL;
      }
      trim(m);
      for (int d = 0; d < 9; ++d) {
        digits.push_back(static_cast<char>('0' + rem % 10));
        rem /= 10;
      }
    }
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    if (sign_ < 0) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
  }

 private:
  int sign_ = 0;
  std::vector<std::uint32_t> mag_;

  unsigned long long mag_u64() const {
    unsigned long long m = 0;
    if (mag_.size() > 1) m = static_cast<unsigned long long>(mag_[1]) << 32;
    if (!mag_.empty()) m |= mag_[0];
    return m;
  }

  static void trim(std::vector<std::uint32_t>& v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
  }

  static int cmp_mag(const std::vector<std::uint32_t>& a,
                     const std::vector<std::uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = a.size(); i-- > 0;)
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
  }

  static std::vector<std::uint32_t> add_mag(
      const std::vector<std::uint32_t>& a,
      const std::vector<std::uint32_t>& b) {
    const auto& big = a.size() >= b.size() ? a : b;
    const auto& small = a.size() >= b.size() ? b : a;
    std::vector<std::uint32_t> r = big;
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::uint64_t cur = carry + r[i] + (i < small.size() ? small[i] : 0);
      r[i] = static_cast<std::uint32_t>(cur);
      carry = cur >> 32;
      if (carry == 0 && i >= small.size()) break;
    }
    if (carry) r.push_back(static_cast<std::uint32_t>(carry));
    return r;
  }

  // requires a >= b
  static std::vector<std::uint32_t> sub_mag(
      const std::vector<std::uint32_t>& a,
      const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r = a;
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::int64_t cur = static_cast<std::int64_t>(r[i]) - borrow -
                         (i < b.size() ? b[i] : 0);
      if (cur < 0) {
        cur += 1LL << 32;
        borrow = 1;
      } else {
        borrow = 0;
      }
      r[i] = static_cast<std::uint32_t>(cur);
      if (borrow == 0 && i >= b.size()) break;
    }
    trim(r);
    return r;
  }

  // Knuth algorithm D, base 2^32. Requires |a| >= |b| > 0.
  static void divmod_mag(const std::vector<std::uint32_t>& a,
                         const std::vector<std::uint32_t>& b,
                         std::vector<std::uint32_t>& q,
                         std::vector<std::uint32_t>& r) {
    if (b.size() == 1) {
      q.assign(a.size(), 0);
      std::uint64_t rem = 0;
      for (std::size_t i = a.size(); i-- > 0;) {
        std::uint64_t cur = (rem << 32) | a[i];
        q[i] = static_cast<std::uint32_t>(cur / b[0]);
        rem = cur % b[0];
      }
      trim(q);
      r.clear();
      if (rem) r.push_back(static_cast<std::uint32_t>(rem));
      return;
    }
    const int shift = std::countl_zero(b.back());
    const std::size_t n = b.size(), m = a.size() - n;
    std::vector<std::uint32_t> u(a.size() + 1, 0), v(n, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      u[i] |= static_cast<std::uint32_t>(
          (static_cast<std::uint64_t>(a[i]) << shift));
      if (shift && i + 1 <= a.size())
        u[i + 1] = static_cast<std::uint32_t>(
            static_cast<std::uint64_t>(a[i]) >> (32 - shift));
    }
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = b[i] << shift;
      if (shift && i > 0)
        v[i] |= static_cast<std::uint32_t>(
            static_cast<std::uint64_t>(b[i - 1]) >> (32 - shift));
    }
    q.assign(m + 1, 0);
    const std::uint64_t base = 1ULL << 32;
    for (std::size_t j = m + 1; j-- > 0;) {
      std::uint64_t num = (static_cast<std::uint64_t>(u[j + n]) << 32) |
                          u[j + n - 1];
      std::uint64_t qhat = num / v[n - 1];
      std::uint64_t rhat = num % v[n - 1];
      while (qhat >= base ||
             qhat * v[n - 2] > ((rhat << 32) | u[j + n - 2])) {
        --qhat;
        rhat += v[n - 1];
        if (rhat >= base) break;
      }
      // multiply-subtract qhat * v from u[j .. j+n]
      std::int64_t borrow = 0;
      std::uint64_t carry = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t p = qhat * v[i] + carry;
        carry = p >> 32;
        std::int64_t t = static_cast<std::int64_t>(u[i + j]) -
                         static_cast<std::int64_t>(p & 0xffffffffULL) - borrow;
        if (t < 0) {
          t += static_cast<std::int64_t>(base);
          borrow = 1;
        } else {
          borrow = 0;
        }
        u[i + j] = static_cast<std::uint32_t>(t);
      }
      std::int64_t t = static_cast<std::int64_t>(u[j + n]) -
                       static_cast<std::int64_t>(carry) - borrow;
      if (t < 0) {
        // qhat was one too large; add v back
        t += static_cast<std::int64_t>(base);
        --qhat;
        std::uint64_t c2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
          std::uint64_t s = static_cast<std::uint64_t>(u[i + j]) + v[i] + c2;
          u[i + j] = static_cast<std::uint32_t>(s);
          c2 = s >> 32;
        }
        t += static_cast<std::int64_t>(c2);
        t &= static_cast<std::int64_t>(base - 1);
      }
      u[j + n] = static_cast<std::uint32_t>(t);
      q[j] = static_cast<std::uint32_t>(qhat);
    }
    trim(q);
    r.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n));
    if (shift) {
      for (std::size_t i = 0; i < n; ++i) {
        r[i] >>= shift;
        if (i + 1 < n)
          r[i] |= static_cast<std::uint32_t>(
              static_cast<std::uint64_t>(r[i + 1] & ((1U << shift) - 1))
              << (32 - shift));
      }
    }
    trim(r);
  }

  unsigned trailing_zero_bits() const {
    for (std::size_t i = 0; i < mag_.size(); ++i)
      if (mag_[i] != 0)
        return static_cast<unsigned>(i) * 32 +
               static_cast<unsigned>(std::countr_zero(mag_[i]));
    return 0;
  }

  void shr_bits(unsigned k) {
    if (k == 0 || mag_.empty()) return;
    const std::size_t limbs = k / 32;
    const unsigned bits = k % 32;
    if (limbs >= mag_.size()) {
      mag_.clear();
      sign_ = 0;
      return;
    }
    mag_.erase(mag_.begin(), mag_.begin() + static_cast<std::ptrdiff_t>(limbs));
    if (bits) {
      for (std::size_t i = 0; i < mag_.size(); ++i) {
        mag_[i] >>= bits;
        if (i + 1 < mag_.size())
          mag_[i] |= mag_[i + 1] << (32 - bits);
      }
    }
    trim(mag_);
    if (mag_.empty()) sign_ = 0;
  }

  void shl_bits(unsigned k) {
    if (k == 0 || mag_.empty()) return;
    const std::size_t limbs = k / 32;
    const unsigned bits = k % 32;
    if (bits) {
      mag_.push_back(0);
      for (std::size_t i = mag_.size(); i-- > 1;) {
        mag_[i] = (mag_[i] << bits) | (mag_[i - 1] >> (32 - bits));
      }
      mag_[0] <<= bits;
    }
    mag_.insert(mag_.begin(), limbs, 0);
    trim(mag_);
  }

  void mul_small_inplace(std::uint32_t f) {
    std::uint64_t carry = 0;
    for (auto& limb : mag_) {
      std::uint64_t cur = static_cast<std::uint64_t>(limb) * f + carry;
      limb = static_cast<std::uint32_t>(cur);
      carry = cur >> 32;
    }
    if (carry) mag_.push_back(static_cast<std::uint32_t>(carry));
  }
  void add_small_inplace(std::uint32_t d) {
    std::uint64_t carry = d;
    for (auto& limb : mag_) {
      if (!carry) break;
      std::uint64_t cur = limb + carry;
      limb = static_cast<std::uint32_t>(cur);
      carry = cur >> 32;
    }
    if (carry) mag_.push_back(static_cast<std::uint32_t>(carry));
  }
};

}  // namespace abforge
