#pragma once

/// Exact arbitrary-precision integers and fractions. Every probability,
/// privacy parameter and count in this project is one of these two types;
/// no floating point is used anywhere on a decision path.

#include <cstdint>
#include <iosfwd>
#include <string>

#include <gmpxx.h>

namespace dpcheck {

/// Arbitrary-precision signed integer.
using BigInt = mpz_class;

/// 2^exp as a BigInt.
BigInt pow2(unsigned exp);

/// Exact fraction in canonical form: denominator > 0, gcd(|num|, den) = 1.
class Rational {
  public:
    Rational() : q_(0) {}
    Rational(long n) : q_(n) {}           // NOLINT(google-explicit-constructor)
    Rational(const BigInt& n) : q_(n) {}  // NOLINT(google-explicit-constructor)

    /// Throws UsageError if den == 0. Canonicalizes sign and gcd.
    Rational(const BigInt& num, const BigInt& den);

    /// Parses "num/den" or a bare integer "num". Decimal points are rejected.
    static Rational parse(const std::string& text);

    const BigInt& num() const { return q_.get_num(); }
    const BigInt& den() const { return q_.get_den(); }

    /// Canonical "num/den" form, e.g. "3/4", "-1/2", "5/1".
    std::string str() const;

    bool is_zero() const { return sgn(q_) == 0; }
    int sign() const { return sgn(q_); }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
    friend Rational operator/(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }

    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r);

  private:
    explicit Rational(mpq_class q) : q_(std::move(q)) {}

    mpq_class q_;
};

/// max(r, 0)
Rational clamp_nonneg(const Rational& r);

}  // namespace dpcheck
