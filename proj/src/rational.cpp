#include "dpcheck/rational.hpp"

#include <ostream>

#include "dpcheck/errors.hpp"

namespace dpcheck {

BigInt pow2(unsigned exp) {
    BigInt r = 1;
    r <<= exp;
    return r;
}

Rational::Rational(const BigInt& num, const BigInt& den) : q_(num, den) {
    if (sgn(den) == 0) {
        throw UsageError("rational with zero denominator");
    }
    q_.canonicalize();
}

Rational Rational::parse(const std::string& text) {
    const auto slash = text.find('/');
    if (text.find('.') != std::string::npos) {
        throw UsageError("decimal notation not accepted, use num/den: '" + text + "'");
    }
    try {
        if (slash == std::string::npos) {
            return Rational(BigInt(text));
        }
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (sgn(den) == 0) {
            throw UsageError("zero denominator in '" + text + "'");
        }
        return Rational(num, den);
    } catch (const std::invalid_argument&) {
        throw UsageError("malformed rational '" + text + "'");
    }
}

std::string Rational::str() const {
    return num().get_str() + "/" + den().get_str();
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) {
        throw UsageError("division by zero rational");
    }
    return Rational(mpq_class(a.q_ / b.q_));
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
}

Rational clamp_nonneg(const Rational& r) {
    return r.sign() < 0 ? Rational(0) : r;
}

}  // namespace dpcheck
