#pragma once
// Exact rational arithmetic on int64 with __int128 intermediates.  Used by the
// growth-window condition checks, which must report bounds like 30/54 or 35/32
// with zero floating-point tolerance, and by the CLI fraction parser ("7/12").

#include <cctype>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swq {

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(int64_t n) : num_(n), den_(1) {}
    Rational(int64_t n, int64_t d) : num_(n), den_(d) { normalize(); }

    int64_t num() const { return num_; }
    int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;  // both normalized
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

    // "7/12", "3", "-5/9"; whitespace not accepted.
    static Rational parse(const std::string& s) {
        for (char c : s)
            if (std::isspace(static_cast<unsigned char>(c)))
                throw std::invalid_argument("not a rational: '" + s + "'");
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) {
                size_t pos = 0;
                int64_t n = std::stoll(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return Rational(n);
            }
            size_t p1 = 0, p2 = 0;
            int64_t n = std::stoll(s.substr(0, slash), &p1);
            int64_t d = std::stoll(s.substr(slash + 1), &p2);
            if (p1 != slash || p2 != s.size() - slash - 1) throw std::invalid_argument(s);
            return Rational(n, d);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a rational: '" + s + "'");
        }
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    using i128 = __int128;

    static Rational make(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<int64_t>(n);
        r.den_ = static_cast<int64_t>(d);
        return r;
    }
    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }
    void normalize() {
        Rational r = make(num_, den_);
        num_ = r.num_;
        den_ = r.den_;
    }

    int64_t num_;
    int64_t den_;
};

}  // namespace swq
