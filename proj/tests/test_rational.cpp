#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swq/rational.hpp"

using swq::Rational;

TEST_CASE("construction normalizes sign and gcd") {
    CHECK(Rational(30, 54) == Rational(5, 9));
    CHECK(Rational(-4, -6) == Rational(2, 3));
    CHECK(Rational(4, -6) == Rational(-2, 3));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(5, 9).num() == 5);
    CHECK(Rational(5, 9).den() == 9);
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic is exact") {
    Rational a(7, 12);
    CHECK(a + Rational(1, 12) == Rational(2, 3));
    CHECK(a - Rational(1, 4) == Rational(1, 3));
    CHECK(a * Rational(7, 6) == Rational(49, 72));
    CHECK(a / Rational(7, 3) == Rational(1, 4));
    CHECK(-a == Rational(-7, 12));
    CHECK_THROWS_AS(a / Rational(0), std::domain_error);

    // load per service pass at a=7/12, nu=6: a*(1 + 1/6)
    Rational one(1);
    CHECK(a * (one + Rational(1, 6)) == Rational(49, 72));
    // saturation ratio a / (1 - a + a*nu/J) at nu=6, J=30
    Rational denom = one - a + a * Rational(6, 30);
    CHECK(a / denom == Rational(35, 32));
}

TEST_CASE("ordering uses cross products") {
    CHECK(Rational(49, 72) < Rational(1));
    CHECK(Rational(5, 9) < Rational(95, 161));
    CHECK(Rational(7, 12) >= Rational(7, 12));
    CHECK(Rational(-1, 2) < Rational(1, 3));
    CHECK(Rational(1, 3) > Rational(-1, 2));
    CHECK(Rational(2, 4) <= Rational(1, 2));
}

TEST_CASE("parse accepts fractions and integers, rejects junk") {
    CHECK(Rational::parse("7/12") == Rational(7, 12));
    CHECK(Rational::parse("3") == Rational(3));
    CHECK(Rational::parse("-5/9") == Rational(-5, 9));
    CHECK(Rational::parse("30/54") == Rational(5, 9));
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/2/3"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("a/b"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1.5"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse(" 1/2"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
}

TEST_CASE("str round-trips through parse") {
    for (auto r : {Rational(5, 9), Rational(-7, 12), Rational(4), Rational(0), Rational(120, 151)}) {
        CHECK(Rational::parse(r.str()) == r);
    }
    CHECK(Rational(30, 54).str() == "5/9");
    CHECK(Rational(4).str() == "4");
}

TEST_CASE("to_double matches the quotient") {
    CHECK(Rational(1, 2).to_double() == 0.5);
    CHECK(Rational(49, 72).to_double() == doctest::Approx(49.0 / 72.0));
}

TEST_CASE("overflow in intermediates is caught, not wrapped") {
    Rational big(INT64_MAX, 1);
    CHECK_THROWS_AS(big * big, std::overflow_error);
    CHECK_NOTHROW(Rational(INT64_MAX, INT64_MAX));  // normalizes to 1
    CHECK(Rational(INT64_MAX, INT64_MAX) == Rational(1));
}
