#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magconn/tomoconst.hpp>

using namespace magconn::tomo;

TEST_CASE("coefficients at pinned values") {
  SUBCASE("(m, n) = (2, 3)") {
    auto c = coeffs(2, 3);
    CHECK(c.a_minus == Rational(1, 2));
    CHECK(c.a_zero == Rational(1, 6));
    CHECK(c.a_plus == Rational(1, 3));
  }
  SUBCASE("n = 2 kills a_zero for every level") {
    for (long k = 2; k <= 30; ++k) CHECK(aZero(k, 2) == 0);
  }
  SUBCASE("(m, n) = (1, 4): C chain defined and zero") {
    auto c = coeffs(1, 4);
    CHECK(c.C == 0);
    CHECK(closedFormC(1, 4) == 0);
  }
  SUBCASE("sign pattern alpha > 0, beta <= 0, gamma >= 0") {
    for (long m = 1; m <= 12; ++m)
      for (long n = 2; n <= 12; ++n) {
        if (m + n < 4) continue;
        auto c = coeffs(m, n);
        CHECK(c.alpha > 0);
        CHECK(c.beta <= 0);
        CHECK(c.gamma >= 0);
      }
  }
  SUBCASE("precondition violations") {
    CHECK_THROWS_AS((void)coeffs(0, 5), std::invalid_argument);
    CHECK_THROWS_AS((void)coeffs(1, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)coeffs(3, 1), std::invalid_argument);
  }
}

TEST_CASE("C identity: quadratic route equals the closed form") {
  SUBCASE("(2, 2): both equal 1/2, matching the intro form") {
    auto v = verifyC(2, 2);
    CHECK(v.equal);
    CHECK(v.closed == Rational(1, 2));
    CHECK(introSpecialization(2) == Rational(1, 2));
  }
  SUBCASE("m = 1: both vanish for n = 3..50") {
    for (long n = 3; n <= 50; ++n) {
      auto v = verifyC(1, n);
      CHECK(v.equal);
      CHECK(v.closed == 0);
    }
  }
  SUBCASE("exhaustive exact sweep m, n <= 40") {
    for (long m = 1; m <= 40; ++m)
      for (long n = 2; n <= 40; ++n) {
        if (m + n < 4) continue;
        auto v = verifyC(m, n);
        CHECK(v.equal);
      }
  }
}

TEST_CASE("intro specialization") {
  CHECK(introSpecialization(4) == Rational(4, 3));
  for (long n = 2; n <= 100; ++n) CHECK(introSpecialization(n) == closedFormC(2, n));
}

TEST_CASE("positivity and the drop inequality") {
  SUBCASE("C >= 0 with equality exactly at m = 1") {
    for (long m = 1; m <= 40; ++m)
      for (long n = 2; n <= 40; ++n) {
        if (m + n < 4) continue;
        Rational c = closedFormC(m, n);
        if (m == 1)
          CHECK(c == 0);
        else
          CHECK(c > 0);
      }
  }
  SUBCASE("level-drop inequality holds exactly over the grid") {
    for (long m = 1; m <= 40; ++m)
      for (long n = 2; n <= 40; ++n) {
        if (m + n < 4) continue;
        CHECK(dropInequalityHolds(m, n));
      }
  }
}
