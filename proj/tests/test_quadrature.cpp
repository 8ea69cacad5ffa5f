#include "doctest.h"

#include "am2r/quadrature.hpp"

#include <cmath>

using namespace am2r;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// int_T xi^a eta^b over the reference triangle = a! b! / (a+b+2)!
double tri_monomial_exact(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST_CASE("gauss legendre base properties") {
  for (int n = 1; n <= 10; ++n) {
    const auto pts = gauss_legendre(n);
    REQUIRE(static_cast<int>(pts.size()) == n);
    double wsum = 0.0;
    for (const auto& p : pts) wsum += p.w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (int i = 0; i < n / 2; ++i) {
      CHECK(pts[i].x == -pts[n - 1 - i].x);
      CHECK(pts[i].w == pts[n - 1 - i].w);
    }
    // Exact for monomials up to degree 2n-1.
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (const auto& p : pts) q += p.w * std::pow(p.x, k);
      const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
      CHECK(std::abs(q - exact) < 1e-13);
    }
  }
}

TEST_CASE("triangle rule integrates monomials exactly") {
  for (int deg = 0; deg <= 18; ++deg) {
    const auto& rule = triangle_rule(deg);
    double wsum = 0.0;
    for (const auto& q : rule) wsum += q.w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double val = 0.0;
        for (const auto& q : rule)
          val += q.w * std::pow(q.xi, a) * std::pow(q.eta, b);
        const double exact = tri_monomial_exact(a, b);
        CHECK(std::abs(val - exact) < 1e-13 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("triangle rule points lie inside the reference triangle") {
  for (int deg : {1, 4, 9, 16}) {
    for (const auto& q : triangle_rule(deg)) {
      CHECK(q.xi > 0.0);
      CHECK(q.eta > 0.0);
      CHECK(q.xi + q.eta < 1.0);
      CHECK(q.w > 0.0);
    }
  }
}
