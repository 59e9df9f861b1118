#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "ep/moments.hpp"
#include "ep/rates.hpp"

using Catch::Approx;

TEST_CASE("h2 is strictly increasing with the stated boundary behaviour") {
  for (auto [alpha, l] : std::vector<std::pair<double, long>>{{0.5, 1}, {0.3, 2}, {0.8, 3}}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 40; ++i) {
      double eps = static_cast<double>(i) / 41.0 / static_cast<double>(l);
      double v = ep::h2(eps, alpha, l);
      CHECK(v > prev);
      prev = v;
    }
    // eps -> 0+: h2 -> -inf at rate alpha*log(eps); eps -> 1/l-: +inf at rate -l*log(1-l*eps)
    CHECK(ep::h2(1e-12 / l, alpha, l) < -5.0);
    CHECK(ep::h2(1e-15 / l, alpha, l) < ep::h2(1e-12 / l, alpha, l) - 1.0);
    CHECK(ep::h2((1 - 1e-12) / l, alpha, l) > 10.0);
  }
  CHECK_THROWS_AS(ep::h2(0.0, 0.5, 1), std::domain_error);
  CHECK_THROWS_AS(ep::h2(1.0, 0.5, 1), std::domain_error);
}

TEST_CASE("h1 limits") {
  CHECK(ep::h1(1e-12, 0.5, 1) < -20.0);  // the log(e^l - 1) term diverges
  double big = 80.0;
  double c = ep::h1(big, 0.5, 1) - big;  // h1 ~ lambda + const
  CHECK(ep::h1(big + 10, 0.5, 1) - (big + 10) == Approx(c).margin(1e-10));
  CHECK_THROWS_AS(ep::h1(0.0, 0.5, 1), std::domain_error);
}

TEST_CASE("epsilon0 limits, monotonicity and residual contract") {
  for (auto [alpha, l] : std::vector<std::pair<double, long>>{{0.5, 1}, {0.3, 2}}) {
    CHECK(ep::epsilon0(1e-10, alpha, l) < 1e-6);
    CHECK(ep::epsilon0(200.0, alpha, l) ==
          Approx(1.0 / static_cast<double>(l)).epsilon(1e-12));
    double prev = 0.0;
    for (double lam : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      double e = ep::epsilon0(lam, alpha, l);
      CHECK(e > prev);
      CHECK(e < 1.0 / static_cast<double>(l));
      prev = e;
    }
  }
  // residual contract at (0.5, 1, 1.0)
  double e0 = ep::epsilon0(1.0, 0.5, 1);
  double target = ep::h1(1.0, 0.5, 1);
  CHECK(std::abs(ep::h2(e0, 0.5, 1) - target) <= 1e-12 * std::max(1.0, std::abs(target)));
}

TEST_CASE("cgf_M: zero for nonpositive lambda, flat right derivative at zero") {
  CHECK(ep::cgf_M(-1.0, 0.5, 1) == 0.0);
  CHECK(ep::cgf_M(0.0, 0.5, 1) == 0.0);
  CHECK(ep::cgf_M(1e-6, 0.5, 1) / 1e-6 < 1e-3);
  CHECK(ep::cgf_M(2.0, 0.5, 1) > 0.0);
}

TEST_CASE("finite-n CGF gap shrinks toward cgf_M along n = 200, 400, 800") {
  const double lambda = 0.7;
  const double y = -std::expm1(-lambda);
  const double limit = ep::cgf_M(lambda, 0.5, 1);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (long n : {200L, 400L, 800L}) {
    double fin = ep::log_mgf_M(0.5, n, 1, y) / static_cast<double>(n);
    double gap = std::abs(fin - limit);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-3);
}

TEST_CASE("rate_M boundary structure") {
  for (auto [alpha, l] :
       std::vector<std::pair<double, long>>{{0.3, 1}, {0.5, 2}, {0.8, 3}}) {
    CHECK(ep::rate_M(0.0, alpha, l) == 0.0);
    CHECK(std::isinf(ep::rate_M(1.0 / static_cast<double>(l) + 0.01, alpha, l)));
    CHECK(std::isinf(ep::rate_M(-0.05, alpha, l)));
    double mid = ep::rate_M(0.5 / static_cast<double>(l), alpha, l);
    CHECK(mid > 0.0);
    CHECK(std::isfinite(mid));
  }
  // the domain edge goes through the plateau branch; at alpha = 1/2, l = 1
  // the closed form pins its value to log 2
  CHECK(ep::rate_M(1.0, 0.5, 1) == Approx(std::log(2.0)).margin(1e-9));
}

TEST_CASE("closed form: endpoints, B1 cubic residual, and agreement with rate_M") {
  CHECK(ep::rate_closed_half(0.0) == 0.0);
  CHECK(ep::closed_half_B1(0.0) == Approx(0.0).margin(1e-12));
  CHECK(ep::rate_closed_half(1.0) == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(ep::rate_closed_half(1.2), std::domain_error);
  CHECK_THROWS_AS(ep::rate_closed_half(-0.1), std::domain_error);

  auto cubic_residual = [](double x) {
    double b = ep::closed_half_B1(x);
    double om = 1.0 - x;
    return om * om * b * b * b + 2.0 * om * b * b + om * om * b - 2.0 * x;
  };
  CHECK(std::abs(cubic_residual(0.37)) <= 1e-9);
  for (int i = 1; i <= 19; ++i) {
    double x = 0.05 * i;
    CHECK(std::abs(cubic_residual(x)) <= 1e-9);
    CHECK(ep::rate_M(x, 0.5, 1) == Approx(ep::rate_closed_half(x)).margin(1e-6));
  }
}

TEST_CASE("rate_M is nondecreasing and convex on [0, 1/l]") {
  for (auto [alpha, l] : std::vector<std::pair<double, long>>{{0.5, 1}, {0.3, 2}}) {
    const int N = 40;
    std::vector<double> I(N + 1);
    for (int i = 0; i <= N; ++i)
      I[i] = ep::rate_M(static_cast<double>(i) / N / static_cast<double>(l), alpha, l);
    for (int i = 0; i < N; ++i) CHECK(I[i + 1] >= I[i] - 1e-9);
    for (int i = 1; i < N; ++i) CHECK(I[i + 1] - 2 * I[i] + I[i - 1] >= -1e-7);
  }
}

TEST_CASE("cgf_M and cgf_K are convex in lambda") {
  for (auto cgf : {+[](double lam) { return ep::cgf_M(lam, 0.5, 1); },
                   +[](double lam) { return ep::cgf_M(lam, 0.3, 2); },
                   +[](double lam) { return ep::cgf_K(lam, 0.5); }}) {
    const int N = 80;
    std::vector<double> v(N + 1);
    for (int i = 0; i <= N; ++i) v[i] = cgf(0.25 + 19.75 * i / N);
    for (int i = 1; i < N; ++i) CHECK(v[i + 1] - 2 * v[i] + v[i - 1] >= -1e-9);
  }
}

TEST_CASE("asymptotic split: cgf_M(lambda) - lambda/l stays bounded on [1, 50]") {
  for (auto [alpha, l] : std::vector<std::pair<double, long>>{{0.5, 1}, {0.3, 2}, {0.8, 3}}) {
    for (double lam = 1.0; lam <= 50.0; lam += 2.45) {
      double tilde = ep::cgf_M(lam, alpha, l) - lam / static_cast<double>(l);
      CHECK(std::abs(tilde) < 10.0);
    }
  }
}

TEST_CASE("Legendre duality round trip recovers cgf_M") {
  const double alpha = 0.5;
  const long l = 1;
  for (double lam : {0.5, 1.0, 2.0, 4.0}) {
    // sup_x { lam*x - I(x) } over the effective domain, by golden section
    auto f = [&](double x) { return lam * x - ep::rate_M(x, alpha, l); };
    double a = 0.0, b = 1.0 / static_cast<double>(l);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 80; ++it) {
      if (f(c) > f(d))
        b = d;
      else
        a = c;
      c = b - gr * (b - a);
      d = a + gr * (b - a);
    }
    double sup = f(0.5 * (a + b));
    CHECK(sup == Approx(ep::cgf_M(lam, alpha, l)).margin(1e-6));
  }
}

TEST_CASE("cgf_K values and rate_K structure") {
  CHECK(ep::cgf_K(std::log(2.0), 0.5) == Approx(std::log(4.0 / 3.0)).epsilon(1e-13));
  CHECK(ep::cgf_K(-0.3, 0.5) == 0.0);
  CHECK(ep::cgf_K(0.0, 0.5) == 0.0);
  CHECK(ep::rate_K(0.0, 0.5) == 0.0);
  CHECK(std::isinf(ep::rate_K(1.3, 0.5)));
  CHECK(std::isinf(ep::rate_K(-0.2, 0.5)));
  // all-singletons endpoint: sup_lambda {lambda - Lambda_alpha} -> -log(alpha)
  CHECK(ep::rate_K(1.0, 0.5) == Approx(std::log(2.0)).margin(1e-6));
  CHECK(ep::rate_K(1.0, 0.25) == Approx(std::log(4.0)).margin(1e-6));
}

TEST_CASE("rate_K_ewens piecewise values") {
  CHECK(ep::rate_K_ewens(2.0, 2.0) == 0.0);
  CHECK(ep::rate_K_ewens(0.0, 2.0) == 2.0);
  CHECK(std::isinf(ep::rate_K_ewens(-1.0, 2.0)));
  CHECK(ep::rate_K_ewens(1.0, 2.0) == Approx(1.0 * std::log(0.5) - 1.0 + 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(ep::rate_K_ewens(1.0, 0.0), std::domain_error);
}

TEST_CASE("rate curve: CSV schema and thread-count independence") {
  auto c1 = ep::make_rate_curve(0.5, 1, 0.0, 1.0, 41, false, 1);
  auto c4 = ep::make_rate_curve(0.5, 1, 0.0, 1.0, 41, false, 4);
  CHECK(c1.to_csv() == c4.to_csv());
  std::string csv = c1.to_csv();
  CHECK(csv.rfind("x,I\n", 0) == 0);
  CHECK(c1.grid.front().first == 0.0);
  CHECK(c1.grid.front().second == 0.0);
  for (size_t i = 1; i < c1.grid.size(); ++i) CHECK(c1.grid[i].first > c1.grid[i - 1].first);

  auto closed = ep::make_rate_curve(0.5, 1, 0.0, 1.0, 41, true);
  for (size_t i = 0; i < closed.grid.size(); ++i)
    CHECK(closed.grid[i].second == Approx(c1.grid[i].second).margin(1e-6));
  CHECK_THROWS_AS(ep::make_rate_curve(0.3, 1, 0.0, 1.0, 11, true), std::domain_error);
}
