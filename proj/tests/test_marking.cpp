#include "doctest.h"

#include "am2r/marking.hpp"
#include "am2r/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace am2r;

namespace {

LocalErrorField field_of(std::vector<double> eta) {
  LocalErrorField f;
  f.n_elems = static_cast<int>(eta.size());
  f.ndofs = 10;
  f.eta = Eigen::Map<Eigen::VectorXd>(eta.data(), eta.size());
  f.eta_global = std::sqrt(f.eta.squaredNorm());
  return f;
}

// Smallest subset cardinality meeting the bulk constraint, by exhaustion.
int brute_force_dorfler_card(const Eigen::VectorXd& eta, double theta) {
  const int n = static_cast<int>(eta.size());
  const double target = theta * eta.squaredNorm();
  int best = n + 1;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    int card = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        s += eta(i) * eta(i);
        ++card;
      }
    if (s >= target) best = std::min(best, card);
  }
  return best;
}

}  // namespace

TEST_CASE("greedy marking boundary cases") {
  const auto f = field_of({4.0, 2.0, 1.0});
  CHECK(mark_greedy(f, 0.5).h_set == std::vector<int>{0, 1});
  CHECK(mark_greedy(f, 0.0).h_set == std::vector<int>{0, 1, 2});
  CHECK(mark_greedy(f, 1.0).h_set == std::vector<int>{0});
  const auto tie = field_of({4.0, 4.0, 1.0});
  CHECK(mark_greedy(tie, 1.0).h_set == std::vector<int>{0, 1});
  CHECK(mark_greedy(f, 0.3).p_set.empty());
}

TEST_CASE("dorfler marking boundary cases") {
  const auto f = field_of({3.0, 2.0, 1.0});  // squares 9, 4, 1
  CHECK(mark_dorfler(f, 0.5).h_set == std::vector<int>{0});
  CHECK(mark_dorfler(f, 0.0).h_set.empty());
  const auto z = field_of({3.0, 2.0, 0.0, 1.0});
  CHECK(mark_dorfler(z, 1.0).h_set == std::vector<int>{0, 1, 3});
}

TEST_CASE("hp marking boundary cases") {
  const auto f = field_of({4.0, 2.0, 1.0});
  const auto r = mark_hp(f, 0.6, 0.5);
  CHECK(r.h_set == std::vector<int>{0});
  CHECK(r.p_set == std::vector<int>{1});

  CHECK(mark_hp(f, 1.0, 0.3).h_set.empty());
  CHECK(!mark_hp(f, 1.0, 0.3).p_set.empty());
  CHECK(mark_hp(f, 0.5, 1.0).p_set.empty());
  CHECK(mark_hp(f, 0.5, 1.0).h_set == std::vector<int>{0});
}

TEST_CASE("greedy is monotone in theta") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_index(20));
    std::vector<double> eta(n);
    for (auto& e : eta) e = rng.uniform(0.0, 5.0);
    const auto f = field_of(eta);
    const double t1 = rng.uniform();
    const double t2 = rng.uniform();
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    const auto shi = mark_greedy(f, hi).h_set;
    const auto slo = mark_greedy(f, lo).h_set;
    CHECK(std::includes(slo.begin(), slo.end(), shi.begin(), shi.end()));
  }
}

TEST_CASE("marking depends only on ratios") {
  Rng rng(32);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_index(15));
    std::vector<double> eta(n), scaled(n);
    const double c = std::exp(rng.uniform(-3.0, 3.0));
    for (int i = 0; i < n; ++i) {
      eta[i] = rng.uniform(1e-3, 2.0);
      scaled[i] = c * eta[i];
    }
    const auto f = field_of(eta);
    const auto g = field_of(scaled);
    const double theta = rng.uniform(0.05, 0.95);
    const double rho = rng.uniform(0.05, 0.95);
    CHECK(mark_greedy(f, theta).h_set == mark_greedy(g, theta).h_set);
    const auto rf = mark_hp(f, theta, rho);
    const auto rg = mark_hp(g, theta, rho);
    CHECK(rf.h_set == rg.h_set);
    CHECK(rf.p_set == rg.p_set);
  }
}

TEST_CASE("dorfler matches brute force on random small fields") {
  Rng rng(33);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + static_cast<int>(rng.uniform_index(12));
    std::vector<double> eta(n);
    for (auto& e : eta) e = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.0, 3.0);
    const auto f = field_of(eta);
    const double theta = rng.uniform();
    const auto got = mark_dorfler(f, theta).h_set;
    // Constraint satisfied.
    double s = 0.0;
    for (int i : got) s += f.eta(i) * f.eta(i);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += f.eta(i) * f.eta(i);
    CHECK(s >= theta * total * (1.0 - 1e-12));
    // Minimal cardinality.
    CHECK(static_cast<int>(got.size()) ==
          brute_force_dorfler_card(f.eta, theta));
    for (int i : got) CHECK(f.eta(i) > 0.0);
  }
}

TEST_CASE("hp partition properties") {
  Rng rng(34);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_index(25));
    std::vector<double> eta(n);
    for (auto& e : eta) e = rng.uniform(0.0, 2.0);
    const auto f = field_of(eta);
    const double theta = rng.uniform();
    const double rho = rng.uniform();
    const auto r = mark_hp(f, theta, rho);
    std::set<int> h(r.h_set.begin(), r.h_set.end());
    std::set<int> p(r.p_set.begin(), r.p_set.end());
    for (int i : h) CHECK(p.count(i) == 0);
    // Union equals the inclusive band minus the exact h-threshold boundary.
    const double mx = f.eta.maxCoeff();
    std::set<int> expect;
    for (int i = 0; i < n; ++i)
      if (rho * theta * mx <= f.eta(i) && f.eta(i) != theta * mx)
        expect.insert(i);
    std::set<int> got(h);
    got.insert(p.begin(), p.end());
    CHECK(got == expect);
  }
}

TEST_CASE("marking input validation") {
  LocalErrorField empty;
  CHECK_THROWS_AS(mark_greedy(empty, 0.5), std::invalid_argument);
  const auto f = field_of({1.0});
  CHECK_THROWS_AS(mark_greedy(f, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(mark_hp(f, 0.5, 1.7), std::invalid_argument);
}
