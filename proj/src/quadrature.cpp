#include "am2r/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace am2r {

std::vector<QuadPoint1D> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  std::vector<QuadPoint1D> pts(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    pts[i].x = x;
    pts[i].w = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Symmetrize node pairs so the rule is exactly even.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double a = 0.5 * (pts[i].x - pts[j].x);
    pts[i].x = a;
    pts[j].x = -a;
    const double w = 0.5 * (pts[i].w + pts[j].w);
    pts[i].w = pts[j].w = w;
  }
  if (n % 2 == 1) pts[n / 2].x = 0.0;
  return pts;
}

std::vector<QuadPoint1D> gauss_legendre01(int n) {
  auto pts = gauss_legendre(n);
  for (auto& p : pts) {
    p.x = 0.5 * (p.x + 1.0);
    p.w *= 0.5;
  }
  return pts;
}

const std::vector<QuadPoint2D>& triangle_rule(int deg) {
  if (deg < 0) deg = 0;
  static std::mutex mu;
  static std::unordered_map<int, std::vector<QuadPoint2D>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(deg);
  if (it != cache.end()) return it->second;

  // Along u the integrand picks up the extra (1-u) factor; one more point
  // covers it.
  const int nu = deg / 2 + 1 + 1;
  const int nv = deg / 2 + 1;
  const auto gu = gauss_legendre01(nu);
  const auto gv = gauss_legendre01(nv);
  std::vector<QuadPoint2D> rule;
  rule.reserve(static_cast<std::size_t>(nu) * nv);
  for (const auto& pu : gu) {
    for (const auto& pv : gv) {
      QuadPoint2D q;
      q.xi = pu.x;
      q.eta = pv.x * (1.0 - pu.x);
      q.w = pu.w * pv.w * (1.0 - pu.x);
      rule.push_back(q);
    }
  }
  return cache.emplace(deg, std::move(rule)).first->second;
}

}  // namespace am2r
