#include "am2r/marking.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace am2r {

namespace {

void check_input(const LocalErrorField& f, double theta) {
  if (f.eta.size() == 0) throw std::invalid_argument("mark: empty field");
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("mark: theta outside [0,1]");
}

}  // namespace

MarkResult mark_greedy(const LocalErrorField& f, double theta) {
  check_input(f, theta);
  MarkResult r;
  const double thresh = theta * f.eta.maxCoeff();
  for (int t = 0; t < f.eta.size(); ++t)
    if (thresh <= f.eta(t)) r.h_set.push_back(t);
  return r;
}

MarkResult mark_dorfler(const LocalErrorField& f, double theta) {
  check_input(f, theta);
  const int n = static_cast<int>(f.eta.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return f.eta(a) > f.eta(b); });
  // Accumulate the total in the same (sorted) order as the prefix sums so the
  // theta = 1 limit lands exactly on the positive prefix.
  double total = 0.0;
  for (int t : order) total += f.eta(t) * f.eta(t);
  const double target = theta * total;

  MarkResult r;
  double acc = 0.0;
  for (int t : order) {
    if (acc >= target) break;
    if (f.eta(t) <= 0.0) break;
    acc += f.eta(t) * f.eta(t);
    r.h_set.push_back(t);
  }
  std::sort(r.h_set.begin(), r.h_set.end());
  return r;
}

MarkResult mark_hp(const LocalErrorField& f, double theta, double rho) {
  check_input(f, theta);
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("mark: rho outside [0,1]");
  MarkResult r;
  const double mx = f.eta.maxCoeff();
  const double h_thresh = theta * mx;
  const double p_thresh = rho * theta * mx;
  for (int t = 0; t < f.eta.size(); ++t) {
    if (h_thresh < f.eta(t)) {
      r.h_set.push_back(t);
    } else if (p_thresh <= f.eta(t) && f.eta(t) < h_thresh) {
      r.p_set.push_back(t);
    }
  }
  return r;
}

}  // namespace am2r
