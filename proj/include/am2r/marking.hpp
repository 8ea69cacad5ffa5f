#pragma once

#include "am2r/estimator.hpp"

#include <vector>

namespace am2r {

struct MarkResult {
  std::vector<int> h_set;
  std::vector<int> p_set;
};

// h_set = { T : theta * max_S eta_S <= eta_T }, inclusive. theta = 0 marks
// everything, theta = 1 the argmax set (ties included).
MarkResult mark_greedy(const LocalErrorField& f, double theta);

// Minimal-cardinality bulk set: theta * sum eta^2 <= sum over the set,
// realized as the shortest satisfying prefix of the descending sort, ties by
// element index. Zero indicators are never marked.
MarkResult mark_dorfler(const LocalErrorField& f, double theta);

// h_set = { T : theta * max < eta_T } (strict);
// p_set = { T : rho * theta * max <= eta_T < theta * max }.
// theta = 1 empties h_set, rho = 1 empties p_set.
MarkResult mark_hp(const LocalErrorField& f, double theta, double rho);

}  // namespace am2r
