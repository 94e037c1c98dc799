#pragma once

#include <vector>

#include "hals/common.hpp"

namespace hals {

// Exact minimum-cost perfect matching on a dense n x n cost matrix
// (Jonker-Volgenant style shortest augmenting paths, O(n^3)). cost[i * n + j]
// is the cost of assigning row i to column j. Returns the column assigned to
// each row.
std::vector<int> solve_assignment(const std::vector<float>& cost, int n);

}  // namespace hals
