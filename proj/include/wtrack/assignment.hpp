#pragma once

// Optimal rectangular linear assignment (Jonker-Volgenant shortest augmenting
// path) with per-pair gating. Among assignments that use only allowed pairs,
// the solver returns one of maximum cardinality and, among those, minimum
// total cost.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wtrack/geometry.hpp"

namespace wtrack {

struct AssignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

namespace detail {

// Lexicographic cost: forbidden-pair count first, then real cost. Running the
// solver over this ordered group gives "maximize allowed matches, then
// minimize cost" without a big-M constant polluting the real part.
struct LexCost {
  std::int64_t penalty = 0;
  double value = 0.0;

  friend LexCost operator+(LexCost a, LexCost b) { return {a.penalty + b.penalty, a.value + b.value}; }
  friend LexCost operator-(LexCost a, LexCost b) { return {a.penalty - b.penalty, a.value - b.value}; }
  friend bool operator<(LexCost a, LexCost b) {
    return a.penalty != b.penalty ? a.penalty < b.penalty : a.value < b.value;
  }
  friend bool operator==(LexCost a, LexCost b) { return a.penalty == b.penalty && a.value == b.value; }

  static LexCost infinity() { return {std::numeric_limits<std::int64_t>::max() / 4, 0.0}; }
};

/// Shortest-augmenting-path assignment for rows <= cols. Every row is
/// assigned; returns the column chosen for each row. `cost(i, j)` must
/// return a Cost; Cost needs +, -, <, == and Cost::infinity().
template <typename Cost, typename CostFn>
std::vector<std::size_t> shortest_augmenting_path(std::size_t rows, std::size_t cols, CostFn cost) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<Cost> u(rows), v(cols), shortest(cols);
  std::vector<std::size_t> path(cols, kNone), col4row(rows, kNone), row4col(cols, kNone);
  std::vector<std::size_t> remaining(cols);
  std::vector<char> visited_rows(rows), visited_cols(cols);

  for (std::size_t current = 0; current < rows; ++current) {
    std::fill(shortest.begin(), shortest.end(), Cost::infinity());
    std::fill(visited_rows.begin(), visited_rows.end(), 0);
    std::fill(visited_cols.begin(), visited_cols.end(), 0);
    std::size_t num_remaining = cols;
    for (std::size_t j = 0; j < cols; ++j) remaining[j] = cols - j - 1;

    Cost min_value{};
    std::size_t sink = kNone;
    std::size_t i = current;
    while (sink == kNone) {
      visited_rows[i] = 1;
      Cost lowest = Cost::infinity();
      std::size_t index = kNone;
      for (std::size_t it = 0; it < num_remaining; ++it) {
        const std::size_t j = remaining[it];
        const Cost reduced = min_value + cost(i, j) - u[i] - v[j];
        if (reduced < shortest[j]) {
          path[j] = i;
          shortest[j] = reduced;
        }
        if (index == kNone || shortest[j] < lowest ||
            (shortest[j] == lowest && row4col[j] == kNone)) {
          lowest = shortest[j];
          index = it;
        }
      }
      min_value = lowest;
      const std::size_t j = remaining[index];
      if (row4col[j] == kNone) {
        sink = j;
      } else {
        i = row4col[j];
      }
      visited_cols[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[current] = u[current] + min_value;
    for (std::size_t r = 0; r < rows; ++r)
      if (visited_rows[r] && r != current) u[r] = u[r] + min_value - shortest[col4row[r]];
    for (std::size_t c = 0; c < cols; ++c)
      if (visited_cols[c]) v[c] = v[c] - (min_value - shortest[c]);

    for (std::size_t j = sink;;) {
      const std::size_t r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == current) break;
    }
  }
  return col4row;
}

inline void require_finite(const CostMatrix& cost) {
  for (double c : cost.values())
    if (!std::isfinite(c)) throw std::invalid_argument("assignment: cost matrix has non-finite entries");
}

inline AssignmentResult collect(const CostMatrix& cost, std::vector<std::pair<std::size_t, std::size_t>> matches) {
  std::sort(matches.begin(), matches.end());
  AssignmentResult result;
  std::vector<char> row_used(cost.rows()), col_used(cost.cols());
  for (auto [r, c] : matches) {
    row_used[r] = col_used[c] = 1;
    result.total_cost += cost(r, c);
  }
  for (std::size_t r = 0; r < cost.rows(); ++r)
    if (!row_used[r]) result.unmatched_rows.push_back(r);
  for (std::size_t c = 0; c < cost.cols(); ++c)
    if (!col_used[c]) result.unmatched_cols.push_back(c);
  result.matches = std::move(matches);
  return result;
}

}  // namespace detail

/// Gated optimal assignment where `allowed(row, col)` decides per pair
/// whether it may be matched at all.
template <typename AllowedFn>
AssignmentResult solve_if(const CostMatrix& cost, AllowedFn allowed) {
  detail::require_finite(cost);
  const bool transpose = cost.rows() > cost.cols();
  const std::size_t n = transpose ? cost.cols() : cost.rows();
  const std::size_t m = transpose ? cost.rows() : cost.cols();

  auto lex = [&](std::size_t i, std::size_t j) -> detail::LexCost {
    const std::size_t r = transpose ? j : i;
    const std::size_t c = transpose ? i : j;
    if (!allowed(r, c)) return {1, 0.0};
    return {0, cost(r, c)};
  };

  std::vector<std::pair<std::size_t, std::size_t>> matches;
  if (n > 0) {
    const auto col4row = detail::shortest_augmenting_path<detail::LexCost>(n, m, lex);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = transpose ? col4row[i] : i;
      const std::size_t c = transpose ? i : col4row[i];
      if (allowed(r, c)) matches.emplace_back(r, c);
    }
  }
  return detail::collect(cost, std::move(matches));
}

/// Optimal assignment; pairs with cost above `gate` are never matched.
inline AssignmentResult solve(const CostMatrix& cost, std::optional<double> gate = std::nullopt) {
  if (!gate) return solve_if(cost, [](std::size_t, std::size_t) { return true; });
  const double g = *gate;
  return solve_if(cost, [&](std::size_t r, std::size_t c) { return cost(r, c) <= g; });
}

inline constexpr std::size_t kBruteforceMaxDim = 8;

/// Exhaustive reference solver with the same contract as solve(). Only for
/// matrices up to kBruteforceMaxDim on each side.
inline AssignmentResult solve_bruteforce(const CostMatrix& cost, std::optional<double> gate = std::nullopt) {
  detail::require_finite(cost);
  if (cost.rows() > kBruteforceMaxDim || cost.cols() > kBruteforceMaxDim)
    throw std::invalid_argument("solve_bruteforce: matrix exceeds enumeration bound");

  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  auto allowed = [&](std::size_t r, std::size_t c) { return !gate || cost(r, c) <= *gate; };

  std::vector<std::size_t> current(rows, cols), best(rows, cols);
  std::vector<char> used(cols, 0);
  std::size_t best_count = 0;
  double best_sum = 0.0;
  bool have_best = false;

  auto recurse = [&](auto&& self, std::size_t r, std::size_t count, double sum) -> void {
    if (r == rows) {
      if (!have_best || count > best_count || (count == best_count && sum < best_sum)) {
        have_best = true;
        best_count = count;
        best_sum = sum;
        best = current;
      }
      return;
    }
    current[r] = cols;
    self(self, r + 1, count, sum);
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c] || !allowed(r, c)) continue;
      used[c] = 1;
      current[r] = c;
      self(self, r + 1, count + 1, sum + cost(r, c));
      used[c] = 0;
    }
    current[r] = cols;
  };
  recurse(recurse, 0, 0, 0.0);

  std::vector<std::pair<std::size_t, std::size_t>> matches;
  for (std::size_t r = 0; r < rows; ++r)
    if (best[r] != cols) matches.emplace_back(r, best[r]);
  return detail::collect(cost, std::move(matches));
}

}  // namespace wtrack
