#include "rttcp/match.hpp"

#include "rttcp/model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace rttcp {

std::int64_t Matching::total_shift() const {
  std::int64_t s = 0;
  for (const auto& p : pairs) s += p.shift;
  return s;
}

// Shortest augmenting path with row/column potentials, O(rows^2 * cols).
std::vector<Eigen::Index> hungarian_assign(const Eigen::MatrixXd& cost) {
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  if (rows > cols) throw ValidationError("hungarian_assign needs rows <= cols");
  if (rows == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based internally; column 0 is the virtual start.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(rows + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cols + 1);
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(cols + 1), 0);
  std::vector<Eigen::Index> way(static_cast<std::size_t>(cols + 1), 0);

  for (Eigen::Index i = 1; i <= rows; ++i) {
    owner[0] = i;
    Eigen::Index j0 = 0;
    Eigen::VectorXd minv = Eigen::VectorXd::Constant(cols + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(cols + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Eigen::Index i0 = owner[static_cast<std::size_t>(j0)];
      double delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[owner[static_cast<std::size_t>(j)]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      owner[static_cast<std::size_t>(j0)] = owner[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(rows), -1);
  for (Eigen::Index j = 1; j <= cols; ++j) {
    if (owner[static_cast<std::size_t>(j)] != 0)
      assignment[static_cast<std::size_t>(owner[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  return assignment;
}

namespace {

std::int64_t distance(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

void match_block(std::span<const std::int64_t> left, std::span<const std::int64_t> right,
                 std::size_t left_offset, std::size_t right_offset, std::int64_t window,
                 std::vector<MatchedPair>& out) {
  if (left.empty() || right.empty()) return;
  const bool transpose = left.size() > right.size();
  const auto& rows = transpose ? right : left;
  const auto& cols = transpose ? left : right;
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(cols.size());
  // Any assignment with one more in-window pair is strictly cheaper.
  const double sentinel = static_cast<double>(std::min(r, c) + 1) * static_cast<double>(window + 1);
  Eigen::MatrixXd cost(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const std::int64_t d = distance(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      cost(i, j) = d <= window ? static_cast<double>(d) : sentinel;
    }
  }
  const auto assignment = hungarian_assign(cost);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::Index j = assignment[static_cast<std::size_t>(i)];
    if (j < 0 || cost(i, j) >= sentinel) continue;
    const auto ri = static_cast<std::size_t>(i);
    const auto cj = static_cast<std::size_t>(j);
    const std::size_t li = transpose ? cj : ri;
    const std::size_t rj = transpose ? ri : cj;
    out.push_back({li + left_offset, rj + right_offset, distance(left[li], right[rj])});
  }
}

}  // namespace

Matching min_cost_max_matching(std::span<const std::int64_t> left, std::span<const std::int64_t> right,
                               std::int64_t window) {
  if (window < 0) throw ValidationError("matching window must be non-negative");
  if (!std::is_sorted(left.begin(), left.end()) || !std::is_sorted(right.begin(), right.end()))
    throw ValidationError("matching inputs must be sorted");

  Matching out;
  std::size_t li = 0;
  std::size_t ri = 0;
  while (li < left.size() || ri < right.size()) {
    // Grow a block until the next position is out of reach of everything in it.
    const std::size_t l0 = li;
    const std::size_t r0 = ri;
    std::int64_t reach = std::numeric_limits<std::int64_t>::min();
    while (li < left.size() || ri < right.size()) {
      const bool take_left = ri >= right.size() || (li < left.size() && left[li] <= right[ri]);
      const std::int64_t p = take_left ? left[li] : right[ri];
      if (li + ri > l0 + r0 && p - reach > window) break;
      reach = p;
      take_left ? ++li : ++ri;
    }
    match_block(left.subspan(l0, li - l0), right.subspan(r0, ri - r0), l0, r0, window, out.pairs);
  }

  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.left < b.left; });
  std::vector<char> left_used(left.size(), 0);
  std::vector<char> right_used(right.size(), 0);
  for (const auto& p : out.pairs) {
    left_used[p.left] = 1;
    right_used[p.right] = 1;
  }
  for (std::size_t i = 0; i < left.size(); ++i)
    if (!left_used[i]) out.unmatched_left.push_back(i);
  for (std::size_t j = 0; j < right.size(); ++j)
    if (!right_used[j]) out.unmatched_right.push_back(j);
  return out;
}

}  // namespace rttcp
