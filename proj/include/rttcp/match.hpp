#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rttcp {

/// One matched pair, as indices into the left and right input sequences.
struct MatchedPair {
  std::size_t left;
  std::size_t right;
  std::int64_t shift;
};

struct Matching {
  std::vector<MatchedPair> pairs;  ///< ordered by left index
  std::vector<std::size_t> unmatched_left;
  std::vector<std::size_t> unmatched_right;

  std::size_t cardinality() const { return pairs.size(); }
  std::int64_t total_shift() const;
};

/// Minimum-cost assignment of the rows of a cost matrix with rows <= cols.
/// Returns the assigned column of every row.
std::vector<Eigen::Index> hungarian_assign(const Eigen::MatrixXd& cost);

/// Minimum-total-shift maximum-cardinality one-to-one matching between two
/// sorted position sequences, pairing only positions at most `window` apart.
///
/// The bipartite graph splits into independent blocks wherever consecutive
/// positions are more than `window` apart; each block is solved by the
/// Hungarian method with a sentinel cost for out-of-window pairs that is
/// large enough for cardinality to dominate total shift.
Matching min_cost_max_matching(std::span<const std::int64_t> left, std::span<const std::int64_t> right,
                               std::int64_t window);

}  // namespace rttcp
