#pragma once

#include <Eigen/Dense>

#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepcon {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted list of 0-based column indices.
using ColumnSet = std::vector<Index>;

/// A (row, column) entry of an M x N matrix. Ordered column-major, i.e. by
/// column first, so that sorted lists follow vec() order.
struct IndexPair {
  Index row = 0;
  Index col = 0;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
  friend std::strong_ordering operator<=>(const IndexPair& a, const IndexPair& b) {
    if (auto c = a.col <=> b.col; c != 0) return c;
    return a.row <=> b.row;
  }
};

/// Set of matrix entries driving the stationarity system (U_T, V_Gamma, ...).
/// Pairs are unique and sorted column-major.
struct ActiveSet {
  std::vector<IndexPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  bool contains(Index row, Index col) const;
  /// Entries of the M x N grid not in this set, column-major.
  std::vector<IndexPair> complement(Index rows, Index cols) const;

  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNotInSet,
  kEnumerationLimit,
  kParse,
  kIo,
  kInfeasible,
  kRankDeficient,
  kNoConvergence,
  kNonFinite,
  kEmptyFeasibleGrid,
  kNoQualifyingTrials,
  kUnsupported,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stepcon
