#include "stepcon/step_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stepcon {

bool ActiveSet::contains(Index row, Index col) const {
  return std::binary_search(pairs.begin(), pairs.end(), IndexPair{row, col});
}

std::vector<IndexPair> ActiveSet::complement(Index rows, Index cols) const {
  std::vector<IndexPair> out;
  out.reserve(static_cast<std::size_t>(rows * cols) - pairs.size());
  auto it = pairs.begin();
  for (Index n = 0; n < cols; ++n) {
    for (Index m = 0; m < rows; ++m) {
      const IndexPair p{m, n};
      if (it != pairs.end() && *it == p) {
        ++it;
      } else {
        out.push_back(p);
      }
    }
  }
  return out;
}

void validate_sample_matrix(const Matrix& Z) {
  if (Z.rows() < 1 || Z.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample matrix must have at least one row and column");
  }
  if (!Z.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "sample matrix has non-finite entries");
  }
}

Index step_norm(const Matrix& Z) {
  Index count = 0;
  for (Index n = 0; n < Z.cols(); ++n) {
    if (Z.col(n).maxCoeff() > 0.0) ++count;
  }
  return count;
}

ColumnPartition partition(const Matrix& Z) {
  ColumnPartition p;
  p.col_max.resize(Z.cols());
  p.pos_norms.resize(Z.cols());
  for (Index n = 0; n < Z.cols(); ++n) {
    const double mx = Z.col(n).maxCoeff();
    p.col_max[n] = mx;
    if (mx > 0.0) {
      p.gamma_plus.push_back(n);
      p.pos_norms[n] = Z.col(n).cwiseMax(0.0).norm();
    } else {
      p.pos_norms[n] = 0.0;
      (mx == 0.0 ? p.gamma_zero : p.gamma_minus).push_back(n);
    }
  }
  return p;
}

namespace {

// gamma_plus ordered by (pos_norm desc, index asc).
ColumnSet ranked_positive_columns(const ColumnPartition& p) {
  ColumnSet ranked = p.gamma_plus;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](Index a, Index b) { return p.pos_norms[a] > p.pos_norms[b]; });
  return ranked;
}

ColumnSet build_T(const ColumnPartition& p, const ColumnSet& kept) {
  ColumnSet T;
  std::set_difference(p.gamma_plus.begin(), p.gamma_plus.end(), kept.begin(), kept.end(),
                      std::back_inserter(T));
  T.insert(T.end(), p.gamma_zero.begin(), p.gamma_zero.end());
  std::sort(T.begin(), T.end());
  return T;
}

double binomial(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace

double kth_largest_pos_norm(const Matrix& Z, Index k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const ColumnPartition p = partition(Z);
  const ColumnSet ranked = ranked_positive_columns(p);
  if (static_cast<Index>(ranked.size()) < k) return 0.0;
  return p.pos_norms[ranked[static_cast<std::size_t>(k - 1)]];
}

ActiveSet zero_entries(const Matrix& Z, const ColumnSet& columns) {
  ActiveSet v;
  ColumnSet cols = columns;
  std::sort(cols.begin(), cols.end());
  for (Index n : cols) {
    for (Index m = 0; m < Z.rows(); ++m) {
      if (Z(m, n) == 0.0) v.pairs.push_back({m, n});
    }
  }
  return v;
}

ColumnSet representative_set(const Matrix& Z, Index s) {
  if (s < 0) throw Error(ErrorCode::kInvalidArgument, "s must be nonnegative");
  const ColumnPartition p = partition(Z);
  const ColumnSet ranked = ranked_positive_columns(p);
  const auto r = static_cast<std::size_t>(std::min<Index>(s, static_cast<Index>(ranked.size())));
  ColumnSet kept(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(r));
  std::sort(kept.begin(), kept.end());
  return build_T(p, kept);
}

CandidateSetFamily candidate_sets(const Matrix& Z, Index s, std::size_t max_members) {
  if (s < 0) throw Error(ErrorCode::kInvalidArgument, "s must be nonnegative");
  const ColumnPartition p = partition(Z);
  const ColumnSet ranked = ranked_positive_columns(p);
  const auto r = static_cast<std::size_t>(std::min<Index>(s, static_cast<Index>(ranked.size())));

  CandidateSetFamily fam;
  fam.r = static_cast<Index>(r);
  fam.representative = representative_set(Z, s);
  if (r == ranked.size()) {
    fam.sets.push_back(p.gamma_zero);
    return fam;
  }
  if (r == 0) {
    fam.sets.push_back(build_T(p, {}));
    return fam;
  }

  // Columns strictly above the r-th largest norm are always kept; the r-th
  // slot may be filled by any subset of the tied columns.
  const double threshold = p.pos_norms[ranked[r - 1]];
  ColumnSet forced, tied;
  for (Index n : ranked) {
    if (p.pos_norms[n] > threshold) {
      forced.push_back(n);
    } else if (p.pos_norms[n] == threshold) {
      tied.push_back(n);
    }
  }
  std::sort(tied.begin(), tied.end());
  const std::size_t pick = r - forced.size();
  if (binomial(tied.size(), pick) > static_cast<double>(max_members)) {
    throw Error(ErrorCode::kEnumerationLimit,
                "candidate family exceeds enumeration cap of " + std::to_string(max_members));
  }

  // Enumerate pick-subsets of `tied` in lexicographic order.
  std::vector<bool> mask(tied.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(pick), true);
  do {
    ColumnSet kept = forced;
    for (std::size_t i = 0; i < tied.size(); ++i) {
      if (mask[i]) kept.push_back(tied[i]);
    }
    std::sort(kept.begin(), kept.end());
    fam.sets.push_back(build_T(p, kept));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  std::sort(fam.sets.begin(), fam.sets.end());
  return fam;
}

Matrix clamp_columns(const Matrix& Z, const ColumnSet& T) {
  Matrix P = Z;
  for (Index n : T) P.col(n) = P.col(n).cwiseMin(0.0);
  return P;
}

std::vector<Matrix> project_step(const Matrix& Z, Index s) {
  validate_sample_matrix(Z);
  if (s < 1) throw Error(ErrorCode::kInvalidArgument, "projection requires s >= 1");
  std::vector<Matrix> out;
  for (const ColumnSet& T : candidate_sets(Z, s).sets) out.push_back(clamp_columns(Z, T));
  return out;
}

bool is_projection_of(const Matrix& P, const Matrix& Z, Index s, double tol) {
  if (P.rows() != Z.rows() || P.cols() != Z.cols()) return false;
  for (const Matrix& Q : project_step(Z, s)) {
    if ((Q - P).cwiseAbs().maxCoeff() <= tol) return true;
  }
  return false;
}

bool fixed_point_check(const Matrix& Z, const Matrix& W, double tau, Index s, double tol) {
  if (Z.rows() != W.rows() || Z.cols() != W.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Z and W must have the same shape");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  const ColumnPartition p = partition(Z);
  const auto norm = static_cast<Index>(p.gamma_plus.size());
  if (norm > s) return false;
  if (norm < s) return W.norm() <= tol;

  const double zs = kth_largest_pos_norm(Z, s);
  std::vector<bool> in_zero(static_cast<std::size_t>(Z.cols()), false);
  for (Index n : p.gamma_zero) in_zero[static_cast<std::size_t>(n)] = true;

  double off_sq = 0.0;
  for (Index n = 0; n < Z.cols(); ++n) {
    if (!in_zero[static_cast<std::size_t>(n)]) off_sq += W.col(n).squaredNorm();
  }
  if (std::sqrt(off_sq) > tol) return false;

  for (Index n : p.gamma_zero) {
    for (Index m = 0; m < Z.rows(); ++m) {
      if (W(m, n) < -tol) return false;
      if (std::abs(Z(m, n) * W(m, n)) > tol) return false;
    }
    if (tau * W.col(n).norm() > zs + tol) return false;
  }
  return true;
}

bool normal_cone_member(const Matrix& Z, const Matrix& W, Index s, double tol) {
  if (Z.rows() != W.rows() || Z.cols() != W.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Z and W must have the same shape");
  }
  const ColumnPartition p = partition(Z);
  const auto norm = static_cast<Index>(p.gamma_plus.size());
  if (norm > s) throw Error(ErrorCode::kNotInSet, "Z is not in S");
  if (norm < s) return W.norm() <= tol;

  const ActiveSet v = zero_entries(Z, p.gamma_zero);
  for (Index n = 0; n < Z.cols(); ++n) {
    for (Index m = 0; m < Z.rows(); ++m) {
      if (v.contains(m, n)) {
        if (W(m, n) < -tol) return false;
      } else if (std::abs(W(m, n)) > tol) {
        return false;
      }
    }
  }
  return true;
}

bool tangent_cone_member(const Matrix& Z, const Matrix& D, Index s, double tol) {
  if (Z.rows() != D.rows() || Z.cols() != D.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Z and D must have the same shape");
  }
  const ColumnPartition p = partition(Z);
  const auto norm = static_cast<Index>(p.gamma_plus.size());
  if (norm > s) throw Error(ErrorCode::kNotInSet, "Z is not in S");

  // D is in the union over Gamma in P(gamma_zero, s - |gamma_plus|) iff the
  // columns of gamma_zero carrying a positive direction on a zero entry fit
  // inside the budget: those columns are exactly the minimal admissible Gamma.
  Index violating = 0;
  for (Index n : p.gamma_zero) {
    for (Index m = 0; m < Z.rows(); ++m) {
      if (Z(m, n) == 0.0 && D(m, n) > tol) {
        ++violating;
        break;
      }
    }
  }
  return violating <= s - norm;
}

Matrix snap_to_zero(const Matrix& A, double tol) {
  return A.unaryExpr([tol](double v) { return std::abs(v) <= tol ? 0.0 : v; });
}

}  // namespace stepcon
