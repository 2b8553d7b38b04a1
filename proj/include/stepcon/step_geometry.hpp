#pragma once

// Set calculus for S = { Z : ||Z||_0^+ <= s }, where ||Z||_0^+ counts the
// columns of Z with a strictly positive maximum entry.
//
// Column indices are 0-based throughout. Column maxima are compared to zero
// exactly; callers that want a zero band round their input first (see
// snap_to_zero).

#include "stepcon/types.hpp"

#include <cstddef>
#include <vector>

namespace stepcon {

struct ColumnPartition {
  ColumnSet gamma_plus;   // column max > 0
  ColumnSet gamma_zero;   // column max == 0
  ColumnSet gamma_minus;  // column max < 0
  Vector col_max;         // length N
  Vector pos_norms;       // ||(Z_:n)^+||, length N
};

/// Members of the candidate family T(Z; s). Each member is the set of columns
/// that the projection clamps to their nonpositive part.
struct CandidateSetFamily {
  std::vector<ColumnSet> sets;
  Index r = 0;  // min(s, |gamma_plus|)
  /// Deterministic member: keep the r columns of largest positive-part norm,
  /// ties broken toward the lower column index.
  ColumnSet representative;
};

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 20;

/// Throws kInvalidArgument on an empty matrix or non-finite entries.
void validate_sample_matrix(const Matrix& Z);

Index step_norm(const Matrix& Z);
ColumnPartition partition(const Matrix& Z);

/// k-th largest value of ||(Z_:n)^+|| over all columns (k >= 1); zero when
/// fewer than k columns have a positive part.
double kth_largest_pos_norm(const Matrix& Z, Index k);

/// V_Gamma: entries (m, n) with Z_mn == 0 and n in `columns`.
ActiveSet zero_entries(const Matrix& Z, const ColumnSet& columns);

ColumnSet representative_set(const Matrix& Z, Index s);
CandidateSetFamily candidate_sets(const Matrix& Z, Index s,
                                  std::size_t max_members = kDefaultEnumerationCap);

/// [ (Z_:T)^-  Z_:Tbar ] for one candidate set T.
Matrix clamp_columns(const Matrix& Z, const ColumnSet& T);

/// All Frobenius-nearest points of S, one per member of T(Z; s).
std::vector<Matrix> project_step(const Matrix& Z, Index s);

/// True when P is (entrywise within tol) one of the projections of Z onto S.
bool is_projection_of(const Matrix& P, const Matrix& Z, Index s, double tol);

/// Closed-form test of Z in Pi_S(Z + tau W).
bool fixed_point_check(const Matrix& Z, const Matrix& W, double tau, Index s, double tol);

/// Frechet normal cone of S at Z. Throws kNotInSet when ||Z||_0^+ > s.
bool normal_cone_member(const Matrix& Z, const Matrix& W, Index s, double tol);

/// Bouligand tangent cone of S at Z. Throws kNotInSet when ||Z||_0^+ > s.
bool tangent_cone_member(const Matrix& Z, const Matrix& D, Index s, double tol);

/// Copy of A with every entry of magnitude <= tol replaced by exact zero.
Matrix snap_to_zero(const Matrix& A, double tol);

}  // namespace stepcon
