#ifndef PRESERVERS_CANONICAL_HPP
#define PRESERVERS_CANONICAL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "preservers/linmap.hpp"

namespace preservers {

// Parameters (U, V, Q1, Q2) of the block form
//   A  |->  U * blockdiag(A (x) Q1, A^t (x) Q2, 0) * V
// that characterizes disjointness-preserving maps. Q1 or Q2 (or both,
// for the zero map) may be empty.
struct CanonicalForm {
  int m = 0, n = 0, r = 0, s = 0;
  Field field = Field::Real;
  Mat U;                   // r x r unitary
  Mat V;                   // s x s unitary
  std::vector<double> q1;  // positive, non-increasing
  std::vector<double> q2;  // positive, non-increasing

  int block_count() const {
    return static_cast<int>(q1.size() + q2.size());
  }
  void validate() const;  // throws std::invalid_argument on violation
};

enum class FailureKind { NotPreserver, DegenerateDomain, NumericalBreakdown };

struct DecomposeFailure {
  FailureKind kind = FailureKind::NumericalBreakdown;
  // Disjoint input pair whose images fail disjointness (NotPreserver only).
  std::optional<std::pair<Mat, Mat>> witness;
  double residual = 0.0;
};

using DecomposeResult = std::variant<CanonicalForm, DecomposeFailure>;

LinMap build(const CanonicalForm& c);

// Simultaneous block diagonalization of a disjoint pair: Uout^* X Vout
// carries d1 on the leading diagonal cells, Uout^* Y Vout carries d2 on
// the next ones. Throws std::invalid_argument if X, Y are not disjoint.
struct PairBlockSvdResult {
  Mat Uout;  // r x r unitary
  Mat Vout;  // s x s unitary
  std::vector<double> d1;
  std::vector<double> d2;
};
PairBlockSvdResult pair_block_svd(const Mat& X, const Mat& Y,
                                  const Tolerances& tol);

// Normalization of a 2x2-domain restriction whose E_11 / E_22 images are
// already in pair_block_svd shape. On success, left * F_ij * right puts
// all four images into the interleaved sign-split layout, with Q1 holding
// the positive-sign diagonal and Q2 the negative-sign one. Failure
// witnesses live in M_2 coordinates.
struct Normalize2x2Result {
  Mat left;   // r x r unitary update
  Mat right;  // s x s unitary update
  std::vector<double> q1;
  std::vector<double> q2;
};
std::variant<Normalize2x2Result, DecomposeFailure> normalize_2x2(
    const std::array<Mat, 4>& images, const Tolerances& tol);

DecomposeResult decompose(const LinMap& phi, const Tolerances& tol);

// Sampled one-sided refutation oracle: random disjoint rank-one partial
// isometry pairs (plus the structured basis pairs) checked for image
// disjointness. Can refute, never certify.
struct SampledCheck {
  bool ok = true;
  std::optional<std::pair<Mat, Mat>> witness;
};
SampledCheck verify_preserver_sampled(const LinMap& phi, int trials,
                                      std::uint64_t seed,
                                      const Tolerances& tol);

}  // namespace preservers

#endif
