#ifndef PRESERVERS_CLASSIFY_HPP
#define PRESERVERS_CLASSIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "preservers/canonical.hpp"

namespace preservers {

enum class Verdict { Yes, No, Inapplicable };

// Uniform classifier answer. Yes carries the structural certificate; No
// carries a concrete witness tuple when one exists; Inapplicable explains
// itself through detail.
struct ClassifierVerdict {
  Verdict verdict = Verdict::Inapplicable;
  std::string detail;  // machine-readable reason code, empty for plain Yes
  std::optional<CanonicalForm> certificate;
  std::vector<Mat> witness;
};

// Does Phi annihilate every Jordan triple product that vanishes, i.e.
// {A,B,C} = 0  =>  {Phi A, Phi B, Phi C} = 0?
ClassifierVerdict check_zero_triple_preserver(const LinMap& phi,
                                              const Tolerances& tol);

// Is Phi a triple homomorphism, Phi{A,B,C} = {Phi A, Phi B, Phi C}?
ClassifierVerdict check_triple_homomorphism(const LinMap& phi,
                                            const Tolerances& tol);

// Does Phi send partial isometries to partial isometries?
ClassifierVerdict check_partial_isometry_preserver(const LinMap& phi,
                                                   const Tolerances& tol);

// Is Phi a Schatten p-norm isometry on matrices of rank <= 2? Requires
// p > 0 (throws otherwise); p = 2 is out of scope and yields Inapplicable.
ClassifierVerdict check_schatten_isometry(const LinMap& phi, double p,
                                          const Tolerances& tol);

// Does F_k(Phi(A)) = F_kprime(A) hold for all A of rank <= kprime, where
// F_k is the Ky Fan k-norm? Needs 2 <= kprime <= min(m,n) and
// 1 <= k <= min(r,s); throws on out-of-range arguments. Over the reals
// only the sufficient direction is available.
ClassifierVerdict check_kyfan_isometry(const LinMap& phi, int k, int kprime,
                                       const Tolerances& tol);

}  // namespace preservers

#endif
