#include "preservers/classify.hpp"

#include <algorithm>
#include <cmath>

#include "preservers/genfuzz.hpp"

namespace preservers {

namespace {

constexpr double kStructEps = 1e-6;    // structural parameter comparisons
constexpr double kFunctionalEps = 1e-8;  // sampled identity residuals
constexpr std::uint64_t kClassifySeed = 0x5EEDC1A55ULL;

ClassifierVerdict inapplicable(std::string detail) {
  ClassifierVerdict v;
  v.verdict = Verdict::Inapplicable;
  v.detail = std::move(detail);
  return v;
}

ClassifierVerdict yes_with(CanonicalForm cert, std::string detail = {}) {
  ClassifierVerdict v;
  v.verdict = Verdict::Yes;
  v.detail = std::move(detail);
  v.certificate = std::move(cert);
  return v;
}

ClassifierVerdict no_with(std::string detail, std::vector<Mat> witness) {
  ClassifierVerdict v;
  v.verdict = Verdict::No;
  v.detail = std::move(detail);
  v.witness = std::move(witness);
  return v;
}

// Common translation of decompose failures. Returns nothing when the
// caller holds a canonical form and should continue.
std::optional<ClassifierVerdict> verdict_of_failure(
    const DecomposeResult& res) {
  const auto* fail = std::get_if<DecomposeFailure>(&res);
  if (!fail) return std::nullopt;
  switch (fail->kind) {
    case FailureKind::DegenerateDomain:
      return inapplicable("DEGENERATE_DOMAIN");
    case FailureKind::NotPreserver:
      return no_with("NOT_PRESERVER",
                     {fail->witness->first, fail->witness->second});
    case FailureKind::NumericalBreakdown:
    default:
      return inapplicable("NUMERICAL_BREAKDOWN");
  }
}

double sum_q(const CanonicalForm& c) {
  double t = 0.0;
  for (double v : c.q1) t += v;
  for (double v : c.q2) t += v;
  return t;
}

bool q_all_ones(const CanonicalForm& c) {
  for (double v : c.q1)
    if (std::abs(v - 1.0) > kStructEps) return false;
  for (double v : c.q2)
    if (std::abs(v - 1.0) > kStructEps) return false;
  return true;
}

// Rank-one or rank-two sample with log-uniform weights.
Mat sample_low_rank(int m, int n, Field field, int rank, Rng& rng) {
  if (rank >= 2 && std::min(m, n) >= 2) return random_rank_two(m, n, field, rng);
  Mat u = random_unitary(m, field, rng);
  Mat v = random_unitary(n, field, rng);
  cxd w = rng.log_uniform(0.1, 10.0);
  return Mat(field, w * (u.a.leftCols(1) * v.a.leftCols(1).adjoint()));
}

int cross_check_trials(const Tolerances& tol) {
  return std::clamp(tol.sample_trials, 8, 200);
}

}  // namespace

ClassifierVerdict check_zero_triple_preserver(const LinMap& phi,
                                              const Tolerances& tol) {
  tol.validate();
  DecomposeResult res = decompose(phi, tol);
  if (const auto* fail = std::get_if<DecomposeFailure>(&res)) {
    if (fail->kind == FailureKind::NotPreserver) {
      // A disjoint pair (A, B) whose images stay entangled also breaks
      // zero-triple preservation at (A, A, B).
      const Mat& A = fail->witness->first;
      const Mat& B = fail->witness->second;
      Mat fa = apply(phi, A), fb = apply(phi, B);
      double scale = std::max(1.0, fa.max_norm() * fa.max_norm() *
                                       fb.max_norm());
      if (jordan_triple(fa, fa, fb).max_norm() > kFunctionalEps * scale)
        return no_with("NOT_PRESERVER", {A, A, B});
      return inapplicable("NUMERICAL_BREAKDOWN");
    }
    return *verdict_of_failure(res);
  }
  CanonicalForm cert = std::get<CanonicalForm>(std::move(res));

  // Sampled cross-check: vanishing triples built from disjoint pairs must
  // stay vanishing under the map.
  int trials = cross_check_trials(tol);
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(kClassifySeed, 11, t);
    auto [x, y] = random_disjoint_pair(phi.m, phi.n, phi.field, rng);
    Mat fx = apply(phi, x), fy = apply(phi, y);
    double scale =
        std::max(1.0, fx.max_norm() * fx.max_norm() * fy.max_norm());
    if (jordan_triple(fx, fx, fy).max_norm() > kFunctionalEps * scale)
      return inapplicable("NUMERICAL_BREAKDOWN");
  }
  return yes_with(std::move(cert));
}

ClassifierVerdict check_triple_homomorphism(const LinMap& phi,
                                            const Tolerances& tol) {
  tol.validate();
  DecomposeResult res = decompose(phi, tol);
  if (auto v = verdict_of_failure(res)) return *v;
  CanonicalForm cert = std::get<CanonicalForm>(std::move(res));

  Mat e11 = Mat::unit(phi.field, phi.m, phi.n, 0, 0);
  Mat fe = apply(phi, e11);
  double fe_scale =
      std::max(1.0, fe.max_norm() * fe.max_norm() * fe.max_norm());
  double e11_gap = (apply(phi, cube(e11)) - cube(fe)).max_norm();

  if (!q_all_ones(cert)) {
    // Non-unit weights break the cube identity on a basis matrix.
    if (e11_gap > kFunctionalEps * fe_scale)
      return no_with("Q_NOT_IDENTITY", {e11});
    return inapplicable("NUMERICAL_BREAKDOWN");
  }
  if (e11_gap > kFunctionalEps * fe_scale)
    return inapplicable("NUMERICAL_BREAKDOWN");

  int trials = cross_check_trials(tol);
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(kClassifySeed, 13, t);
    Mat a = random_gaussian(phi.m, phi.n, phi.field, rng);
    Mat b = random_gaussian(phi.m, phi.n, phi.field, rng);
    Mat c = random_gaussian(phi.m, phi.n, phi.field, rng);
    Mat lhs = apply(phi, jordan_triple(a, b, c));
    Mat rhs = jordan_triple(apply(phi, a), apply(phi, b), apply(phi, c));
    double scale = std::max({1.0, lhs.max_norm(), rhs.max_norm()});
    if ((lhs - rhs).max_norm() > kFunctionalEps * scale)
      return inapplicable("NUMERICAL_BREAKDOWN");
  }
  return yes_with(std::move(cert));
}

ClassifierVerdict check_partial_isometry_preserver(const LinMap& phi,
                                                   const Tolerances& tol) {
  tol.validate();
  DecomposeResult res = decompose(phi, tol);
  if (auto v = verdict_of_failure(res)) return *v;
  CanonicalForm cert = std::get<CanonicalForm>(std::move(res));

  // For a structurally admissible map, preserving partial isometries is
  // equivalent to Phi(E_11) being one.
  Tolerances ptol = tol;
  ptol.residual = kStructEps;
  Mat e11 = Mat::unit(phi.field, phi.m, phi.n, 0, 0);
  if (!is_partial_isometry(apply(phi, e11), ptol))
    return no_with("IMAGE_NOT_PARTIAL_ISOMETRY", {e11});

  int trials = cross_check_trials(tol);
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(kClassifySeed, 17, t);
    int rank = rng.uniform_int(0, std::min(phi.m, phi.n));
    Mat p = random_partial_isometry(phi.m, phi.n, rank, phi.field, rng);
    if (!is_partial_isometry(apply(phi, p), ptol))
      return inapplicable("NUMERICAL_BREAKDOWN");
  }
  return yes_with(std::move(cert));
}

ClassifierVerdict check_schatten_isometry(const LinMap& phi, double p,
                                          const Tolerances& tol) {
  tol.validate();
  if (!(p > 0.0)) throw std::invalid_argument("schatten exponent must be > 0");
  if (std::abs(p - 2.0) < 1e-12) return inapplicable("P_EQUALS_TWO");

  DecomposeResult res = decompose(phi, tol);
  if (auto v = verdict_of_failure(res)) return *v;
  CanonicalForm cert = std::get<CanonicalForm>(std::move(res));

  double sp = 0.0;
  for (double v : cert.q1) sp += std::pow(v, p);
  for (double v : cert.q2) sp += std::pow(v, p);
  sp = sp > 0.0 ? std::pow(sp, 1.0 / p) : 0.0;
  bool structural = std::abs(sp - 1.0) <= kStructEps;

  bool sampled = true;
  Mat bad;
  int trials = cross_check_trials(tol);
  for (int t = 0; t < trials && sampled; ++t) {
    Rng rng = Rng::derive(kClassifySeed, 19, t);
    Mat a = sample_low_rank(phi.m, phi.n, phi.field, t % 2 ? 1 : 2, rng);
    double na = schatten_norm(a, p);
    double nf = schatten_norm(apply(phi, a), p);
    if (std::abs(nf - na) > 1e-9 * std::max(1.0, na)) {
      sampled = false;
      bad = a;
    }
  }
  if (structural != sampled) return inapplicable("NUMERICAL_BREAKDOWN");
  if (!structural)
    return no_with("SP_NOT_ONE", {Mat::unit(phi.field, phi.m, phi.n, 0, 0)});
  return yes_with(std::move(cert));
}

ClassifierVerdict check_kyfan_isometry(const LinMap& phi, int k, int kprime,
                                       const Tolerances& tol) {
  tol.validate();
  if (kprime < 2 || kprime > std::min(phi.m, phi.n))
    throw std::invalid_argument("kprime out of range");
  if (k < 1 || k > std::min(phi.r, phi.s))
    throw std::invalid_argument("k out of range");

  const bool real = phi.field == Field::Real;
  DecomposeResult res = decompose(phi, tol);
  if (std::holds_alternative<DecomposeFailure>(res)) {
    if (real) {
      // Only the sufficient direction is available over the reals, so a
      // structural failure does not refute the norm identity.
      const auto& fail = std::get<DecomposeFailure>(res);
      if (fail.kind == FailureKind::DegenerateDomain)
        return inapplicable("DEGENERATE_DOMAIN");
      return inapplicable("REAL_FIELD_SUFFICIENT_ONLY");
    }
    return *verdict_of_failure(res);
  }
  CanonicalForm cert = std::get<CanonicalForm>(std::move(res));

  bool k_large_enough = k >= 2 * cert.block_count();
  bool trace_one = std::abs(sum_q(cert) - 1.0) <= kStructEps;
  bool structural = k_large_enough && trace_one;

  bool sampled = true;
  Mat bad;
  int trials = cross_check_trials(tol);
  for (int t = 0; t < trials && sampled; ++t) {
    Rng rng = Rng::derive(kClassifySeed, 23, t);
    Mat a = sample_low_rank(phi.m, phi.n, phi.field, t % 2 ? 1 : 2, rng);
    double na = kyfan_norm(a, kprime);
    double nf = kyfan_norm(apply(phi, a), k);
    if (std::abs(nf - na) > 1e-9 * std::max(1.0, na)) {
      sampled = false;
      bad = a;
    }
  }

  if (real) {
    if (structural && sampled)
      return yes_with(std::move(cert), "REAL_FIELD_SUFFICIENT_ONLY");
    return inapplicable("REAL_FIELD_SUFFICIENT_ONLY");
  }
  if (structural != sampled) return inapplicable("NUMERICAL_BREAKDOWN");
  if (!structural) {
    std::string why = !k_large_enough ? "K_TOO_SMALL" : "TRACE_NOT_ONE";
    return no_with(std::move(why), {bad});
  }
  return yes_with(std::move(cert));
}

}  // namespace preservers
