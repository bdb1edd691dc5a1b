#include "preservers/canonical.hpp"

#include <algorithm>
#include <cmath>

#include "preservers/genfuzz.hpp"

namespace preservers {

namespace {

// Relative thresholds of the recovery pipeline. Structural checks are
// deliberately looser than the final post-verification: anything that
// slips through here is caught by maps_equal at the end.
constexpr double kStructEps = 1e-6;
constexpr double kClusterGap = 1e-7;
constexpr double kSignSnap = 1e-6;
constexpr double kGramEps = 1e-6;

Eigen::MatrixXcd diag_of(const std::vector<double>& d) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

void snap_real_inplace(Mat& m) {
  if (m.field == Field::Real) m.a = m.a.real().cast<cxd>();
}

// Symmetric (Loewdin) orthonormalization followed by completion to a full
// unitary. Columns of B must already be orthonormal up to kGramEps.
Eigen::MatrixXcd complete_unitary(const Eigen::MatrixXcd& B, Eigen::Index r) {
  Eigen::Index t = B.cols();
  if (t == 0) return Eigen::MatrixXcd::Identity(r, r);
  Eigen::MatrixXcd gram = B.adjoint() * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  Eigen::VectorXd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < 0.25)
      throw std::invalid_argument("complete_unitary: rank-deficient frame");
    vals(i) = 1.0 / std::sqrt(vals(i));
  }
  Eigen::MatrixXcd ortho =
      B * es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
  if (t == r) return ortho;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ortho);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(r, r);
  Eigen::MatrixXcd full(r, r);
  full.leftCols(t) = ortho;
  full.rightCols(r - t) = q.rightCols(r - t);
  return full;
}

bool block_is_zero(const Eigen::MatrixXcd& m, Eigen::Index i0, Eigen::Index j0,
                   Eigen::Index h, Eigen::Index w, double thr) {
  if (h <= 0 || w <= 0) return true;
  return m.block(i0, j0, h, w).cwiseAbs().maxCoeff() <= thr;
}

// Multiplicity clusters of a descending positive diagonal, relative gap
// kClusterGap against the leading entry.
std::vector<std::pair<int, int>> clusters_of(const std::vector<double>& d) {
  std::vector<std::pair<int, int>> out;
  int k = static_cast<int>(d.size());
  int start = 0;
  for (int i = 1; i <= k; ++i) {
    if (i == k || d[i - 1] - d[i] > kClusterGap * d[0]) {
      out.push_back({start, i});
      start = i;
    }
  }
  return out;
}

Mat make2(Field f, double a, double b, double c, double d) {
  Eigen::MatrixXcd m(2, 2);
  m << a, b, c, d;
  return Mat(f, std::move(m));
}

// Disjoint test pairs from the constructive proof, at gamma = 2.
std::vector<std::pair<Mat, Mat>> proof_pairs_2x2(Field f) {
  return {
      {make2(f, 2, 1, 1, 0.5), make2(f, 0.5, -1, -1, 2)},
      {make2(f, 2, -1, 1, -0.5), make2(f, 0.5, 1, -1, -2)},
      {make2(f, 1, 0, 0, 0), make2(f, 0, 0, 0, 1)},
      {make2(f, 0, 1, 0, 0), make2(f, 0, 0, 1, 0)},
      {make2(f, 1, 1, 1, 1), make2(f, 1, -1, -1, 1)},
  };
}

DecomposeFailure not_preserver(Mat a, Mat b, double residual) {
  DecomposeFailure f;
  f.kind = FailureKind::NotPreserver;
  f.witness = {std::move(a), std::move(b)};
  f.residual = residual;
  return f;
}

DecomposeFailure breakdown(double residual) {
  DecomposeFailure f;
  f.kind = FailureKind::NumericalBreakdown;
  f.residual = residual;
  return f;
}

Mat embed_2x2(const Mat& small, int m, int n, int i, int k, int j, int l) {
  Mat out = Mat::zero(small.field, m, n);
  out.a(i, j) = small.a(0, 0);
  out.a(i, l) = small.a(0, 1);
  out.a(k, j) = small.a(1, 0);
  out.a(k, l) = small.a(1, 1);
  return out;
}

// Refutation search: structured basis pairs, the proof's 2x2 test pairs on
// every sub-span, then random rank-one sampling. Returns NotPreserver with
// a verified witness, or NumericalBreakdown.
DecomposeFailure refute_or_breakdown(const LinMap& phi, const Tolerances& tol,
                                     double residual_hint) {
  auto try_pair = [&](const Mat& A, const Mat& B) -> std::optional<double> {
    if (!is_disjoint(A, B, tol)) return std::nullopt;
    Mat fa = apply(phi, A), fb = apply(phi, B);
    if (is_disjoint(fa, fb, tol)) return std::nullopt;
    return disjoint_residual(fa, fb);
  };

  for (int i = 0; i < phi.m; ++i)
    for (int j = 0; j < phi.n; ++j)
      for (int k = i + 1; k < phi.m; ++k)
        for (int l = 0; l < phi.n; ++l) {
          if (l == j) continue;
          Mat A = Mat::unit(phi.field, phi.m, phi.n, i, j);
          Mat B = Mat::unit(phi.field, phi.m, phi.n, k, l);
          if (auto res = try_pair(A, B)) return not_preserver(A, B, *res);
        }

  for (int i = 0; i < phi.m; ++i)
    for (int k = i + 1; k < phi.m; ++k)
      for (int j = 0; j < phi.n; ++j)
        for (int l = j + 1; l < phi.n; ++l)
          for (auto& [z1, z2] : proof_pairs_2x2(phi.field)) {
            Mat A = embed_2x2(z1, phi.m, phi.n, i, k, j, l);
            Mat B = embed_2x2(z2, phi.m, phi.n, i, k, j, l);
            if (auto res = try_pair(A, B)) return not_preserver(A, B, *res);
          }

  SampledCheck sc = verify_preserver_sampled(phi, 500, 0xC0FFEEULL, tol);
  if (!sc.ok) {
    const auto& [A, B] = *sc.witness;
    Mat fa = apply(phi, A), fb = apply(phi, B);
    return not_preserver(A, B, disjoint_residual(fa, fb));
  }
  return breakdown(residual_hint);
}

}  // namespace

void CanonicalForm::validate() const {
  if (m < 1 || n < 1 || r < 1 || s < 1)
    throw std::invalid_argument("canonical form: dimensions must be positive");
  int nq1 = static_cast<int>(q1.size()), nq2 = static_cast<int>(q2.size());
  if (r < nq1 * m + nq2 * n || s < nq1 * n + nq2 * m)
    throw std::invalid_argument("canonical form: blocks do not fit in (r, s)");
  auto check_q = [](const std::vector<double>& q) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (!(q[i] > 0.0))
        throw std::invalid_argument("canonical form: Q entries must be positive");
      if (i > 0 && q[i] > q[i - 1])
        throw std::invalid_argument("canonical form: Q entries must descend");
    }
  };
  check_q(q1);
  check_q(q2);
  if (U.rows() != r || U.cols() != r || V.rows() != s || V.cols() != s)
    throw std::invalid_argument("canonical form: U/V shape mismatch");
  auto unitary = [](const Mat& W) {
    return (W.a.adjoint() * W.a -
            Eigen::MatrixXcd::Identity(W.rows(), W.rows()))
               .cwiseAbs()
               .maxCoeff() <= 1e-8;
  };
  if (!unitary(U) || !unitary(V))
    throw std::invalid_argument("canonical form: U or V not unitary");
  if (U.field != field || V.field != field)
    throw std::invalid_argument("canonical form: field mismatch");
}

LinMap build(const CanonicalForm& c) {
  c.validate();
  int nq1 = static_cast<int>(c.q1.size()), nq2 = static_cast<int>(c.q2.size());
  std::vector<Mat> images;
  images.reserve(c.m * c.n);
  for (int i = 0; i < c.m; ++i)
    for (int j = 0; j < c.n; ++j) {
      Eigen::MatrixXcd mid = Eigen::MatrixXcd::Zero(c.r, c.s);
      for (int t = 0; t < nq1; ++t)
        mid(i * nq1 + t, j * nq1 + t) = c.q1[t];
      for (int t = 0; t < nq2; ++t)
        mid(c.m * nq1 + j * nq2 + t, c.n * nq1 + i * nq2 + t) = c.q2[t];
      Mat img(c.field, c.U.a * mid * c.V.a);
      snap_real_inplace(img);
      images.push_back(std::move(img));
    }
  return from_images(c.m, c.n, c.r, c.s, c.field, std::move(images));
}

PairBlockSvdResult pair_block_svd(const Mat& X, const Mat& Y,
                                  const Tolerances& tol) {
  require_compatible(X, Y);
  if (!is_disjoint(X, Y, tol))
    throw std::invalid_argument("pair_block_svd: inputs are not disjoint");
  SvdResult sx = compact_svd(X, tol);
  SvdResult sy = compact_svd(Y, tol);
  Eigen::Index r = X.rows(), s = X.cols();
  Eigen::Index k1 = sx.left.cols(), k2 = sy.left.cols();

  Eigen::MatrixXcd lcols(r, k1 + k2), rcols(s, k1 + k2);
  lcols.leftCols(k1) = sx.left.a;
  lcols.rightCols(k2) = sy.left.a;
  rcols.leftCols(k1) = sx.right.a;
  rcols.rightCols(k2) = sy.right.a;

  PairBlockSvdResult out;
  out.Uout = Mat(X.field, complete_unitary(lcols, r));
  out.Vout = Mat(X.field, complete_unitary(rcols, s));
  snap_real_inplace(out.Uout);
  snap_real_inplace(out.Vout);
  out.d1 = std::move(sx.singulars);
  out.d2 = std::move(sy.singulars);
  return out;
}

std::variant<Normalize2x2Result, DecomposeFailure> normalize_2x2(
    const std::array<Mat, 4>& images, const Tolerances& tol) {
  const Field field = images[0].field;
  const Eigen::Index r = images[0].rows(), s = images[0].cols();
  auto zpair = proof_pairs_2x2(field);

  // Read D1, D2 off the diagonal-block shape of F11, F22.
  double scale = 0.0;
  for (const Mat& f : images) scale = std::max(scale, f.max_norm());
  if (scale <= 0.0)
    throw std::invalid_argument("normalize_2x2: zero restriction map");
  double thr = kStructEps * scale;

  const Eigen::MatrixXcd& f11 = images[0].a;
  const Eigen::MatrixXcd& f22 = images[3].a;
  Eigen::Index h = std::min(r, s);
  std::vector<double> d1, d2;
  Eigen::Index pos = 0;
  while (pos < h && std::abs(f11(pos, pos)) > thr)
    d1.push_back(f11(pos, pos).real()), ++pos;
  Eigen::Index k1 = pos;
  while (pos < h && std::abs(f22(pos, pos)) > thr)
    d2.push_back(f22(pos, pos).real()), ++pos;
  Eigen::Index k2 = pos - k1;

  // Shape preconditions inherited from pair_block_svd.
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < s; ++j) {
      bool on_d1 = i == j && i < k1;
      bool on_d2 = i == j && i >= k1 && i < k1 + k2;
      if (!on_d1 && std::abs(f11(i, j)) > thr)
        throw std::invalid_argument("normalize_2x2: E_11 image not in shape");
      if (!on_d2 && std::abs(f22(i, j)) > thr)
        throw std::invalid_argument("normalize_2x2: E_22 image not in shape");
    }

  // Structure forces equal rank and spectrum for the two diagonal images.
  if (k1 != k2) return not_preserver(zpair[0].first, zpair[0].second, scale);
  const Eigen::Index k = k1;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(d1[i] - d2[i]) > thr)
      return not_preserver(zpair[0].first, zpair[0].second,
                           std::abs(d1[i] - d2[i]));
  if (r < 2 * k || s < 2 * k)
    return not_preserver(zpair[0].first, zpair[0].second, scale);

  const std::vector<double>& d = d1;
  auto clusters = clusters_of(d);
  Eigen::MatrixXcd dinv = Eigen::MatrixXcd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) dinv(i, i) = 1.0 / d[i];

  auto off_cluster_small = [&](const Eigen::MatrixXcd& w) {
    for (auto [a0, a1] : clusters)
      for (auto [b0, b1] : clusters) {
        if (a0 == b0) continue;
        if (!block_is_zero(w, a0, b0, a1 - a0, b1 - b0, kStructEps)) return false;
      }
    return true;
  };
  auto check_cross_shape = [&](const Eigen::MatrixXcd& B,
                               bool anti) -> std::optional<DecomposeFailure> {
    // Expected support: k x k blocks at (0,1) and (1,0) only, adjoint
    // (resp. negated adjoint) of each other.
    if (!block_is_zero(B, 0, 0, k, k, thr) ||
        !block_is_zero(B, k, k, k, k, thr) ||
        !block_is_zero(B, 0, 2 * k, k, s - 2 * k, thr) ||
        !block_is_zero(B, k, 2 * k, k, s - 2 * k, thr) ||
        !block_is_zero(B, 2 * k, 0, r - 2 * k, s, thr))
      return not_preserver(zpair[anti ? 1 : 0].first,
                           zpair[anti ? 1 : 0].second, scale);
    Eigen::MatrixXcd b12 = B.block(0, k, k, k);
    Eigen::MatrixXcd b21 = B.block(k, 0, k, k);
    double dev = (b21 - (anti ? -1.0 : 1.0) * b12.adjoint().eval())
                     .cwiseAbs()
                     .maxCoeff();
    if (dev > thr)
      return not_preserver(zpair[anti ? 1 : 0].first,
                           zpair[anti ? 1 : 0].second, dev);
    return std::nullopt;
  };
  auto unitary_dev = [&](const Eigen::MatrixXcd& w) {
    return (w.adjoint() * w - Eigen::MatrixXcd::Identity(k, k))
        .cwiseAbs()
        .maxCoeff();
  };

  Eigen::MatrixXcd F11 = f11, F12 = images[1].a, F21 = images[2].a, F22 = f22;

  // Step 1: B12 = D W with W block unitary per multiplicity cluster;
  // conjugating by W makes the symmetric part exactly D.
  Eigen::MatrixXcd B = F12 + F21;
  if (auto fail = check_cross_shape(B, false)) return *fail;
  Eigen::MatrixXcd W = dinv * B.block(0, k, k, k);
  if (unitary_dev(W) > kStructEps || !off_cluster_small(W))
    return not_preserver(zpair[0].first, zpair[0].second, unitary_dev(W));

  Eigen::MatrixXcd left1 = Eigen::MatrixXcd::Identity(r, r);
  left1.topLeftCorner(k, k) = W.adjoint();
  Eigen::MatrixXcd right1 = Eigen::MatrixXcd::Identity(s, s);
  right1.topLeftCorner(k, k) = W;
  F11 = left1 * F11 * right1;
  F12 = left1 * F12 * right1;
  F21 = left1 * F21 * right1;
  F22 = left1 * F22 * right1;

  // Step 2: C12 = D V with V a Hermitian unitary (eigenvalues +-1);
  // block-diagonalize it per cluster.
  Eigen::MatrixXcd C = F12 - F21;
  if (auto fail = check_cross_shape(C, true)) return *fail;
  Eigen::MatrixXcd Vmat = dinv * C.block(0, k, k, k);
  if (unitary_dev(Vmat) > kStructEps || !off_cluster_small(Vmat))
    return not_preserver(zpair[1].first, zpair[1].second, unitary_dev(Vmat));
  double herm_dev = (Vmat - Vmat.adjoint().eval()).cwiseAbs().maxCoeff();
  if (herm_dev > kSignSnap)
    return not_preserver(zpair[4].first, zpair[4].second, herm_dev);

  Eigen::MatrixXcd R2 = Eigen::MatrixXcd::Zero(k, k);
  std::vector<int> sign(k, 1);
  for (auto [c0, c1] : clusters) {
    Eigen::Index u = c1 - c0;
    Eigen::MatrixXcd vj =
        0.5 * (Vmat.block(c0, c0, u, u) +
               Vmat.block(c0, c0, u, u).adjoint().eval());
    if (field == Field::Real) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vj.real());
      for (Eigen::Index t = 0; t < u; ++t) {
        double lam = es.eigenvalues()(t);
        if (std::abs(std::abs(lam) - 1.0) > kSignSnap)
          return not_preserver(zpair[4].first, zpair[4].second,
                               std::abs(std::abs(lam) - 1.0));
        sign[c0 + t] = lam > 0 ? 1 : -1;
      }
      R2.block(c0, c0, u, u) = es.eigenvectors().cast<cxd>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(vj);
      for (Eigen::Index t = 0; t < u; ++t) {
        double lam = es.eigenvalues()(t);
        if (std::abs(std::abs(lam) - 1.0) > kSignSnap)
          return not_preserver(zpair[4].first, zpair[4].second,
                               std::abs(std::abs(lam) - 1.0));
        sign[c0 + t] = lam > 0 ? 1 : -1;
      }
      R2.block(c0, c0, u, u) = es.eigenvectors();
    }
  }

  Eigen::MatrixXcd left2 = Eigen::MatrixXcd::Identity(r, r);
  left2.topLeftCorner(k, k) = R2.adjoint();
  left2.block(k, k, k, k) = R2.adjoint();
  Eigen::MatrixXcd right2 = Eigen::MatrixXcd::Identity(s, s);
  right2.topLeftCorner(k, k) = R2;
  right2.block(k, k, k, k) = R2;
  F11 = left2 * F11 * right2;
  F12 = left2 * F12 * right2;
  F21 = left2 * F21 * right2;
  F22 = left2 * F22 * right2;

  // Step 3: permutation splitting the +1 signs (Q1) from the -1 signs (Q2),
  // each kept in descending order (stable by original index).
  std::vector<int> order;
  std::vector<double> q1, q2;
  auto by_weight = [&](int a, int b) {
    return d[a] != d[b] ? d[a] > d[b] : a < b;
  };
  std::vector<int> plus, minus;
  for (Eigen::Index i = 0; i < k; ++i)
    (sign[i] > 0 ? plus : minus).push_back(static_cast<int>(i));
  std::sort(plus.begin(), plus.end(), by_weight);
  std::sort(minus.begin(), minus.end(), by_weight);
  for (int i : plus) order.push_back(i), q1.push_back(d[i]);
  for (int i : minus) order.push_back(i), q2.push_back(d[i]);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(k, k);
  for (Eigen::Index p = 0; p < k; ++p) P(order[p], p) = 1.0;

  Eigen::MatrixXcd left3 = Eigen::MatrixXcd::Identity(r, r);
  left3.topLeftCorner(k, k) = P.transpose();
  left3.block(k, k, k, k) = P.transpose();
  Eigen::MatrixXcd right3 = Eigen::MatrixXcd::Identity(s, s);
  right3.topLeftCorner(k, k) = P;
  right3.block(k, k, k, k) = P;
  F11 = left3 * F11 * right3;
  F12 = left3 * F12 * right3;
  F21 = left3 * F21 * right3;
  F22 = left3 * F22 * right3;

  // Final layout check against the expected sign-split form.
  Eigen::Index nk1 = static_cast<Eigen::Index>(q1.size());
  Eigen::Index nk2 = static_cast<Eigen::Index>(q2.size());
  auto expected = [&](int i, int j) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(r, s);
    for (Eigen::Index t = 0; t < nk1; ++t) e(i * k + t, j * k + t) = q1[t];
    for (Eigen::Index t = 0; t < nk2; ++t)
      e(j * k + nk1 + t, i * k + nk1 + t) = q2[t];
    return e;
  };
  const Eigen::MatrixXcd* final_imgs[4] = {&F11, &F12, &F21, &F22};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      worst = std::max(worst, (*final_imgs[i * 2 + j] - expected(i, j))
                                  .cwiseAbs()
                                  .maxCoeff());
  if (worst > thr) return breakdown(worst);

  Normalize2x2Result out;
  out.left = Mat(field, left3 * left2 * left1);
  out.right = Mat(field, right1 * right2 * right3);
  snap_real_inplace(out.left);
  snap_real_inplace(out.right);
  out.q1 = std::move(q1);
  out.q2 = std::move(q2);
  return out;
}

DecomposeResult decompose(const LinMap& phi, const Tolerances& tol) {
  tol.validate();
  if (phi.m < 2 || phi.n < 2) {
    DecomposeFailure f;
    f.kind = FailureKind::DegenerateDomain;
    return f;
  }

  double gmax = 0.0;
  for (const Mat& im : phi.images) gmax = std::max(gmax, im.max_norm());
  if (gmax <= tol.residual) {
    CanonicalForm c;
    c.m = phi.m, c.n = phi.n, c.r = phi.r, c.s = phi.s;
    c.field = phi.field;
    c.U = Mat::identity(phi.field, phi.r);
    c.V = Mat::identity(phi.field, phi.s);
    return c;
  }

  // Screen: images of disjoint basis pairs must stay disjoint.
  for (int i = 0; i < phi.m; ++i)
    for (int j = 0; j < phi.n; ++j)
      for (int k = i + 1; k < phi.m; ++k)
        for (int l = 0; l < phi.n; ++l) {
          if (l == j) continue;
          if (!is_disjoint(phi.image(i, j), phi.image(k, l), tol))
            return not_preserver(
                Mat::unit(phi.field, phi.m, phi.n, i, j),
                Mat::unit(phi.field, phi.m, phi.n, k, l),
                disjoint_residual(phi.image(i, j), phi.image(k, l)));
        }

  // A nonzero preserver has Phi(E_11) of full canonical rank q1+q2.
  if (phi.image(0, 0).max_norm() <= tol.residual * std::max(1.0, gmax))
    return refute_or_breakdown(phi, tol, gmax);

  // Leading 2x2 corner: simultaneous diagonalization plus the sign-split
  // normalization, yielding Q1, Q2 and the corner frames.
  PairBlockSvdResult pbs = pair_block_svd(phi.image(0, 0), phi.image(1, 1), tol);
  std::array<Mat, 4> corner = {
      Mat(phi.field, pbs.Uout.a.adjoint() * phi.image(0, 0).a * pbs.Vout.a),
      Mat(phi.field, pbs.Uout.a.adjoint() * phi.image(0, 1).a * pbs.Vout.a),
      Mat(phi.field, pbs.Uout.a.adjoint() * phi.image(1, 0).a * pbs.Vout.a),
      Mat(phi.field, pbs.Uout.a.adjoint() * phi.image(1, 1).a * pbs.Vout.a)};
  auto norm = normalize_2x2(corner, tol);
  if (std::holds_alternative<DecomposeFailure>(norm)) {
    DecomposeFailure f = std::get<DecomposeFailure>(norm);
    if (f.kind == FailureKind::NotPreserver && f.witness) {
      Mat A = embed_2x2(f.witness->first, phi.m, phi.n, 0, 1, 0, 1);
      Mat B = embed_2x2(f.witness->second, phi.m, phi.n, 0, 1, 0, 1);
      Mat fa = apply(phi, A), fb = apply(phi, B);
      if (is_disjoint(A, B, tol) && !is_disjoint(fa, fb, tol))
        return not_preserver(A, B, disjoint_residual(fa, fb));
    }
    return refute_or_breakdown(phi, tol, f.residual);
  }
  const Normalize2x2Result& nr = std::get<Normalize2x2Result>(norm);
  const int q1 = static_cast<int>(nr.q1.size());
  const int q2 = static_cast<int>(nr.q2.size());
  const int k = q1 + q2;

  // Corner frames in original coordinates: Phi(E_ij) = UL * final * VR.
  Eigen::MatrixXcd UL = pbs.Uout.a * nr.left.a.adjoint();
  Eigen::MatrixXcd VR = nr.right.a.adjoint() * pbs.Vout.a.adjoint();

  std::vector<Eigen::MatrixXcd> ua(phi.m), ub(phi.n), va(phi.n), vb(phi.m);
  ua[0] = UL.middleCols(0, q1);
  ub[0] = UL.middleCols(q1, q2);
  ua[1] = UL.middleCols(k, q1);
  ub[1] = UL.middleCols(k + q1, q2);
  va[0] = VR.middleRows(0, q1);
  vb[0] = VR.middleRows(q1, q2);
  va[1] = VR.middleRows(k, q1);
  vb[1] = VR.middleRows(k + q1, q2);

  // Extend to the remaining rows and columns: with the corner frames
  // fixed, the frames of E_1j and E_i1 are linear reads off the images.
  Eigen::MatrixXcd q1inv = Eigen::MatrixXcd::Zero(q1, q1);
  for (int t = 0; t < q1; ++t) q1inv(t, t) = 1.0 / nr.q1[t];
  Eigen::MatrixXcd q2inv = Eigen::MatrixXcd::Zero(q2, q2);
  for (int t = 0; t < q2; ++t) q2inv(t, t) = 1.0 / nr.q2[t];

  for (int j = 2; j < phi.n; ++j) {
    const Eigen::MatrixXcd& p = phi.image(0, j).a;
    if (q1 > 0) va[j] = q1inv * ua[0].adjoint() * p;
    if (q2 > 0) ub[j] = p * vb[0].adjoint() * q2inv;
  }
  for (int i = 2; i < phi.m; ++i) {
    const Eigen::MatrixXcd& p = phi.image(i, 0).a;
    if (q1 > 0) ua[i] = p * va[0].adjoint() * q1inv;
    if (q2 > 0) vb[i] = q2inv * ub[0].adjoint() * p;
  }

  const int tu = phi.m * q1 + phi.n * q2;
  const int tv = phi.n * q1 + phi.m * q2;
  if (tu > phi.r || tv > phi.s) return refute_or_breakdown(phi, tol, gmax);

  Eigen::MatrixXcd ucols(phi.r, tu), vcols(phi.s, tv);
  int off = 0;
  for (int i = 0; i < phi.m; ++i, off += q1)
    if (q1 > 0) ucols.middleCols(off, q1) = ua[i];
  for (int j = 0; j < phi.n; ++j, off += q2)
    if (q2 > 0) ucols.middleCols(off, q2) = ub[j];
  off = 0;
  for (int j = 0; j < phi.n; ++j, off += q1)
    if (q1 > 0) vcols.middleCols(off, q1) = va[j].adjoint();
  for (int i = 0; i < phi.m; ++i, off += q2)
    if (q2 > 0) vcols.middleCols(off, q2) = vb[i].adjoint();

  auto gram_dev = [](const Eigen::MatrixXcd& b) {
    return (b.adjoint() * b -
            Eigen::MatrixXcd::Identity(b.cols(), b.cols()))
        .cwiseAbs()
        .maxCoeff();
  };
  if (gram_dev(ucols) > kGramEps || gram_dev(vcols) > kGramEps)
    return refute_or_breakdown(phi, tol,
                               std::max(gram_dev(ucols), gram_dev(vcols)));

  CanonicalForm c;
  c.m = phi.m, c.n = phi.n, c.r = phi.r, c.s = phi.s;
  c.field = phi.field;
  c.q1 = nr.q1;
  c.q2 = nr.q2;
  c.U = Mat(phi.field, complete_unitary(ucols, phi.r));
  c.V = Mat(phi.field, complete_unitary(vcols, phi.s).adjoint());
  snap_real_inplace(c.U);
  snap_real_inplace(c.V);

  try {
    c.validate();
  } catch (const std::invalid_argument&) {
    return refute_or_breakdown(phi, tol, gmax);
  }

  // The contract is the post-verification, not the pipeline.
  LinMap rebuilt = build(c);
  if (maps_equal(rebuilt, phi, tol)) return c;

  double residual = 0.0;
  for (std::size_t i = 0; i < phi.images.size(); ++i) {
    double scale = std::max(
        {1.0, phi.images[i].max_norm(), rebuilt.images[i].max_norm()});
    residual = std::max(residual,
                        (phi.images[i].a - rebuilt.images[i].a)
                                .cwiseAbs()
                                .maxCoeff() /
                            scale);
  }
  return refute_or_breakdown(phi, tol, residual);
}

SampledCheck verify_preserver_sampled(const LinMap& phi, int trials,
                                      std::uint64_t seed,
                                      const Tolerances& tol) {
  auto bad = [&](const Mat& A, const Mat& B) {
    return !is_disjoint(apply(phi, A), apply(phi, B), tol);
  };

  // Structured trials first: disjoint standard basis pairs.
  for (int i = 0; i < phi.m; ++i)
    for (int j = 0; j < phi.n; ++j)
      for (int k = i + 1; k < phi.m; ++k)
        for (int l = 0; l < phi.n; ++l) {
          if (l == j) continue;
          Mat A = Mat::unit(phi.field, phi.m, phi.n, i, j);
          Mat B = Mat::unit(phi.field, phi.m, phi.n, k, l);
          if (bad(A, B)) return {false, {{A, B}}};
        }

  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(seed, 0x9E3779B97F4A7C15ULL, t);
    auto [A, B] = random_disjoint_pair(phi.m, phi.n, phi.field, rng,
                                       /*rank_one=*/true,
                                       /*unit_weights=*/true);
    if (bad(A, B)) return {false, {{A, B}}};
  }
  return {true, std::nullopt};
}

}  // namespace preservers
