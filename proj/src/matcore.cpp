#include "preservers/matcore.hpp"

#include <algorithm>
#include <cmath>

namespace preservers {

Mat Mat::zero(Field f, Eigen::Index m, Eigen::Index n) {
  return Mat(f, Eigen::MatrixXcd::Zero(m, n));
}

Mat Mat::identity(Field f, Eigen::Index n) {
  return Mat(f, Eigen::MatrixXcd::Identity(n, n));
}

Mat Mat::unit(Field f, Eigen::Index m, Eigen::Index n,
              Eigen::Index i, Eigen::Index j) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(m, n);
  e(i, j) = 1.0;
  return Mat(f, std::move(e));
}

double Mat::max_norm() const {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

void require_compatible(const Mat& x, const Mat& y) {
  if (x.field != y.field)
    throw std::invalid_argument("matrices over different fields");
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("matrix shape mismatch");
}

static Field join_fields(const Mat& x, const Mat& y) {
  if (x.field != y.field)
    throw std::invalid_argument("matrices over different fields");
  return x.field;
}

Mat operator+(const Mat& x, const Mat& y) {
  require_compatible(x, y);
  return Mat(x.field, x.a + y.a);
}

Mat operator-(const Mat& x, const Mat& y) {
  require_compatible(x, y);
  return Mat(x.field, x.a - y.a);
}

Mat operator*(const Mat& x, const Mat& y) {
  Field f = join_fields(x, y);
  if (x.cols() != y.rows())
    throw std::invalid_argument("inner dimension mismatch");
  return Mat(f, x.a * y.a);
}

Mat operator*(cxd c, const Mat& x) { return Mat(x.field, c * x.a); }
Mat operator*(double c, const Mat& x) { return Mat(x.field, c * x.a); }

void Tolerances::validate() const {
  if (!(rank_cut > 0.0 && rank_cut < 1.0))
    throw std::invalid_argument("rank_cut must lie in (0,1)");
  if (!(residual > 0.0)) throw std::invalid_argument("residual must be positive");
  if (sample_trials < 1)
    throw std::invalid_argument("sample_trials must be at least 1");
}

double disjoint_residual(const Mat& A, const Mat& B) {
  require_compatible(A, B);
  double inner = (A.a.adjoint() * B.a).cwiseAbs().maxCoeff();
  double outer = (A.a * B.a.adjoint()).cwiseAbs().maxCoeff();
  return std::max(inner, outer);
}

bool is_disjoint(const Mat& A, const Mat& B, const Tolerances& tol) {
  double scale = std::max(1.0, A.max_norm() * B.max_norm());
  return disjoint_residual(A, B) <= tol.residual * scale;
}

double tcp_residual(const Mat& A, const Mat& B) {
  require_compatible(A, B);
  return (A.a * A.a.adjoint() * B.a + B.a * A.a.adjoint() * A.a)
      .cwiseAbs()
      .maxCoeff();
}

std::vector<double> singular_values(const Mat& A) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A.a);
  std::vector<double> s(svd.singularValues().data(),
                        svd.singularValues().data() + svd.singularValues().size());
  return s;
}

// Real inputs keep real factors; complex rounding in the Jacobi sweeps can
// leave stray imaginary dust, which is snapped away here.
static void snap_real(Mat& m) {
  if (m.field == Field::Real) m.a = m.a.real().cast<cxd>();
}

SvdResult compact_svd(const Mat& A, const Tolerances& tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      A.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol.rank_cut * smax && sv(i) > 0.0) ++k;

  SvdResult out;
  out.left = Mat(A.field, svd.matrixU().leftCols(k));
  out.right = Mat(A.field, svd.matrixV().leftCols(k));
  out.singulars.assign(sv.data(), sv.data() + k);
  snap_real(out.left);
  snap_real(out.right);
  return out;
}

bool is_partial_isometry(const Mat& A, const Tolerances& tol) {
  double scale = std::max(1.0, A.max_norm());
  return (A.a * A.a.adjoint() * A.a - A.a).cwiseAbs().maxCoeff() <=
         tol.residual * scale;
}

Mat jordan_triple(const Mat& A, const Mat& B, const Mat& C) {
  require_compatible(A, B);
  require_compatible(A, C);
  return Mat(A.field, 0.5 * (A.a * B.a.adjoint() * C.a + C.a * B.a.adjoint() * A.a));
}

Mat cube(const Mat& A) { return Mat(A.field, A.a * A.a.adjoint() * A.a); }

double schatten_norm(const Mat& A, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("schatten_norm requires p > 0");
  double acc = 0.0;
  for (double s : singular_values(A)) acc += std::pow(s, p);
  return std::pow(acc, 1.0 / p);
}

double kyfan_norm(const Mat& A, int k) {
  if (k < 1 || k > std::min(A.rows(), A.cols()))
    throw std::invalid_argument("kyfan_norm: k out of range");
  auto s = singular_values(A);
  double acc = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(s.size()); ++i) acc += s[i];
  return acc;
}

}  // namespace preservers
