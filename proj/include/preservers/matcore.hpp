#ifndef PRESERVERS_MATCORE_HPP
#define PRESERVERS_MATCORE_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace preservers {

using cxd = std::complex<double>;

// Scalar field of a matrix space. All matrices taking part in one
// operation must carry the same tag.
enum class Field { Real, Complex };

// Dense rectangular matrix over R or C. For Field::Real the imaginary
// parts of all entries are kept at exactly zero.
struct Mat {
  Field field = Field::Real;
  Eigen::MatrixXcd a;

  Mat() = default;
  Mat(Field f, Eigen::MatrixXcd m) : field(f), a(std::move(m)) {}

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }

  static Mat zero(Field f, Eigen::Index m, Eigen::Index n);
  static Mat identity(Field f, Eigen::Index n);
  // Standard basis matrix E_ij (zero-based indices).
  static Mat unit(Field f, Eigen::Index m, Eigen::Index n,
                  Eigen::Index i, Eigen::Index j);

  Mat adjoint() const { return Mat(field, a.adjoint()); }
  Mat transpose() const { return Mat(field, a.transpose()); }

  double max_norm() const;  // largest entry magnitude
};

Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(cxd c, const Mat& x);
Mat operator*(double c, const Mat& x);

// Throws std::invalid_argument unless x and y have the same shape and field.
void require_compatible(const Mat& x, const Mat& y);

// Numerical policy threaded through every decision.
struct Tolerances {
  double rank_cut = 1e-9;   // relative singular-value cutoff
  double residual = 1e-9;   // relative entrywise zero threshold
  int sample_trials = 200;  // trial count for sampled checks

  void validate() const;
};

// Compact SVD: A = left * diag(singulars) * right^*, with orthonormal
// columns in left/right and strictly positive descending singular values.
struct SvdResult {
  Mat left;
  std::vector<double> singulars;
  Mat right;
};

// max(|A^*B|_max, |AB^*|_max); zero exactly when A and B are disjoint.
double disjoint_residual(const Mat& A, const Mat& B);

bool is_disjoint(const Mat& A, const Mat& B, const Tolerances& tol);

// |AA^*B + BA^*A|_max; vanishes exactly when A and B are disjoint.
double tcp_residual(const Mat& A, const Mat& B);

SvdResult compact_svd(const Mat& A, const Tolerances& tol);

bool is_partial_isometry(const Mat& A, const Tolerances& tol);

// {A,B,C} = (AB^*C + CB^*A)/2
Mat jordan_triple(const Mat& A, const Mat& B, const Mat& C);

// A^(3) = AA^*A
Mat cube(const Mat& A);

double schatten_norm(const Mat& A, double p);

double kyfan_norm(const Mat& A, int k);

// All singular values of A, descending, including (near-)zero ones.
std::vector<double> singular_values(const Mat& A);

}  // namespace preservers

#endif
