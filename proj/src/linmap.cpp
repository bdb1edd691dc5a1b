#include "preservers/linmap.hpp"

namespace preservers {

LinMap from_images(int m, int n, int r, int s, Field field,
                   std::vector<Mat> images) {
  if (m < 1 || n < 1 || r < 1 || s < 1)
    throw std::invalid_argument("dimensions must be positive");
  if (static_cast<int>(images.size()) != m * n)
    throw std::invalid_argument("expected m*n basis images");
  for (const Mat& im : images) {
    if (im.rows() != r || im.cols() != s)
      throw std::invalid_argument("basis image has wrong shape");
    if (im.field != field)
      throw std::invalid_argument("basis image over wrong field");
  }
  return LinMap{m, n, r, s, field, std::move(images)};
}

Mat apply(const LinMap& phi, const Mat& A) {
  if (A.rows() != phi.m || A.cols() != phi.n || A.field != phi.field)
    throw std::invalid_argument("argument does not match map domain");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(phi.r, phi.s);
  for (int i = 0; i < phi.m; ++i)
    for (int j = 0; j < phi.n; ++j) out += A.a(i, j) * phi.image(i, j).a;
  return Mat(phi.field, std::move(out));
}

static bool unitary_within(const Mat& U, double eps) {
  if (U.rows() != U.cols()) return false;
  return (U.a.adjoint() * U.a - Eigen::MatrixXcd::Identity(U.rows(), U.rows()))
             .cwiseAbs()
             .maxCoeff() <= eps;
}

LinMap conjugate(const LinMap& phi, const Mat& Uleft, const Mat& Vright) {
  if (Uleft.rows() != phi.r || Vright.rows() != phi.s)
    throw std::invalid_argument("conjugating factor has wrong size");
  if (!unitary_within(Uleft, 1e-8) || !unitary_within(Vright, 1e-8))
    throw std::invalid_argument("conjugating factor is not unitary");
  std::vector<Mat> images;
  images.reserve(phi.images.size());
  for (const Mat& im : phi.images)
    images.push_back(Mat(phi.field, Uleft.a * im.a * Vright.a));
  return LinMap{phi.m, phi.n, phi.r, phi.s, phi.field, std::move(images)};
}

bool maps_equal(const LinMap& phi, const LinMap& psi, const Tolerances& tol) {
  if (phi.m != psi.m || phi.n != psi.n || phi.r != psi.r || phi.s != psi.s ||
      phi.field != psi.field)
    throw std::invalid_argument("map signature mismatch");
  for (std::size_t i = 0; i < phi.images.size(); ++i) {
    double scale = std::max(
        {1.0, phi.images[i].max_norm(), psi.images[i].max_norm()});
    if ((phi.images[i].a - psi.images[i].a).cwiseAbs().maxCoeff() >
        tol.residual * scale)
      return false;
  }
  return true;
}

LinMap identity_map(int m, int n, Field field) {
  std::vector<Mat> images;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) images.push_back(Mat::unit(field, m, n, i, j));
  return from_images(m, n, m, n, field, std::move(images));
}

LinMap transpose_map(int m, int n, Field field) {
  std::vector<Mat> images;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) images.push_back(Mat::unit(field, n, m, j, i));
  return from_images(m, n, n, m, field, std::move(images));
}

}  // namespace preservers
