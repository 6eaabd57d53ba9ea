#include "deid/embedding.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "deid/error.hpp"

namespace deid {

std::vector<Point2> pca_embed_2d(std::span<const Vector> points) {
  if (points.size() < 3) throw DataError("pca_embed_2d needs at least 3 points");
  const auto dim = static_cast<Eigen::Index>(points.front().size());
  if (dim < 2) throw DataError("pca_embed_2d needs dimension >= 2");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector& p = points[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(p.size()) != dim)
      throw DataError("pca_embed_2d: inconsistent descriptor dimensions");
    data.row(i) = Eigen::Map<const Eigen::RowVectorXd>(p.data(), dim);
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;
  if (data.cwiseAbs().maxCoeff() == 0.0)
    throw DataError("pca_embed_2d: degenerate covariance (all points identical)");

  const Eigen::MatrixXd cov = data.transpose() * data / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::internal, "eigensolver failed");

  // Eigenvalues ascend; the last two columns are the leading components.
  Eigen::MatrixXd basis(dim, 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(dim - 1 - c);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < dim; ++i)
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    if (v(arg) < 0.0) v = -v;
    basis.col(c) = v;
  }

  const Eigen::MatrixXd projected = data * basis;
  std::vector<Point2> out(points.size());
  for (Eigen::Index i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = {projected(i, 0), projected(i, 1)};
  return out;
}

std::vector<Point2> pca_embed_2d(std::span<const FaceDescriptor> descriptors) {
  std::vector<Vector> points;
  points.reserve(descriptors.size());
  for (const FaceDescriptor& d : descriptors) points.push_back(d.vector);
  return pca_embed_2d(points);
}

}  // namespace deid
