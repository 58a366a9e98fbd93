#include "barseg/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "barseg/error.hpp"
#include "barseg/rng.hpp"

namespace barseg {
namespace {

constexpr Eigen::Index kRowBlock = 256;

void check_rank(const Eigen::MatrixXd& X, int d_c, const char* op) {
  const auto limit = std::min(X.rows(), X.cols());
  if (d_c < 1 || d_c > limit)
    throw InvalidArgument(std::string(op) + ": d_c = " + std::to_string(d_c) + " must lie in [1, " +
                          std::to_string(limit) + "]");
  if (!X.allFinite()) throw InvalidArgument(std::string(op) + ": input has non-finite entries");
}

// ||X||^2 - 2 <W^T X, H> + <W^T W, H H^T>, reusing products HALS already holds.
double frobenius_loss(double x_norm2, const Eigen::MatrixXd& WtX, const Eigen::MatrixXd& WtW,
                      const Eigen::MatrixXd& H) {
  const Eigen::MatrixXd HHt = H * H.transpose();
  const double loss = x_norm2 - 2.0 * WtX.cwiseProduct(H).sum() + WtW.cwiseProduct(HHt).sum();
  return std::max(loss, 0.0);
}

}  // namespace

Eigen::MatrixXd LowRankModel::reconstruction() const {
  Eigen::MatrixXd R = W * H;
  if (mu.size() == R.rows()) R.colwise() += mu;
  return R;
}

LowRankModel pca_compress(const Eigen::MatrixXd& X, int d_c) {
  check_rank(X, d_c, "pca_compress");
  LowRankModel model;
  model.kind = LowRankKind::pca;
  model.mu = X.rowwise().mean();
  const Eigen::MatrixXd centered = X.colwise() - model.mu;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  model.W = svd.matrixU().leftCols(d_c);
  for (int k = 0; k < d_c; ++k) {
    Eigen::Index arg = 0;
    model.W.col(k).cwiseAbs().maxCoeff(&arg);
    if (model.W(arg, k) < 0) model.W.col(k) *= -1.0;
  }
  model.H = model.W.transpose() * centered;
  return model;
}

LowRankModel nmf_compress(const Eigen::MatrixXd& X, int d_c, const NmfOptions& options) {
  check_rank(X, d_c, "nmf_compress");
  Rng rng(options.seed);
  Eigen::MatrixXd W(X.rows(), d_c), H(d_c, X.cols());
  for (Eigen::Index j = 0; j < W.cols(); ++j)
    for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = rng.uniform();
  for (Eigen::Index j = 0; j < H.cols(); ++j)
    for (Eigen::Index i = 0; i < H.rows(); ++i) H(i, j) = rng.uniform();
  return nmf_compress(X, std::move(W), std::move(H), options);
}

LowRankModel nmf_compress(const Eigen::MatrixXd& X, Eigen::MatrixXd W, Eigen::MatrixXd H,
                          const NmfOptions& options) {
  const int d_c = static_cast<int>(W.cols());
  check_rank(X, d_c, "nmf_compress");
  if (W.rows() != X.rows() || H.rows() != d_c || H.cols() != X.cols())
    throw InvalidArgument("nmf_compress: initial factor shapes do not match X");
  if ((X.array() < 0).any())
    throw InvalidArgument("nmf_compress: input has negative entries; NMF requires a nonnegative matrix");
  if ((W.array() < 0).any() || (H.array() < 0).any())
    throw InvalidArgument("nmf_compress: initial factors must be nonnegative");
  if (options.max_iters < 0) throw InvalidArgument("nmf_compress: max_iters must be >= 0");

  const double x_norm2 = X.squaredNorm();
  LowRankModel model;
  model.kind = LowRankKind::nmf;
  model.mu = Eigen::VectorXd::Zero(X.rows());

  Eigen::MatrixXd WtX = W.transpose() * X;
  Eigen::MatrixXd WtW = W.transpose() * W;
  model.loss_trace.push_back(frobenius_loss(x_norm2, WtX, WtW, H));

  for (int iter = 0; iter < options.max_iters; ++iter) {
    // Columns of W with H fixed.
    const Eigen::MatrixXd XHt = X * H.transpose();
    const Eigen::MatrixXd HHt = H * H.transpose();
    // Rows of W update independently, so sweep the columns one cache-sized row block at a time.
    for (Eigen::Index r0 = 0; r0 < W.rows(); r0 += kRowBlock) {
      const Eigen::Index rows = std::min(kRowBlock, W.rows() - r0);
      auto Wb = W.middleRows(r0, rows);
      const auto XHtb = XHt.middleRows(r0, rows);
      for (int k = 0; k < d_c; ++k) {
        if (HHt(k, k) <= 0) continue;
        Wb.col(k) = (Wb.col(k) + (XHtb.col(k) - Wb * HHt.col(k)) / HHt(k, k)).cwiseMax(0.0);
      }
    }
    // Rows of H with W fixed.
    WtX.noalias() = W.transpose() * X;
    WtW.noalias() = W.transpose() * W;
    for (int k = 0; k < d_c; ++k) {
      if (WtW(k, k) <= 0) continue;
      H.row(k) = (H.row(k) + (WtX.row(k) - WtW.row(k) * H) / WtW(k, k)).cwiseMax(0.0);
    }

    const double prev = model.loss_trace.back();
    const double loss = frobenius_loss(x_norm2, WtX, WtW, H);
    model.loss_trace.push_back(loss);
    if (prev <= 0 || (prev - loss) / prev < options.tol) break;
  }

  model.W = std::move(W);
  model.H = std::move(H);
  return model;
}

}  // namespace barseg
