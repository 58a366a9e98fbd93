#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace barseg {

enum class LowRankKind { pca, nmf };

/// X ~ mu * 1^T + W * H, with X holding one bar per column.
struct LowRankModel {
  LowRankKind kind = LowRankKind::pca;
  Eigen::MatrixXd W;   // n x d_c
  Eigen::MatrixXd H;   // d_c x b, the barwise embedding
  Eigen::VectorXd mu;  // n; zero for NMF
  /// NMF only: ||X - WH||_F^2 at initialization, then after every iteration.
  std::vector<double> loss_trace;

  Eigen::MatrixXd reconstruction() const;
};

/// Truncated PCA. mu is the mean bar, W the top d_c left singular vectors of
/// the centered data (each column sign-fixed so its largest-magnitude entry is
/// positive), H = W^T (X - mu 1^T).
LowRankModel pca_compress(const Eigen::MatrixXd& X, int d_c);

struct NmfOptions {
  int max_iters = 500;
  double tol = 1e-8;  // stop once the relative loss decrease falls below this
  std::uint64_t seed = 42;
};

/// Frobenius-loss NMF by HALS (exact block-coordinate nonnegative least squares
/// on the columns of W, then the rows of H). Factors start uniform in [0, 1).
LowRankModel nmf_compress(const Eigen::MatrixXd& X, int d_c, const NmfOptions& options = {});

/// Same, starting from the given nonnegative factors.
LowRankModel nmf_compress(const Eigen::MatrixXd& X, Eigen::MatrixXd W0, Eigen::MatrixXd H0,
                          const NmfOptions& options = {});

}  // namespace barseg
