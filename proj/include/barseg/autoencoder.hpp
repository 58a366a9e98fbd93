#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace barseg {

struct AEConfig {
  int d_c = 8;
  double lr0 = 1e-3;
  int plateau_patience = 20;  // epochs
  double lr_factor = 0.1;
  double lr_min = 1e-5;
  int early_stop_patience = 100;  // epochs
  int max_epochs = 1000;
  int batch_size = 8;
  std::uint64_t seed = 42;
};

/// Spatial geometry of the network. Inputs are f x s; f is zero-padded up to a
/// multiple of 4 internally.
struct AEShape {
  int f = 0;
  int f_padded = 0;
  int s = 0;
  int d_c = 0;

  static constexpr int kConv1Maps = 4;
  static constexpr int kConv2Maps = 16;

  int latent_rows() const noexcept { return f_padded / 4; }
  int latent_cols() const noexcept { return s / 4; }
  /// Size of the flattened feature maps feeding the latent layer.
  int flat() const noexcept { return kConv2Maps * latent_rows() * latent_cols(); }
};

/// Every trainable tensor. Convolution weights are stored as
/// (out_channels, in_channels * 9); transposed-convolution weights as
/// (in_channels, out_channels * 9). Kernel taps are row-major 3x3.
struct AEParams {
  Eigen::MatrixXd conv1_w;  // 4 x 9
  Eigen::VectorXd conv1_b;
  Eigen::MatrixXd conv2_w;  // 16 x 36
  Eigen::VectorXd conv2_b;
  Eigen::MatrixXd enc_w;    // d_c x flat
  Eigen::VectorXd enc_b;
  Eigen::MatrixXd dec_w;    // flat x d_c
  Eigen::VectorXd dec_b;
  Eigen::MatrixXd tconv1_w;  // 16 x 36
  Eigen::VectorXd tconv1_b;
  Eigen::MatrixXd tconv2_w;  // 4 x 9
  Eigen::VectorXd tconv2_b;

  static AEParams zeros(const AEShape& shape);

  /// Calls fn(Eigen::Map<Eigen::VectorXd>) on each tensor in a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    auto visit = [&fn](auto& t) { fn(Eigen::Map<Eigen::VectorXd>(t.data(), t.size())); };
    visit(conv1_w), visit(conv1_b), visit(conv2_w), visit(conv2_b), visit(enc_w), visit(enc_b);
    visit(dec_w), visit(dec_b), visit(tconv1_w), visit(tconv1_b), visit(tconv2_w), visit(tconv2_b);
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    auto visit = [&fn](const auto& t) { fn(Eigen::Map<const Eigen::VectorXd>(t.data(), t.size())); };
    visit(conv1_w), visit(conv1_b), visit(conv2_w), visit(conv2_b), visit(enc_w), visit(enc_b);
    visit(dec_w), visit(dec_b), visit(tconv1_w), visit(tconv1_b), visit(tconv2_w), visit(tconv2_b);
  }

  Eigen::Index size() const noexcept;
  /// All parameters concatenated in for_each order.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

/// Single-song convolutional autoencoder:
///   conv 3x3 (1->4) ReLU, maxpool 2x2, conv 3x3 (4->16) ReLU, maxpool 2x2,
///   linear -> d_c (latent, no activation);
///   linear -> flat ReLU, tconv 3x3/2 (16->4) ReLU, tconv 3x3/2 (4->1) ReLU.
struct AENetwork {
  AEShape shape;
  AEParams params;
};

/// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
AENetwork init_network(int f, int s, int d_c, std::uint64_t seed);

struct AEOutput {
  Eigen::VectorXd z;       // d_c
  Eigen::MatrixXd x_hat;   // f x s, nonnegative
};

AEOutput forward(const AENetwork& net, const Eigen::MatrixXd& x);
Eigen::VectorXd encode(const AENetwork& net, const Eigen::MatrixXd& x);

/// Mean squared error over all entries.
double mse_loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat);

/// Gradient of mse_loss(x, forward(net, x).x_hat) with respect to every parameter.
AEParams backward(const AENetwork& net, const Eigen::MatrixXd& x);

/// Mean of per-bar MSE over the batch; gradients are written to `grad`.
double loss_and_gradient(const AENetwork& net, std::span<const Eigen::MatrixXd> batch, AEParams& grad);

/// Mean per-bar MSE over all bars, evaluated in chunks.
double full_loss(const AENetwork& net, std::span<const Eigen::MatrixXd> bars);

/// d_c x b matrix whose column i encodes bars[i].
Eigen::MatrixXd encode_all(const AENetwork& net, std::span<const Eigen::MatrixXd> bars);

/// Reduce-on-plateau learning rate plus early stopping, driven by one loss per epoch.
/// Any strict decrease below the best loss so far counts as an improvement.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const AEConfig& cfg);

  struct Decision {
    bool improved = false;
    bool stop = false;
    double lr = 0.0;  // rate to use for the next epoch
  };

  Decision observe(double loss);

  double lr() const noexcept { return lr_; }
  int epochs() const noexcept { return epochs_; }
  double best_loss() const noexcept { return best_; }
  /// Epochs since the last improvement.
  int stale_epochs() const noexcept { return since_best_; }

 private:
  AEConfig cfg_;
  double lr_;
  double best_;
  int epochs_ = 0;
  int since_reduce_ = 0;
  int since_best_ = 0;
};

enum class StopReason { max_epochs, early_stop };

struct AETrainResult {
  AENetwork network;          // best-loss parameters
  Eigen::MatrixXd embedding;  // d_c x b
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int best_epoch = -1;  // -1 when no epoch ran
  std::vector<double> loss_trace;  // full-song loss after each epoch
  std::vector<double> lr_trace;    // rate used during each epoch
  StopReason stop_reason = StopReason::max_epochs;
};

/// Trains a fresh network on the bars of one song with Adam on shuffled minibatches.
/// Throws DivergenceError on a non-finite loss.
AETrainResult train_single_song(std::span<const Eigen::MatrixXd> bars, const AEConfig& cfg);

/// Versioned binary parameter blob.
void save_network(std::ostream& os, const AENetwork& net);
void save_network(const std::filesystem::path& path, const AENetwork& net);
AENetwork load_network(std::istream& is);
AENetwork load_network(const std::filesystem::path& path);

/// "epoch,loss,lr" lines.
void write_loss_trace(const std::filesystem::path& path, const AETrainResult& result);

}  // namespace barseg
