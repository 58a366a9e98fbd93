#include "barseg/autoencoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "barseg/error.hpp"
#include "barseg/matrix_io.hpp"
#include "barseg/rng.hpp"

namespace barseg {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr Index kEvalChunk = 16;
constexpr std::array<char, 4> kBlobMagic{'B', 'S', 'A', 'E'};
constexpr std::uint32_t kBlobVersion = 1;

// channels x (batch * height * width); pixel (b, y, x) is column (b * height + y) * width + x.
struct FeatureMap {
  MatrixXd data;
  int batch = 0;
  int height = 0;
  int width = 0;
};

// Row c * 9 + ky * 3 + kx, column (b * out_h + oy) * out_w + ox holds
// in(c, b, oy * stride - pad + ky, ox * stride - pad + kx), zero outside the map.
MatrixXd im2col(const MatrixXd& data, int batch, int height, int width, int out_h, int out_w, int stride, int pad) {
  const Index channels = data.rows();
  MatrixXd cols = MatrixXd::Zero(channels * 9, static_cast<Index>(batch) * out_h * out_w);
  for (int b = 0; b < batch; ++b)
    for (int oy = 0; oy < out_h; ++oy)
      for (int ox = 0; ox < out_w; ++ox) {
        const Index col = (static_cast<Index>(b) * out_h + oy) * out_w + ox;
        for (int ky = 0; ky < 3; ++ky) {
          const int y = oy * stride - pad + ky;
          if (y < 0 || y >= height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int x = ox * stride - pad + kx;
            if (x < 0 || x >= width) continue;
            const Index src = (static_cast<Index>(b) * height + y) * width + x;
            for (Index c = 0; c < channels; ++c) cols(c * 9 + ky * 3 + kx, col) = data(c, src);
          }
        }
      }
  return cols;
}

// Adjoint of im2col: scatters columns back onto a channels x (batch * height * width) map.
MatrixXd col2im(const MatrixXd& cols, Index channels, int batch, int height, int width, int out_h, int out_w,
                int stride, int pad) {
  MatrixXd data = MatrixXd::Zero(channels, static_cast<Index>(batch) * height * width);
  for (int b = 0; b < batch; ++b)
    for (int oy = 0; oy < out_h; ++oy)
      for (int ox = 0; ox < out_w; ++ox) {
        const Index col = (static_cast<Index>(b) * out_h + oy) * out_w + ox;
        for (int ky = 0; ky < 3; ++ky) {
          const int y = oy * stride - pad + ky;
          if (y < 0 || y >= height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int x = ox * stride - pad + kx;
            if (x < 0 || x >= width) continue;
            const Index dst = (static_cast<Index>(b) * height + y) * width + x;
            for (Index c = 0; c < channels; ++c) data(c, dst) += cols(c * 9 + ky * 3 + kx, col);
          }
        }
      }
  return data;
}

// 2x2 max pooling; argmax[c + C * j] is the input column of output j's maximum.
FeatureMap maxpool(const FeatureMap& in, std::vector<Index>& argmax) {
  FeatureMap out;
  out.batch = in.batch;
  out.height = in.height / 2;
  out.width = in.width / 2;
  const Index channels = in.data.rows();
  out.data.resize(channels, static_cast<Index>(out.batch) * out.height * out.width);
  argmax.resize(static_cast<std::size_t>(out.data.size()));
  for (int b = 0; b < in.batch; ++b)
    for (int oy = 0; oy < out.height; ++oy)
      for (int ox = 0; ox < out.width; ++ox) {
        const Index j = (static_cast<Index>(b) * out.height + oy) * out.width + ox;
        const Index base = (static_cast<Index>(b) * in.height + 2 * oy) * in.width + 2 * ox;
        const std::array<Index, 4> taps{base, base + 1, base + in.width, base + in.width + 1};
        for (Index c = 0; c < channels; ++c) {
          Index best = taps[0];
          for (int t = 1; t < 4; ++t)
            if (in.data(c, taps[t]) > in.data(c, best)) best = taps[t];
          out.data(c, j) = in.data(c, best);
          argmax[static_cast<std::size_t>(c + channels * j)] = best;
        }
      }
  return out;
}

MatrixXd unpool(const MatrixXd& grad_out, const std::vector<Index>& argmax, Index in_cols) {
  MatrixXd grad_in = MatrixXd::Zero(grad_out.rows(), in_cols);
  const Index channels = grad_out.rows();
  for (Index j = 0; j < grad_out.cols(); ++j)
    for (Index c = 0; c < channels; ++c) grad_in(c, argmax[static_cast<std::size_t>(c + channels * j)]) += grad_out(c, j);
  return grad_in;
}

MatrixXd relu(const MatrixXd& m) { return m.cwiseMax(0.0); }

MatrixXd relu_grad(const MatrixXd& grad, const MatrixXd& pre) {
  return grad.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
}

struct ForwardCache {
  int batch = 0;
  MatrixXd cols1, pre1;
  std::vector<Index> arg1;
  FeatureMap pool1;
  MatrixXd cols2, pre2;
  std::vector<Index> arg2;
  FeatureMap pool2;
  MatrixXd z;
  MatrixXd dec_pre, dec_act;
  MatrixXd t1_pre, t1_act;
  MatrixXd out_pre, out;
};

void check_input(const AEShape& shape, const MatrixXd& x) {
  if (x.rows() != shape.f || x.cols() != shape.s)
    throw InvalidArgument("autoencoder: input is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                          ", network expects " + std::to_string(shape.f) + "x" + std::to_string(shape.s));
  if (!x.allFinite()) throw InvalidArgument("autoencoder: input has non-finite entries");
}

ForwardCache run_forward(const AENetwork& net, std::span<const MatrixXd> batch) {
  const auto& sh = net.shape;
  const auto& p = net.params;
  const int B = static_cast<int>(batch.size());
  const int H = sh.f_padded, W = sh.s;
  const int H2 = H / 2, W2 = W / 2, H4 = H / 4, W4 = W / 4;

  MatrixXd input = MatrixXd::Zero(1, static_cast<Index>(B) * H * W);
  for (int b = 0; b < B; ++b) {
    check_input(sh, batch[b]);
    for (int y = 0; y < sh.f; ++y)
      for (int x = 0; x < W; ++x) input(0, (static_cast<Index>(b) * H + y) * W + x) = batch[b](y, x);
  }

  ForwardCache c;
  c.batch = B;
  c.cols1 = im2col(input, B, H, W, H, W, 1, 1);
  c.pre1 = p.conv1_w * c.cols1;
  c.pre1.colwise() += p.conv1_b;
  c.pool1 = maxpool(FeatureMap{relu(c.pre1), B, H, W}, c.arg1);

  c.cols2 = im2col(c.pool1.data, B, H2, W2, H2, W2, 1, 1);
  c.pre2 = p.conv2_w * c.cols2;
  c.pre2.colwise() += p.conv2_b;
  c.pool2 = maxpool(FeatureMap{relu(c.pre2), B, H2, W2}, c.arg2);

  const Eigen::Map<const MatrixXd> flat(c.pool2.data.data(), sh.flat(), B);
  c.z = p.enc_w * flat;
  c.z.colwise() += p.enc_b;

  c.dec_pre = p.dec_w * c.z;
  c.dec_pre.colwise() += p.dec_b;
  c.dec_act = relu(c.dec_pre);
  const Eigen::Map<const MatrixXd> dec_maps(c.dec_act.data(), AEShape::kConv2Maps,
                                            static_cast<Index>(B) * H4 * W4);

  c.t1_pre = col2im(p.tconv1_w.transpose() * dec_maps, AEShape::kConv1Maps, B, H2, W2, H4, W4, 2, 1);
  c.t1_pre.colwise() += p.tconv1_b;
  c.t1_act = relu(c.t1_pre);

  c.out_pre = col2im(p.tconv2_w.transpose() * c.t1_act, 1, B, H, W, H2, W2, 2, 1);
  c.out_pre.array() += p.tconv2_b(0);
  c.out = relu(c.out_pre);
  return c;
}

MatrixXd crop_output(const AEShape& sh, const ForwardCache& c, int b) {
  MatrixXd x_hat(sh.f, sh.s);
  for (int y = 0; y < sh.f; ++y)
    for (int x = 0; x < sh.s; ++x) x_hat(y, x) = c.out(0, (static_cast<Index>(b) * sh.f_padded + y) * sh.s + x);
  return x_hat;
}

double run_backward(const AENetwork& net, std::span<const MatrixXd> batch, const ForwardCache& c, AEParams& g) {
  const auto& sh = net.shape;
  const auto& p = net.params;
  const int B = c.batch;
  const int H = sh.f_padded, W = sh.s;
  const int H2 = H / 2, W2 = W / 2, H4 = H / 4, W4 = W / 4;
  const double n = static_cast<double>(sh.f) * sh.s;

  MatrixXd d_out = MatrixXd::Zero(1, c.out.cols());
  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    double sample = 0.0;
    for (int y = 0; y < sh.f; ++y)
      for (int x = 0; x < W; ++x) {
        const Index idx = (static_cast<Index>(b) * H + y) * W + x;
        const double diff = c.out(0, idx) - batch[b](y, x);
        sample += diff * diff;
        d_out(0, idx) = 2.0 * diff / (n * B);
      }
    loss += sample / n;
  }
  loss /= B;

  const MatrixXd d_out_pre = relu_grad(d_out, c.out_pre);
  const MatrixXd d_cols_t2 = im2col(d_out_pre, B, H, W, H2, W2, 2, 1);
  g.tconv2_w.noalias() = c.t1_act * d_cols_t2.transpose();
  g.tconv2_b = d_out_pre.rowwise().sum();
  const MatrixXd d_t1_pre = relu_grad(p.tconv2_w * d_cols_t2, c.t1_pre);

  const MatrixXd d_cols_t1 = im2col(d_t1_pre, B, H2, W2, H4, W4, 2, 1);
  const Eigen::Map<const MatrixXd> dec_maps(c.dec_act.data(), AEShape::kConv2Maps,
                                            static_cast<Index>(B) * H4 * W4);
  g.tconv1_w.noalias() = dec_maps * d_cols_t1.transpose();
  g.tconv1_b = d_t1_pre.rowwise().sum();
  const MatrixXd d_dec_maps = p.tconv1_w * d_cols_t1;

  const Eigen::Map<const MatrixXd> d_dec_act(d_dec_maps.data(), sh.flat(), B);
  const MatrixXd d_dec_pre = relu_grad(d_dec_act, c.dec_pre);
  g.dec_w.noalias() = d_dec_pre * c.z.transpose();
  g.dec_b = d_dec_pre.rowwise().sum();
  const MatrixXd d_z = p.dec_w.transpose() * d_dec_pre;

  const Eigen::Map<const MatrixXd> flat(c.pool2.data.data(), sh.flat(), B);
  g.enc_w.noalias() = d_z * flat.transpose();
  g.enc_b = d_z.rowwise().sum();
  const MatrixXd d_flat = p.enc_w.transpose() * d_z;

  const Eigen::Map<const MatrixXd> d_pool2(d_flat.data(), AEShape::kConv2Maps, static_cast<Index>(B) * H4 * W4);
  const MatrixXd d_pre2 = relu_grad(unpool(d_pool2, c.arg2, c.pre2.cols()), c.pre2);
  g.conv2_w.noalias() = d_pre2 * c.cols2.transpose();
  g.conv2_b = d_pre2.rowwise().sum();
  const MatrixXd d_pool1 = col2im(p.conv2_w.transpose() * d_pre2, AEShape::kConv1Maps, B, H2, W2, H2, W2, 1, 1);

  const MatrixXd d_pre1 = relu_grad(unpool(d_pool1, c.arg1, c.pre1.cols()), c.pre1);
  g.conv1_w.noalias() = d_pre1 * c.cols1.transpose();
  g.conv1_b = d_pre1.rowwise().sum();
  return loss;
}

void fill_kaiming(MatrixXd& w, double fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (Index j = 0; j < w.cols(); ++j)
    for (Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-bound, bound);
}

void write_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError("network blob: truncated header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

AEShape make_shape(int f, int s, int d_c) {
  if (f < 1 || s < 1) throw InvalidArgument("autoencoder: bar dimensions must be positive");
  if (s % 4 != 0) throw InvalidArgument("autoencoder: subdivision must be divisible by 4");
  AEShape shape;
  shape.f = f;
  shape.f_padded = (f + 3) / 4 * 4;
  shape.s = s;
  shape.d_c = d_c;
  if (d_c < 1 || d_c >= shape.flat())
    throw InvalidArgument("autoencoder: d_c = " + std::to_string(d_c) + " must lie in [1, " +
                          std::to_string(shape.flat()) + ") to compress");
  return shape;
}

}  // namespace

AEParams AEParams::zeros(const AEShape& shape) {
  constexpr int c1 = AEShape::kConv1Maps, c2 = AEShape::kConv2Maps;
  AEParams p;
  p.conv1_w = MatrixXd::Zero(c1, 9);
  p.conv1_b = VectorXd::Zero(c1);
  p.conv2_w = MatrixXd::Zero(c2, c1 * 9);
  p.conv2_b = VectorXd::Zero(c2);
  p.enc_w = MatrixXd::Zero(shape.d_c, shape.flat());
  p.enc_b = VectorXd::Zero(shape.d_c);
  p.dec_w = MatrixXd::Zero(shape.flat(), shape.d_c);
  p.dec_b = VectorXd::Zero(shape.flat());
  p.tconv1_w = MatrixXd::Zero(c2, c1 * 9);
  p.tconv1_b = VectorXd::Zero(c1);
  p.tconv2_w = MatrixXd::Zero(c1, 9);
  p.tconv2_b = VectorXd::Zero(1);
  return p;
}

Index AEParams::size() const noexcept {
  Index n = 0;
  for_each([&n](const auto& t) { n += t.size(); });
  return n;
}

VectorXd AEParams::flatten() const {
  VectorXd out(size());
  Index offset = 0;
  for_each([&](const auto& t) {
    out.segment(offset, t.size()) = t;
    offset += t.size();
  });
  return out;
}

void AEParams::assign(const VectorXd& flat) {
  if (flat.size() != size()) throw InvalidArgument("AEParams::assign: size mismatch");
  Index offset = 0;
  for_each([&](auto t) {
    t = flat.segment(offset, t.size());
    offset += t.size();
  });
}

AENetwork init_network(int f, int s, int d_c, std::uint64_t seed) {
  AENetwork net;
  net.shape = make_shape(f, s, d_c);
  net.params = AEParams::zeros(net.shape);
  Rng rng(seed);
  auto& p = net.params;
  // fan_in follows the usual convention: in_channels * 9 for convolutions,
  // out_channels * 9 for transposed convolutions.
  fill_kaiming(p.conv1_w, 1 * 9, rng);
  fill_kaiming(p.conv2_w, AEShape::kConv1Maps * 9, rng);
  fill_kaiming(p.enc_w, net.shape.flat(), rng);
  fill_kaiming(p.dec_w, d_c, rng);
  fill_kaiming(p.tconv1_w, AEShape::kConv1Maps * 9, rng);
  fill_kaiming(p.tconv2_w, 1 * 9, rng);
  return net;
}

AEOutput forward(const AENetwork& net, const MatrixXd& x) {
  const auto cache = run_forward(net, std::span<const MatrixXd>(&x, 1));
  return {cache.z.col(0), crop_output(net.shape, cache, 0)};
}

VectorXd encode(const AENetwork& net, const MatrixXd& x) { return forward(net, x).z; }

double mse_loss(const MatrixXd& x, const MatrixXd& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) throw InvalidArgument("mse_loss: shape mismatch");
  if (x.size() == 0) throw InvalidArgument("mse_loss: empty input");
  return (x - x_hat).squaredNorm() / static_cast<double>(x.size());
}

double loss_and_gradient(const AENetwork& net, std::span<const MatrixXd> batch, AEParams& grad) {
  if (batch.empty()) throw InvalidArgument("loss_and_gradient: empty batch");
  grad = AEParams::zeros(net.shape);
  const auto cache = run_forward(net, batch);
  return run_backward(net, batch, cache, grad);
}

AEParams backward(const AENetwork& net, const MatrixXd& x) {
  AEParams grad;
  loss_and_gradient(net, std::span<const MatrixXd>(&x, 1), grad);
  return grad;
}

double full_loss(const AENetwork& net, std::span<const MatrixXd> bars) {
  if (bars.empty()) throw InvalidArgument("full_loss: no bars");
  double total = 0.0;
  const double n = static_cast<double>(net.shape.f) * net.shape.s;
  for (std::size_t start = 0; start < bars.size(); start += kEvalChunk) {
    const auto chunk = bars.subspan(start, std::min<std::size_t>(kEvalChunk, bars.size() - start));
    const auto cache = run_forward(net, chunk);
    for (std::size_t b = 0; b < chunk.size(); ++b)
      total += (crop_output(net.shape, cache, static_cast<int>(b)) - chunk[b]).squaredNorm() / n;
  }
  return total / static_cast<double>(bars.size());
}

MatrixXd encode_all(const AENetwork& net, std::span<const MatrixXd> bars) {
  MatrixXd z(net.shape.d_c, static_cast<Index>(bars.size()));
  for (std::size_t start = 0; start < bars.size(); start += kEvalChunk) {
    const auto chunk = bars.subspan(start, std::min<std::size_t>(kEvalChunk, bars.size() - start));
    z.middleCols(static_cast<Index>(start), static_cast<Index>(chunk.size())) = run_forward(net, chunk).z;
  }
  return z;
}

PlateauSchedule::PlateauSchedule(const AEConfig& cfg)
    : cfg_(cfg), lr_(cfg.lr0), best_(std::numeric_limits<double>::infinity()) {
  if (!(cfg.lr_min < cfg.lr0)) throw InvalidArgument("AEConfig: lr_min must be below lr0");
  if (cfg.plateau_patience < 1 || cfg.early_stop_patience < 1)
    throw InvalidArgument("AEConfig: patience values must be positive");
  if (!(cfg.lr_factor > 0 && cfg.lr_factor < 1)) throw InvalidArgument("AEConfig: lr_factor must lie in (0, 1)");
}

PlateauSchedule::Decision PlateauSchedule::observe(double loss) {
  ++epochs_;
  Decision d;
  if (loss < best_) {
    best_ = loss;
    since_best_ = 0;
    since_reduce_ = 0;
    d.improved = true;
  } else {
    ++since_best_;
    ++since_reduce_;
    if (since_reduce_ >= cfg_.plateau_patience) {
      since_reduce_ = 0;
      lr_ = std::max(lr_ * cfg_.lr_factor, cfg_.lr_min);
    }
  }
  d.stop = since_best_ >= cfg_.early_stop_patience || epochs_ >= cfg_.max_epochs;
  d.lr = lr_;
  return d;
}

AETrainResult train_single_song(std::span<const MatrixXd> bars, const AEConfig& cfg) {
  if (bars.empty()) throw InvalidArgument("train_single_song: need at least one bar");
  if (cfg.batch_size < 1) throw InvalidArgument("train_single_song: batch_size must be >= 1");
  if (cfg.max_epochs < 0) throw InvalidArgument("train_single_song: max_epochs must be >= 0");
  for (const auto& bar : bars)
    if (bar.rows() != bars[0].rows() || bar.cols() != bars[0].cols())
      throw InvalidArgument("train_single_song: bars differ in shape");

  AENetwork net = init_network(static_cast<int>(bars[0].rows()), static_cast<int>(bars[0].cols()), cfg.d_c,
                               cfg.seed);
  PlateauSchedule schedule(cfg);

  AETrainResult result;
  result.initial_loss = full_loss(net, bars);
  if (!std::isfinite(result.initial_loss)) throw DivergenceError("autoencoder: non-finite loss at initialization");
  result.network = net;
  result.best_loss = result.initial_loss;

  Rng rng(cfg.seed ^ 0x5deece66dULL);
  std::vector<std::size_t> order(bars.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  VectorXd theta = net.params.flatten();
  VectorXd m = VectorXd::Zero(theta.size()), v = VectorXd::Zero(theta.size());
  long step = 0;
  AEParams grad;
  std::vector<MatrixXd> batch;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = schedule.lr();
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (auto i = start; i < end; ++i) batch.push_back(bars[order[i]]);
      const double batch_loss = loss_and_gradient(net, batch, grad);
      if (!std::isfinite(batch_loss))
        throw DivergenceError("autoencoder: non-finite minibatch loss in epoch " + std::to_string(epoch));

      ++step;
      const VectorXd g = grad.flatten();
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
      net.params.assign(theta);
    }

    const double loss = full_loss(net, bars);
    if (!std::isfinite(loss))
      throw DivergenceError("autoencoder: non-finite loss after epoch " + std::to_string(epoch));
    result.loss_trace.push_back(loss);
    result.lr_trace.push_back(lr);

    const auto decision = schedule.observe(loss);
    if (decision.improved) {
      result.network = net;
      result.best_loss = loss;
      result.best_epoch = epoch;
    }
    if (decision.stop) {
      result.stop_reason = schedule.stale_epochs() >= cfg.early_stop_patience ? StopReason::early_stop
                                                                               : StopReason::max_epochs;
      break;
    }
  }

  result.embedding = encode_all(result.network, bars);
  return result;
}

void save_network(std::ostream& os, const AENetwork& net) {
  os.write(kBlobMagic.data(), kBlobMagic.size());
  write_u32(os, kBlobVersion);
  for (int v : {net.shape.f, net.shape.f_padded, net.shape.s, net.shape.d_c}) write_u32(os, static_cast<std::uint32_t>(v));
  auto& params = net.params;
  params.for_each([&os](const auto& t) { io::write_bseg(os, MatrixXd(t)); });
}

void save_network(const std::filesystem::path& path, const AENetwork& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  save_network(os, net);
}

AENetwork load_network(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kBlobMagic) throw FormatError("network blob: bad magic");
  if (const auto version = read_u32(is); version != kBlobVersion)
    throw FormatError("network blob: unsupported version " + std::to_string(version));
  const int f = static_cast<int>(read_u32(is));
  const int f_padded = static_cast<int>(read_u32(is));
  const int s = static_cast<int>(read_u32(is));
  const int d_c = static_cast<int>(read_u32(is));
  AENetwork net;
  net.shape = make_shape(f, s, d_c);
  if (net.shape.f_padded != f_padded) throw FormatError("network blob: inconsistent padding");
  net.params = AEParams::zeros(net.shape);
  net.params.for_each([&is](auto t) {
    const MatrixXd m = io::read_bseg(is);
    if (m.size() != t.size()) throw FormatError("network blob: tensor size mismatch");
    t = Eigen::Map<const VectorXd>(m.data(), m.size());
  });
  return net;
}

AENetwork load_network(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return load_network(is);
}

void write_loss_trace(const std::filesystem::path& path, const AETrainResult& result) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.precision(17);
  os << "epoch,loss,lr\n";
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
    os << i << ',' << result.loss_trace[i] << ',' << result.lr_trace[i] << '\n';
}

}  // namespace barseg
