#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "barseg/autoencoder.hpp"

namespace barseg::testing {

struct GradCheckEntry {
  std::string tensor;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  std::array<int, 12> per_tensor{};  // samples checked in each tensor
};

inline constexpr std::array<const char*, 12> kTensorNames{
    "conv1_w", "conv1_b", "conv2_w", "conv2_b", "enc_w", "enc_b",
    "dec_w", "dec_b", "tconv1_w", "tconv1_b", "tconv2_w", "tconv2_b"};

/// Compares backward() to central differences of the single-bar MSE on
/// `samples` parameters spread over every tensor.
GradCheckReport gradient_check(const AENetwork& net, const Eigen::MatrixXd& x, int samples, double h,
                               std::uint64_t seed);

/// Tiny network with randomized biases so every unit is exercised.
AENetwork tiny_network(int f, int s, int d_c, std::uint64_t seed);

}  // namespace barseg::testing
