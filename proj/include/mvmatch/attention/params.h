#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvm {

// Single-head attention block with a 2 -> D -> D ReLU query MLP.
struct AttentionParams {
  int dim = 0;
  double sigma = 1.0;  // spatial bias scale in base pixels
  Eigen::MatrixXd mlp_w1;     // 2 x D
  Eigen::RowVectorXd mlp_b1;  // D
  Eigen::MatrixXd mlp_w2;     // D x D
  Eigen::RowVectorXd mlp_b2;  // D
  Eigen::MatrixXd w_query;    // D x D (track transformer only)
  Eigen::MatrixXd w_key;      // D x D
  Eigen::MatrixXd w_value;    // D x D
  Eigen::MatrixXd w_out;      // D x D

  // Gaussian weights with std scale / sqrt(fan_in), zero biases.
  static AttentionParams Random(int dim, double sigma, uint64_t seed,
                                double scale = 1.0);
  // Zero MLP, identity key/value/query projections, zero output projection.
  static AttentionParams Inert(int dim, double sigma);

  void Validate() const;
};

// The three kernels of one track-guided exchange.
struct TrackAttentionParams {
  AttentionParams sampling;
  AttentionParams transformer;
  AttentionParams splatting;

  static TrackAttentionParams Random(int dim, double sigma, uint64_t seed,
                                     double scale = 1.0);
};

// Per-pixel attention over view slots followed by a depthwise 7x7
// convolution and a pointwise two-layer channel MLP.
struct MVFuseParams {
  static constexpr int kKernel = 7;
  int dim = 0;
  int hidden = 0;
  Eigen::MatrixXd w_query;     // D x D
  Eigen::MatrixXd w_key;       // D x D
  Eigen::MatrixXd w_value;     // D x D
  Eigen::MatrixXd w_out;       // D x D
  Eigen::MatrixXd dw_kernel;   // D x 49, taps row-major
  Eigen::RowVectorXd dw_bias;  // D
  Eigen::MatrixXd mlp_w1;      // D x E
  Eigen::RowVectorXd mlp_b1;   // E
  Eigen::MatrixXd mlp_w2;      // E x D
  Eigen::RowVectorXd mlp_b2;   // D

  static MVFuseParams Random(int dim, int hidden, uint64_t seed,
                             double scale = 1.0);
  static MVFuseParams Zeros(int dim, int hidden);
  void Validate() const;
};

// MVAP layout: "MVAP", u32 version (1), u32 number of parameter sets, then
// per set: u32 dim, f32 sigma, followed by mlp_w1 (2 x D), mlp_b1 (D),
// mlp_w2 (D x D), mlp_b2 (D), w_query, w_key, w_value, w_out (D x D each),
// every matrix row-major. All values little-endian.
std::string EncodeAttentionParams(const std::vector<AttentionParams>& sets);
std::vector<AttentionParams> DecodeAttentionParams(const std::string& bytes);

void WriteAttentionParams(const std::string& path,
                          const std::vector<AttentionParams>& sets);
std::vector<AttentionParams> ReadAttentionParams(const std::string& path);

}  // namespace mvm
