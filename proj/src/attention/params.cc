#include "mvmatch/attention/params.h"

#include <cmath>

#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"

namespace mvm {
namespace {

Eigen::MatrixXd Gaussian(int rows, int cols, double stddev, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = stddev * rng.Normal();
  }
  return m;
}

void CheckShape(const Eigen::MatrixXd& m, int rows, int cols,
                const char* name) {
  MVM_CHECK(m.rows() == rows && m.cols() == cols, name);
  MVM_CHECK(m.allFinite(), name);
}

}  // namespace

AttentionParams AttentionParams::Random(int dim, double sigma, uint64_t seed,
                                        double scale) {
  MVM_CHECK(dim > 0, "dim");
  Rng rng(seed);
  const double s2 = scale / std::sqrt(2.0);
  const double sd = scale / std::sqrt(static_cast<double>(dim));
  AttentionParams p;
  p.dim = dim;
  p.sigma = sigma;
  p.mlp_w1 = Gaussian(2, dim, s2, rng);
  p.mlp_b1 = Eigen::RowVectorXd::Zero(dim);
  p.mlp_w2 = Gaussian(dim, dim, sd, rng);
  p.mlp_b2 = Eigen::RowVectorXd::Zero(dim);
  p.w_query = Gaussian(dim, dim, sd, rng);
  p.w_key = Gaussian(dim, dim, sd, rng);
  p.w_value = Gaussian(dim, dim, sd, rng);
  p.w_out = Gaussian(dim, dim, sd, rng);
  return p;
}

AttentionParams AttentionParams::Inert(int dim, double sigma) {
  MVM_CHECK(dim > 0, "dim");
  AttentionParams p;
  p.dim = dim;
  p.sigma = sigma;
  p.mlp_w1 = Eigen::MatrixXd::Zero(2, dim);
  p.mlp_b1 = Eigen::RowVectorXd::Zero(dim);
  p.mlp_w2 = Eigen::MatrixXd::Zero(dim, dim);
  p.mlp_b2 = Eigen::RowVectorXd::Zero(dim);
  p.w_query = Eigen::MatrixXd::Identity(dim, dim);
  p.w_key = Eigen::MatrixXd::Identity(dim, dim);
  p.w_value = Eigen::MatrixXd::Identity(dim, dim);
  p.w_out = Eigen::MatrixXd::Zero(dim, dim);
  return p;
}

void AttentionParams::Validate() const {
  MVM_CHECK(dim > 0, "dim");
  MVM_CHECK(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  CheckShape(mlp_w1, 2, dim, "mlp_w1");
  CheckShape(mlp_b1, 1, dim, "mlp_b1");
  CheckShape(mlp_w2, dim, dim, "mlp_w2");
  CheckShape(mlp_b2, 1, dim, "mlp_b2");
  CheckShape(w_query, dim, dim, "w_query");
  CheckShape(w_key, dim, dim, "w_key");
  CheckShape(w_value, dim, dim, "w_value");
  CheckShape(w_out, dim, dim, "w_out");
}

TrackAttentionParams TrackAttentionParams::Random(int dim, double sigma,
                                                  uint64_t seed, double scale) {
  return {AttentionParams::Random(dim, sigma, MixSeed(seed, 0), scale),
          AttentionParams::Random(dim, sigma, MixSeed(seed, 1), scale),
          AttentionParams::Random(dim, sigma, MixSeed(seed, 2), scale)};
}

MVFuseParams MVFuseParams::Random(int dim, int hidden, uint64_t seed,
                                  double scale) {
  MVM_CHECK(dim > 0 && hidden > 0, "dims");
  Rng rng(seed);
  const double sd = scale / std::sqrt(static_cast<double>(dim));
  MVFuseParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.w_query = Gaussian(dim, dim, sd, rng);
  p.w_key = Gaussian(dim, dim, sd, rng);
  p.w_value = Gaussian(dim, dim, sd, rng);
  p.w_out = Gaussian(dim, dim, sd, rng);
  p.dw_kernel = Gaussian(dim, kKernel * kKernel, scale / kKernel, rng);
  p.dw_bias = Eigen::RowVectorXd::Zero(dim);
  p.mlp_w1 = Gaussian(dim, hidden, sd, rng);
  p.mlp_b1 = Eigen::RowVectorXd::Zero(hidden);
  p.mlp_w2 = Gaussian(hidden, dim, scale / std::sqrt(static_cast<double>(hidden)), rng);
  p.mlp_b2 = Eigen::RowVectorXd::Zero(dim);
  return p;
}

MVFuseParams MVFuseParams::Zeros(int dim, int hidden) {
  MVM_CHECK(dim > 0 && hidden > 0, "dims");
  MVFuseParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.w_query = Eigen::MatrixXd::Zero(dim, dim);
  p.w_key = Eigen::MatrixXd::Zero(dim, dim);
  p.w_value = Eigen::MatrixXd::Zero(dim, dim);
  p.w_out = Eigen::MatrixXd::Zero(dim, dim);
  p.dw_kernel = Eigen::MatrixXd::Zero(dim, kKernel * kKernel);
  p.dw_bias = Eigen::RowVectorXd::Zero(dim);
  p.mlp_w1 = Eigen::MatrixXd::Zero(dim, hidden);
  p.mlp_b1 = Eigen::RowVectorXd::Zero(hidden);
  p.mlp_w2 = Eigen::MatrixXd::Zero(hidden, dim);
  p.mlp_b2 = Eigen::RowVectorXd::Zero(dim);
  return p;
}

void MVFuseParams::Validate() const {
  MVM_CHECK(dim > 0 && hidden > 0, "dims");
  CheckShape(w_query, dim, dim, "w_query");
  CheckShape(w_key, dim, dim, "w_key");
  CheckShape(w_value, dim, dim, "w_value");
  CheckShape(w_out, dim, dim, "w_out");
  CheckShape(dw_kernel, dim, kKernel * kKernel, "dw_kernel");
  CheckShape(dw_bias, 1, dim, "dw_bias");
  CheckShape(mlp_w1, dim, hidden, "mlp_w1");
  CheckShape(mlp_b1, 1, hidden, "mlp_b1");
  CheckShape(mlp_w2, hidden, dim, "mlp_w2");
  CheckShape(mlp_b2, 1, dim, "mlp_b2");
}

}  // namespace mvm
