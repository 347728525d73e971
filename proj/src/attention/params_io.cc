#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mvmatch/attention/params.h"
#include "mvmatch/core/check.h"

namespace mvm {
namespace {

constexpr char kMagic[4] = {'M', 'V', 'A', 'P'};
constexpr uint32_t kVersion = 1;

void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutMatrix(std::string* out, const Eigen::MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      PutU32(out, std::bit_cast<uint32_t>(static_cast<float>(m(r, c))));
    }
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  uint32_t U32() {
    if (pos_ + 4 > bytes_.size()) throw std::runtime_error("MVAP: truncated");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  double F32() { return static_cast<double>(std::bit_cast<float>(U32())); }
  Eigen::MatrixXd Matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = F32();
    }
    return m;
  }
  bool Done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string EncodeAttentionParams(const std::vector<AttentionParams>& sets) {
  std::string out(kMagic, 4);
  PutU32(&out, kVersion);
  PutU32(&out, static_cast<uint32_t>(sets.size()));
  for (const AttentionParams& p : sets) {
    p.Validate();
    PutU32(&out, static_cast<uint32_t>(p.dim));
    PutU32(&out, std::bit_cast<uint32_t>(static_cast<float>(p.sigma)));
    PutMatrix(&out, p.mlp_w1);
    PutMatrix(&out, p.mlp_b1);
    PutMatrix(&out, p.mlp_w2);
    PutMatrix(&out, p.mlp_b2);
    PutMatrix(&out, p.w_query);
    PutMatrix(&out, p.w_key);
    PutMatrix(&out, p.w_value);
    PutMatrix(&out, p.w_out);
  }
  return out;
}

std::vector<AttentionParams> DecodeAttentionParams(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw std::runtime_error("MVAP: bad magic");
  }
  Reader in(bytes);
  in.U32();
  if (in.U32() != kVersion) throw std::runtime_error("MVAP: unsupported version");
  const uint32_t count = in.U32();
  std::vector<AttentionParams> sets;
  for (uint32_t i = 0; i < count; ++i) {
    AttentionParams p;
    p.dim = static_cast<int>(in.U32());
    if (p.dim <= 0 || p.dim > 4096) throw std::runtime_error("MVAP: bad dim");
    p.sigma = in.F32();
    const int d = p.dim;
    p.mlp_w1 = in.Matrix(2, d);
    p.mlp_b1 = in.Matrix(1, d);
    p.mlp_w2 = in.Matrix(d, d);
    p.mlp_b2 = in.Matrix(1, d);
    p.w_query = in.Matrix(d, d);
    p.w_key = in.Matrix(d, d);
    p.w_value = in.Matrix(d, d);
    p.w_out = in.Matrix(d, d);
    p.Validate();
    sets.push_back(std::move(p));
  }
  if (!in.Done()) throw std::runtime_error("MVAP: trailing bytes");
  return sets;
}

void WriteAttentionParams(const std::string& path,
                          const std::vector<AttentionParams>& sets) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  const std::string bytes = EncodeAttentionParams(sets);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<AttentionParams> ReadAttentionParams(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return DecodeAttentionParams(buffer.str());
}

}  // namespace mvm
