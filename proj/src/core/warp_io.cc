#include "mvmatch/core/warp_io.h"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mvmatch/core/check.h"

namespace mvm {
namespace {

constexpr char kMagic[4] = {'M', 'V', 'W', 'F'};
constexpr uint32_t kVersion = 1;

void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutF32(std::string* out, double v) {
  PutU32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
}

uint32_t GetU32(const std::string& in, size_t* pos) {
  if (*pos + 4 > in.size()) throw std::runtime_error("MVWF: truncated file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[*pos + i]))
         << (8 * i);
  }
  *pos += 4;
  return v;
}

double GetF32(const std::string& in, size_t* pos) {
  return static_cast<double>(std::bit_cast<float>(GetU32(in, pos)));
}

}  // namespace

std::string EncodeWarpField(const DenseWarpField& warp) {
  MVM_CHECK(warp.targets.size() == warp.NumPixels() &&
                warp.confidence.size() == warp.NumPixels(),
            "warp array length");
  MVM_CHECK(warp.source_view >= 0 && warp.target_view >= 0, "view index");
  std::string out(kMagic, 4);
  out.reserve(24 + warp.NumPixels() * 12);
  PutU32(&out, kVersion);
  PutU32(&out, static_cast<uint32_t>(warp.height));
  PutU32(&out, static_cast<uint32_t>(warp.width));
  PutU32(&out, static_cast<uint32_t>(warp.source_view));
  PutU32(&out, static_cast<uint32_t>(warp.target_view));
  for (size_t i = 0; i < warp.NumPixels(); ++i) {
    PutF32(&out, warp.targets[i].x);
    PutF32(&out, warp.targets[i].y);
    PutF32(&out, warp.confidence[i]);
  }
  return out;
}

DenseWarpField DecodeWarpField(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw std::runtime_error("MVWF: bad magic");
  }
  size_t pos = 4;
  const uint32_t version = GetU32(bytes, &pos);
  if (version != kVersion) throw std::runtime_error("MVWF: unsupported version");
  const uint32_t height = GetU32(bytes, &pos);
  const uint32_t width = GetU32(bytes, &pos);
  const uint32_t source = GetU32(bytes, &pos);
  const uint32_t target = GetU32(bytes, &pos);
  if (height == 0 || width == 0) throw std::runtime_error("MVWF: empty grid");
  const size_t n = static_cast<size_t>(height) * width;
  if (bytes.size() != pos + n * 12) {
    throw std::runtime_error("MVWF: payload size mismatch");
  }
  DenseWarpField warp(static_cast<int>(height), static_cast<int>(width), 1,
                      static_cast<int>(source), static_cast<int>(target));
  for (size_t i = 0; i < n; ++i) {
    warp.targets[i].x = GetF32(bytes, &pos);
    warp.targets[i].y = GetF32(bytes, &pos);
    warp.confidence[i] = GetF32(bytes, &pos);
  }
  return warp;
}

void WriteWarpField(const std::string& path, const DenseWarpField& warp) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  const std::string bytes = EncodeWarpField(warp);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("write failed: " + path);
}

DenseWarpField ReadWarpField(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return DecodeWarpField(buffer.str());
}

}  // namespace mvm
