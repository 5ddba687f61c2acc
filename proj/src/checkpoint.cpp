// Copyright 2026 The zlalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zla/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "zla/errors.hpp"

namespace zla {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'Z', 'L', 'A', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) throw CorruptCheckpoint("checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_tensors(const std::filesystem::path& path, const TensorBundle& tensors) {
  std::string buf(kMagic, sizeof kMagic);
  put<std::uint32_t>(buf, kVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.name.size()));
    buf += t.name;
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(t.value.rows()));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(t.value.cols()));
    buf.append(reinterpret_cast<const char*>(t.value.data()),
               static_cast<std::size_t>(t.value.size()) * sizeof(double));
  }
  put<std::uint64_t>(buf, fnv1a(buf));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

TensorBundle load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kMagic + 16 ||
      std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CorruptCheckpoint("not a checkpoint file: " + path.string());

  const std::string body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
  if (stored != fnv1a(body))
    throw CorruptCheckpoint("checkpoint hash mismatch: " + path.string());

  Reader r(body);
  r.take(sizeof kMagic);
  if (r.get<std::uint32_t>() != kVersion)
    throw CorruptCheckpoint("unsupported checkpoint version");
  const auto count = r.get<std::uint32_t>();
  TensorBundle tensors;
  tensors.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = r.take(r.get<std::uint32_t>());
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows > (1ULL << 32) || cols > (1ULL << 32))
      throw CorruptCheckpoint("implausible tensor shape for " + t.name);
    const std::string raw = r.take(rows * cols * sizeof(double));
    t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!raw.empty()) std::memcpy(t.value.data(), raw.data(), raw.size());
    tensors.push_back(std::move(t));
  }
  if (r.pos() != body.size()) throw CorruptCheckpoint("trailing bytes in checkpoint");
  return tensors;
}

bool has_tensor(const TensorBundle& bundle, const std::string& name) {
  for (const auto& t : bundle)
    if (t.name == name) return true;
  return false;
}

const Matrix<double>& find_tensor(const TensorBundle& bundle,
                                  const std::string& name) {
  for (const auto& t : bundle)
    if (t.name == name) return t.value;
  throw CorruptCheckpoint("checkpoint lacks tensor " + name);
}

namespace {

template <typename Params>
void fill_from(const TensorBundle& bundle, const std::string& prefix,
               Params& params) {
  params.visit([&](const std::string& name, Matrix<double>& m) {
    const auto& src = find_tensor(bundle, prefix + name);
    if (src.rows() != m.rows() || src.cols() != m.cols())
      throw CorruptCheckpoint("shape mismatch for tensor " + prefix + name);
    m = src;
  });
}

}  // namespace

SpeakerParams<double> speaker_from_tensors(const TensorBundle& bundle,
                                           const std::string& prefix) {
  const auto& proj = find_tensor(bundle, prefix + "input_projection");
  const auto& emb = find_tensor(bundle, prefix + "symbol_embeddings");
  auto params = SpeakerParams<double>::zeros(
      proj.cols(), emb.cols() - 1, proj.rows(), emb.rows(),
      has_tensor(bundle, prefix + "cell_projection"));
  fill_from(bundle, prefix, params);
  try {
    params.check();
  } catch (const std::invalid_argument& e) {
    throw CorruptCheckpoint(e.what());
  }
  return params;
}

ListenerParams<double> listener_from_tensors(const TensorBundle& bundle,
                                             const std::string& prefix) {
  const auto& out = find_tensor(bundle, prefix + "output_weights");
  const auto& emb = find_tensor(bundle, prefix + "symbol_embeddings");
  auto params = ListenerParams<double>::zeros(out.rows(), emb.cols(), out.cols(),
                                              emb.rows());
  fill_from(bundle, prefix, params);
  try {
    params.check();
  } catch (const std::invalid_argument& e) {
    throw CorruptCheckpoint(e.what());
  }
  return params;
}

}  // namespace zla
