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

#ifndef ZLA_CHECKPOINT_HPP_
#define ZLA_CHECKPOINT_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "zla/agents.hpp"

namespace zla {

// Checkpoint layout (all integers little-endian):
//
//   "ZLACKPT\0"                 8-byte magic
//   u32 version (= 1)
//   u32 tensor count
//   per tensor:
//     u32 name length, name bytes (UTF-8, no terminator)
//     u64 rows, u64 cols
//     rows*cols IEEE-754 binary64 values, column-major
//   u64 FNV-1a hash of every preceding byte
//
// Values are stored bit for bit, so save/load round trips exactly.

class CorruptCheckpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  Matrix<double> value;
};

using TensorBundle = std::vector<NamedTensor>;

void save_tensors(const std::filesystem::path& path, const TensorBundle& tensors);
/// Throws IoError when unreadable, CorruptCheckpoint on any format violation.
TensorBundle load_tensors(const std::filesystem::path& path);

template <typename Params>
void append_tensors(TensorBundle& bundle, const std::string& prefix,
                    const Params& params) {
  params.visit([&](const std::string& name, const Matrix<double>& m) {
    bundle.push_back({prefix + name, m});
  });
}

const Matrix<double>& find_tensor(const TensorBundle& bundle,
                                  const std::string& name);
bool has_tensor(const TensorBundle& bundle, const std::string& name);

SpeakerParams<double> speaker_from_tensors(const TensorBundle& bundle,
                                           const std::string& prefix);
ListenerParams<double> listener_from_tensors(const TensorBundle& bundle,
                                             const std::string& prefix);

}  // namespace zla

#endif  // ZLA_CHECKPOINT_HPP_
