// Copyright 2026 The sentiknow Authors
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

#ifndef SENTIKNOW_CHECKPOINT_H_
#define SENTIKNOW_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "sentiknow/corpus.h"
#include "sentiknow/model.h"
#include "sentiknow/tasks.h"
#include "sentiknow/training.h"

namespace sentiknow {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::optional<AdamState> optimizer;
  std::optional<Vocab> vocab;
  std::optional<TaskSpec> task;
  std::map<std::string, std::string> metadata;
};

// Binary container, layout in docs/checkpoint.md:
//   "SKNWCKPT" | u32 version | u64 header bytes | JSON header | f64 payload
// All integers and doubles little-endian. Throws IoError on malformed input
// or an unsupported version.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sentiknow

#endif  // SENTIKNOW_CHECKPOINT_H_
