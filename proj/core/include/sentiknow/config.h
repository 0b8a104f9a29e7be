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

#ifndef SENTIKNOW_CONFIG_H_
#define SENTIKNOW_CONFIG_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sentiknow/acquisition.h"
#include "sentiknow/corpus.h"
#include "sentiknow/model.h"
#include "sentiknow/tasks.h"
#include "sentiknow/training.h"

namespace sentiknow {

enum class ConfigType { kPath, kInt, kDouble, kBool, kChoice, kList };

struct ConfigKey {
  std::string_view name;
  ConfigType type;
  std::string_view default_value;
  std::string_view help;
  // '|'-separated allowed values for kChoice.
  std::string_view choices = {};
};

// Flat "key = value" run configuration. '#' starts a comment line. Unknown
// keys and malformed values raise ConfigError naming the key.
class RunConfig {
 public:
  RunConfig();

  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::filesystem::path& path);
  static std::span<const ConfigKey> keys();

  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;
  bool is_default(std::string_view key) const;

  double number(std::string_view key) const;
  long integer(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::optional<std::filesystem::path> path(std::string_view key) const;
  // Like path(), but raises ConfigError when unset.
  std::filesystem::path required_path(std::string_view key) const;

  ModelConfig model_config(int vocab_size) const;
  MaskPolicy mask_policy() const;
  Ablation ablation() const;
  PretrainOptions pretrain_options(int vocab_size) const;
  FineTuneOptions finetune_options() const;
  TaskSpec task_spec() const;
  AnnotatorOptions annotator_options() const;

  // Every key in table order.
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace sentiknow

#endif  // SENTIKNOW_CONFIG_H_
