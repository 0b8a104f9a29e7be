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

#include "sentiknow/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sentiknow/errors.h"

namespace sentiknow {
namespace {

using Json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'S', 'K', 'N', 'W', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  out.write(buf, sizeof buf);
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
    throw IoError("checkpoint truncated");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

Json config_json(const ModelConfig& c) {
  Json j;
  j["layers"] = c.layers;
  j["heads"] = c.heads;
  j["dim"] = c.dim;
  j["ffn_dim"] = c.ffn_dim;
  j["vocab_size"] = c.vocab_size;
  j["max_len"] = c.max_len;
  j["label_count"] = c.label_count;
  j["layer_norm_eps"] = c.layer_norm_eps;
  j["init_scale"] = c.init_scale;
  j["seed"] = c.seed;
  j["tie_word_head"] = c.tie_word_head;
  j["use_pos_channel"] = c.use_pos_channel;
  j["use_polar_channel"] = c.use_polar_channel;
  j["task_head"] = static_cast<int>(c.task_head);
  j["task_outputs"] = c.task_outputs;
  return j;
}

ModelConfig config_from_json(const Json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.dim = j.at("dim").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.label_count = j.at("label_count").get<int>();
  c.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  c.init_scale = j.at("init_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.tie_word_head = j.at("tie_word_head").get<bool>();
  c.use_pos_channel = j.at("use_pos_channel").get<bool>();
  c.use_polar_channel = j.at("use_polar_channel").get<bool>();
  const int head = j.at("task_head").get<int>();
  if (head < 0 || head > 2) throw IoError("checkpoint: bad task_head");
  c.task_head = static_cast<TaskHeadKind>(head);
  c.task_outputs = j.at("task_outputs").get<int>();
  return c;
}

void add_tensors(Json& table, const char* group, const Parameters& p) {
  p.for_each([&](std::string_view name, const Matrix& m) {
    table.push_back({{"group", group},
                     {"name", std::string(name)},
                     {"rows", m.rows()},
                     {"cols", m.cols()}});
  });
}

void write_payload(std::ostream& out, const Parameters& p) {
  p.for_each([&](std::string_view, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) put_le(out, m.data()[i]);
  });
}

void read_payload(std::istream& in, const Json& table, std::size_t& cursor,
                  const char* group, Parameters& p) {
  p.for_each([&](std::string_view name, Matrix& m) {
    if (cursor >= table.size()) throw IoError("checkpoint: tensor table too short");
    const Json& t = table[cursor++];
    if (t.at("group").get<std::string>() != group ||
        t.at("name").get<std::string>() != name ||
        t.at("rows").get<Eigen::Index>() != m.rows() ||
        t.at("cols").get<Eigen::Index>() != m.cols()) {
      throw IoError("checkpoint: tensor '" + std::string(name) +
                    "' does not match the stored table");
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get_le<double>(in);
  });
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  Json header;
  header["format"] = "sentiknow-checkpoint";
  header["version"] = kCheckpointVersion;
  header["config"] = config_json(ckpt.model.config);
  header["metadata"] = Json::object();
  for (const auto& [k, v] : ckpt.metadata) header["metadata"][k] = v;
  if (ckpt.vocab) {
    Json tokens = Json::array();
    for (int i = 0; i < ckpt.vocab->size(); ++i) tokens.push_back(ckpt.vocab->token(i));
    header["vocab"] = tokens;
  } else {
    header["vocab"] = nullptr;
  }
  if (ckpt.task) {
    header["task"] = {{"kind", std::string(task_name(ckpt.task->kind))},
                      {"class_count", ckpt.task->class_count},
                      {"categories", ckpt.task->categories}};
  } else {
    header["task"] = nullptr;
  }
  Json table = Json::array();
  add_tensors(table, "param", ckpt.model.params);
  if (ckpt.optimizer) {
    const AdamState& o = *ckpt.optimizer;
    header["optimizer"] = {{"step", o.step},
                           {"beta1", o.beta1},
                           {"beta2", o.beta2},
                           {"epsilon", o.epsilon},
                           {"max_grad_norm", o.max_grad_norm}};
    add_tensors(table, "adam_m", o.m);
    add_tensors(table, "adam_v", o.v);
  } else {
    header["optimizer"] = nullptr;
  }
  header["tensors"] = table;

  const std::string text = header.dump();
  out.write(kMagic, sizeof kMagic);
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_payload(out, ckpt.model.params);
  if (ckpt.optimizer) {
    write_payload(out, ckpt.optimizer->m);
    write_payload(out, ckpt.optimizer->v);
  }
  if (!out) throw IoError("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IoError("not a checkpoint file");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = get_le<std::uint64_t>(in);
  if (length > (std::uint64_t{1} << 32)) throw IoError("checkpoint header too large");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw IoError("checkpoint truncated");
  }

  Checkpoint ckpt;
  try {
    const Json header = Json::parse(text);
    ckpt.model.config = config_from_json(header.at("config"));
    ckpt.model.config.validate();
    for (const auto& [k, v] : header.at("metadata").items()) {
      ckpt.metadata[k] = v.get<std::string>();
    }
    if (!header.at("vocab").is_null()) {
      std::ostringstream lines;
      int id = 0;
      for (const Json& t : header.at("vocab")) {
        lines << t.get<std::string>() << '\t' << id++ << '\n';
      }
      std::istringstream vin(lines.str());
      ckpt.vocab = Vocab::load(vin);
    }
    if (!header.at("task").is_null()) {
      const Json& t = header.at("task");
      TaskSpec spec;
      const auto kind = task_from_name(t.at("kind").get<std::string>());
      if (!kind) throw IoError("checkpoint: unknown task kind");
      spec.kind = *kind;
      spec.class_count = t.at("class_count").get<int>();
      spec.categories = t.at("categories").get<std::vector<std::string>>();
      ckpt.task = spec;
    }
    const Json& table = header.at("tensors");
    std::size_t cursor = 0;
    ckpt.model.params = Parameters::zeros(ckpt.model.config);
    read_payload(in, table, cursor, "param", ckpt.model.params);
    if (!header.at("optimizer").is_null()) {
      const Json& o = header.at("optimizer");
      AdamState state = AdamState::for_model(ckpt.model.config);
      state.step = o.at("step").get<long>();
      state.beta1 = o.at("beta1").get<double>();
      state.beta2 = o.at("beta2").get<double>();
      state.epsilon = o.at("epsilon").get<double>();
      state.max_grad_norm = o.at("max_grad_norm").get<double>();
      read_payload(in, table, cursor, "adam_m", state.m);
      read_payload(in, table, cursor, "adam_v", state.v);
      ckpt.optimizer = std::move(state);
    }
    if (cursor != table.size()) throw IoError("checkpoint: unread tensors in table");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint header: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw IoError(std::string("checkpoint config: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace sentiknow
