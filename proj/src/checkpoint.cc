// Copyright 2026 The MEGCF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "megcf/checkpoint.h"

#include <bit>
#include <cstring>

#include "megcf/common.h"

namespace megcf {
namespace {

constexpr std::string_view kMagic{"MEGCFCK\0", 8};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void PutSize(std::size_t n) { Put<std::uint64_t>(n); }
  void PutString(std::string_view s) {
    PutSize(s.size());
    out_.append(s);
  }
  void PutRaw(std::string_view s) { out_.append(s); }
  template <typename T>
  void PutVector(const std::vector<T>& v) {
    PutSize(v.size());
    for (const T& x : v) Put(x);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::size_t GetSize() {
    const std::uint64_t n = Get<std::uint64_t>();
    // Every element takes at least one byte.
    if (n > in_.size() - pos_) Corrupt("length field exceeds file size");
    return static_cast<std::size_t>(n);
  }
  std::string GetString() {
    const std::size_t n = GetSize();
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view GetRaw(std::size_t n) {
    Need(n);
    std::string_view s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  std::vector<T> GetVector() {
    const std::size_t n = GetSize();
    std::vector<T> v(n);
    for (T& x : v) x = Get<T>();
    return v;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

  [[noreturn]] static void Corrupt(const std::string& what) {
    Fail(ErrorCode::kCorruptFile, "checkpoint: " + what);
  }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) Corrupt("truncated");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

void PutKeys(Writer& w, const IdMap& map) {
  w.PutSize(map.size());
  for (const std::string& key : map.keys()) w.PutString(key);
}

IdMap GetKeys(Reader& r) {
  const std::size_t n = r.GetSize();
  std::vector<std::string> keys(n);
  for (auto& key : keys) key = r.GetString();
  try {
    return IdMap::FromKeys(std::move(keys));
  } catch (const Error& e) {
    Reader::Corrupt(e.what());
  }
}

void CheckIndex(std::uint32_t value, std::size_t bound, const char* what) {
  if (value >= bound) Reader::Corrupt(std::string(what) + " index out of range");
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string SerializeCheckpoint(const Checkpoint& ck) {
  const IndexedDataset& d = ck.dataset;
  Writer w;
  w.PutRaw(kMagic);
  w.Put<std::uint32_t>(kCheckpointVersion);
  w.PutString(ToJson(ck.config).dump());

  w.PutSize(d.num_users());
  w.PutSize(d.num_items());
  w.PutSize(d.num_entities());
  PutKeys(w, d.users);
  PutKeys(w, d.items);
  PutKeys(w, d.entities);
  w.PutSize(d.entity_kinds.size());
  for (EntityKind k : d.entity_kinds) w.Put<std::uint8_t>(static_cast<std::uint8_t>(k));
  w.Put<std::uint8_t>(d.has_sentiments ? 1 : 0);
  w.PutVector(d.item_scores);
  w.PutSize(d.item_entities.size());
  for (const ItemEntityEdge& e : d.item_entities) {
    w.Put<std::uint32_t>(e.item);
    w.Put<std::uint32_t>(e.entity);
  }

  w.PutSize(ck.split.num_items);
  w.PutSize(ck.split.users.size());
  for (const UserSplit& u : ck.split.users) {
    w.Put<std::uint32_t>(u.test_item);
    w.Put<std::uint32_t>(u.validation_item);
    w.PutVector(u.training_items);
    w.PutVector(u.negatives);
  }

  const NodeLayout& layout = ck.parameters.layout();
  w.PutSize(layout.num_users);
  w.PutSize(layout.num_items);
  w.PutSize(layout.num_entities);
  w.PutSize(ck.parameters.dim());
  for (double v : ck.parameters.values().values()) w.Put<double>(v);

  const std::uint64_t checksum = Fnv1a64(w.bytes());
  w.Put<std::uint64_t>(checksum);
  return std::move(w.bytes());
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + sizeof(std::uint32_t) + sizeof(std::uint64_t) ||
      bytes.substr(0, kMagic.size()) != kMagic) {
    Reader::Corrupt("bad magic");
  }
  Reader r(bytes);
  r.GetRaw(kMagic.size());
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    Fail(ErrorCode::kVersionMismatch,
         "checkpoint version " + std::to_string(version) + ", expected " +
             std::to_string(kCheckpointVersion));
  }
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
  if (stored != Fnv1a64(body)) Reader::Corrupt("checksum mismatch");
  r = Reader(body);
  r.GetRaw(kMagic.size() + sizeof(std::uint32_t));

  Checkpoint ck;
  try {
    ck.config = ExperimentConfigFromJson(nlohmann::json::parse(r.GetString()));
  } catch (const nlohmann::json::exception& e) {
    Reader::Corrupt(std::string("config: ") + e.what());
  }

  IndexedDataset& d = ck.dataset;
  const std::size_t num_users = r.GetSize();
  const std::size_t num_items = r.GetSize();
  const std::size_t num_entities = r.GetSize();
  d.users = GetKeys(r);
  d.items = GetKeys(r);
  d.entities = GetKeys(r);
  if (d.num_users() != num_users || d.num_items() != num_items ||
      d.num_entities() != num_entities) {
    Reader::Corrupt("id map sizes disagree with the header");
  }
  const std::size_t num_kinds = r.GetSize();
  if (num_kinds != num_entities) Reader::Corrupt("entity kind count");
  d.entity_kinds.resize(num_kinds);
  for (EntityKind& k : d.entity_kinds) {
    const auto raw = r.Get<std::uint8_t>();
    if (raw > 1) Reader::Corrupt("entity kind");
    k = static_cast<EntityKind>(raw);
  }
  d.has_sentiments = r.Get<std::uint8_t>() != 0;
  d.item_scores = r.GetVector<double>();
  if (!d.item_scores.empty() && d.item_scores.size() != num_items) {
    Reader::Corrupt("item score count");
  }
  d.item_entities.resize(r.GetSize());
  for (ItemEntityEdge& e : d.item_entities) {
    e.item = r.Get<std::uint32_t>();
    e.entity = r.Get<std::uint32_t>();
    CheckIndex(e.item, num_items, "item");
    CheckIndex(e.entity, num_entities, "entity");
  }

  ck.split.num_items = r.GetSize();
  if (ck.split.num_items != num_items) Reader::Corrupt("split item count");
  ck.split.users.resize(r.GetSize());
  if (ck.split.users.size() != num_users) Reader::Corrupt("split user count");
  for (UserSplit& u : ck.split.users) {
    u.test_item = r.Get<std::uint32_t>();
    u.validation_item = r.Get<std::uint32_t>();
    u.training_items = r.GetVector<std::uint32_t>();
    u.negatives = r.GetVector<std::uint32_t>();
    CheckIndex(u.test_item, num_items, "test item");
    CheckIndex(u.validation_item, num_items, "validation item");
    for (auto i : u.training_items) CheckIndex(i, num_items, "training item");
    for (auto i : u.negatives) CheckIndex(i, num_items, "negative item");
  }

  NodeLayout layout;
  layout.num_users = r.GetSize();
  layout.num_items = r.GetSize();
  layout.num_entities = r.GetSize();
  const auto dim = static_cast<std::size_t>(r.Get<std::uint64_t>());
  if (layout.num_users != num_users || layout.num_items != num_items ||
      layout.num_entities > num_entities) {
    Fail(ErrorCode::kShapeMismatch, "embedding table does not match the graph");
  }
  if (dim == 0 || r.remaining() != layout.total() * dim * sizeof(double)) {
    Reader::Corrupt("embedding table size");
  }
  ck.parameters = EmbeddingTable(layout, dim);
  for (double& v : ck.parameters.values().values()) v = r.Get<double>();
  return ck;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  WriteFile(path, SerializeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(ReadFile(path));
}

Model RestoreModel(const Checkpoint& checkpoint, const TrainConfig& config) {
  Model model(MakeTrainingData(checkpoint.dataset, checkpoint.split), config);
  model.SetParameters(checkpoint.parameters);
  return model;
}

}  // namespace megcf
