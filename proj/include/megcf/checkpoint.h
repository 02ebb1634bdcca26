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


#ifndef MEGCF_CHECKPOINT_H_
#define MEGCF_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "megcf/config.h"
#include "megcf/evaluation.h"
#include "megcf/ingestion.h"
#include "megcf/propagation.h"
#include "megcf/training.h"

namespace megcf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Everything needed to rebuild a trained model and rerun its evaluation.
// dataset.interactions is not stored; the split carries every interaction.
struct Checkpoint {
  ExperimentConfig config;
  IndexedDataset dataset;
  EvalSplit split;
  EmbeddingTable parameters;
};

// Little-endian binary layout:
//   magic "MEGCFCK\0" | u32 version | str config_json
//   u64 U | u64 I | u64 E (dataset) | str* user keys | str* item keys
//   str* entity keys | u8* entity kinds | u8 has_sentiments | f64* item scores
//   u64 n, (u32 item, u32 entity)* item-entity edges
//   u64 split items, per user: u32 test, u32 validation, u32* train, u32* neg
//   u64 table U, I, E, d | f64 values row-major
//   u64 FNV-1a of every preceding byte
// "x*" is a u64 count followed by the elements; str is a u64 length followed
// by bytes.
std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Throws kCorruptFile, kVersionMismatch, kShapeMismatch.
Checkpoint DeserializeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Restores a model with the given config; kShapeMismatch when the stored
// table does not fit it.
Model RestoreModel(const Checkpoint& checkpoint, const TrainConfig& config);
inline Model RestoreModel(const Checkpoint& checkpoint) {
  return RestoreModel(checkpoint, checkpoint.config.train);
}

std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace megcf

#endif  // MEGCF_CHECKPOINT_H_
