#pragma once

// Binary model checkpoint.
//
//   bytes 0-7   magic "IDRCKPT\0"
//   bytes 8-11  format version, uint32 little-endian
//   bytes 12-19 header length n, uint64 little-endian
//   n bytes     UTF-8 JSON header: model config, sense inventory, resource
//               paths and the ordered tensor directory (name + shape)
//   then        every tensor's values as float32 little-endian, in directory order

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "idr/classifier.hpp"

namespace idr {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig config;
  SenseInventory senses;
  // Free-form string pairs; the CLI records resource paths (glove, vectors,
  // ngrams, brown) and corpus loading options here so eval can rebuild inputs.
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Checkpoint make_checkpoint(RelationModel& model, std::map<std::string, std::string> metadata);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies the checkpoint's tensors into a model built from the same config;
// names and shapes must match exactly.
void restore_parameters(RelationModel& model, const Checkpoint& ckpt);

}  // namespace idr
