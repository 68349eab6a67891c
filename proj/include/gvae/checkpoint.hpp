#pragma once

#include <filesystem>

#include "json.hpp"

#include "gvae/model.hpp"

namespace gvae {

// Binary layout: magic "GVAE", u32 format version, u32 dims N,K,E1,E, then
// every tensor as little-endian f64 in serialization order. Conv depth and
// hyperparameters live in the JSON sidecar written next to the file.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const nlohmann::json& sidecar);

struct Checkpoint {
  ModelParams params;
  nlohmann::json sidecar;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gvae
