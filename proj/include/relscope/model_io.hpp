#ifndef RELSCOPE_MODEL_IO_HPP
#define RELSCOPE_MODEL_IO_HPP

#include "relscope/mlp.hpp"

#include <filesystem>
#include <string>

namespace relscope {

struct StoredModel {
  Model model;
  std::string metadata_json = "{}";  // training config, seed, log digest
};

// Binary little-endian: "RSCM", u32 version, u32 D, u32 z, u32 layer count,
// u32 units per layer, float32 W (row-major) then b per layer, u64 length +
// UTF-8 JSON metadata trailer.
std::vector<std::uint8_t> encode_model(const Model& model, const std::string& metadata_json);
StoredModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::filesystem::path& path, const std::string& metadata_json = "{}");
StoredModel load_model(const std::filesystem::path& path);

// JSON metadata describing a training run; the log is summarized by its
// final values and an FNV digest of its entries.
std::string training_metadata(const TrainConfig& config, const std::vector<EpochLog>& log);

}  // namespace relscope

#endif  // RELSCOPE_MODEL_IO_HPP
