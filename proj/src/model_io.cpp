#include "relscope/model_io.hpp"

#include "relscope/binary_io.hpp"
#include "relscope/image.hpp"

#include <json.hpp>

#include <cstdio>

namespace relscope {

namespace {
constexpr std::string_view kModelMagic = "RSCM";
constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kMaxLayers = 64;
}  // namespace

std::vector<std::uint8_t> encode_model(const Model& model, const std::string& metadata_json) {
  model.validate();
  ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(model.input_dim()));
  w.u32(static_cast<std::uint32_t>(model.num_classes()));
  w.u32(static_cast<std::uint32_t>(model.layers().size()));
  for (const auto& l : model.layers()) w.u32(static_cast<std::uint32_t>(l.units()));
  for (const auto& l : model.layers()) {
    for (Index i = 0; i < l.weights.rows(); ++i)
      for (Index j = 0; j < l.weights.cols(); ++j) w.f32(l.weights(i, j));
    for (Index j = 0; j < l.bias.size(); ++j) w.f32(l.bias[j]);
  }
  w.u64(metadata_json.size());
  w.bytes(metadata_json);
  return std::move(w.buffer());
}

StoredModel decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 20 || r.bytes(4) != kModelMagic) throw FormatError("bad model file magic");
  if (r.u32() != kModelVersion) throw FormatError("unsupported model file version");
  const std::uint32_t d = r.u32();
  const std::uint32_t z = r.u32();
  const std::uint32_t count = r.u32();
  if (d == 0 || z == 0 || count == 0 || count > kMaxLayers) throw FormatError("corrupt model header");
  std::vector<Index> units(count);
  for (auto& u : units) {
    u = r.u32();
    if (u == 0) throw FormatError("corrupt model header");
  }
  if (units.back() != static_cast<Index>(z)) throw FormatError("model header class count mismatch");

  // Check the payload size before allocating anything.
  std::uint64_t floats = 0;
  Index prev = d;
  for (Index u : units) {
    floats += static_cast<std::uint64_t>(prev) * static_cast<std::uint64_t>(u) + static_cast<std::uint64_t>(u);
    prev = u;
  }
  r.need(floats * 4 + 8);

  std::vector<Index> hidden(units.begin(), units.end() - 1);
  StoredModel out{Model(d, hidden, z), {}};
  for (auto& l : out.model.layers()) {
    for (Index i = 0; i < l.weights.rows(); ++i)
      for (Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = r.f32();
    for (Index j = 0; j < l.bias.size(); ++j) l.bias[j] = r.f32();
  }
  const std::uint64_t meta_len = r.u64();
  if (meta_len != r.remaining()) throw FormatError("model metadata length does not match file size");
  out.metadata_json = r.bytes(meta_len);
  out.model.validate();
  return out;
}

void save_model(const Model& model, const std::filesystem::path& path, const std::string& metadata_json) {
  write_file_atomic(path, encode_model(model, metadata_json));
}

StoredModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("model file not found: " + path.string());
  return decode_model(read_file(path));
}

std::string training_metadata(const TrainConfig& config, const std::vector<EpochLog>& log) {
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  char line[128];
  for (const auto& e : log) {
    const int n = std::snprintf(line, sizeof line, "%d,%.17g,%.17g;", e.epoch, e.loss, e.accuracy);
    for (int i = 0; i < n; ++i) {
      digest ^= static_cast<unsigned char>(line[i]);
      digest *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest));
  nlohmann::json j{
      {"config",
       {{"learning_rate", config.learning_rate},
        {"batch_size", config.batch_size},
        {"dropout", config.dropout_rate},
        {"epochs", config.epochs},
        {"early_stop_loss", config.early_stop_loss},
        {"adam_beta1", config.beta1},
        {"adam_beta2", config.beta2},
        {"adam_epsilon", config.epsilon},
        {"hidden", config.hidden}}},
      {"seed", config.seed},
      {"log",
       {{"epochs_run", log.size()},
        {"final_loss", log.empty() ? 0.0 : log.back().loss},
        {"final_accuracy", log.empty() ? 0.0 : log.back().accuracy},
        {"digest", hex}}}};
  return j.dump();
}

}  // namespace relscope
