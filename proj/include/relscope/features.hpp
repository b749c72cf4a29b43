#ifndef RELSCOPE_FEATURES_HPP
#define RELSCOPE_FEATURES_HPP

#include "relscope/common.hpp"
#include "relscope/image.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace relscope {

using FeatureVector = Eigen::VectorXf;

enum class ExtractorKind { FrozenConv, RawDownsample, External };

std::string_view extractor_kind_name(ExtractorKind k);
ExtractorKind parse_extractor_kind(std::string_view s);

// One conv -> ReLU -> max-pool stage with "same" padding.
struct ConvStage {
  int out_channels = 8;
  int kernel = 3;       // odd
  int conv_stride = 1;
  int pool = 2;         // window == stride; 1 disables pooling
  friend bool operator==(const ConvStage&, const ConvStage&) = default;
};

struct ExtractorSpec {
  ExtractorKind kind = ExtractorKind::FrozenConv;
  std::uint64_t seed = 1;
  int input_size = 224;  // square input, images are resized to this
  std::vector<ConvStage> plan = default_plan();
  int grid_rows = 32, grid_cols = 32;  // RawDownsample
  int output_dim = 4096;               // declared D

  // 224 -> conv s2 -> 112 -> pool 2 -> 56 -> pool 7 -> 8; 8 x 8 x 64 = 4096.
  static std::vector<ConvStage> default_plan() { return {{8, 5, 2, 2}, {16, 3, 1, 7}, {64, 3, 1, 1}}; }
};

// Flattened output size implied by the layer plan or downsample grid; throws
// DimensionError when a stage does not fit its input.
int planned_output_dim(const ExtractorSpec& spec);

// Immutable once built; safe to share across threads.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int output_dim() const = 0;
  virtual bool supports_images() const { return true; }
  virtual FeatureVector extract(const RgbImage& image) const = 0;
  const ExtractorSpec& spec() const { return spec_; }

 protected:
  explicit FeatureExtractor(ExtractorSpec spec) : spec_(std::move(spec)) {}
  ExtractorSpec spec_;
};

class FrozenConvExtractor final : public FeatureExtractor {
 public:
  explicit FrozenConvExtractor(const ExtractorSpec& spec);
  int output_dim() const override { return spec_.output_dim; }
  FeatureVector extract(const RgbImage& image) const override;

  // Filter bank of stage i: out_channels x (in_channels * k * k).
  const RowMatrixXf& weights(size_t stage) const { return weights_.at(stage); }
  size_t num_stages() const { return weights_.size(); }

 private:
  std::vector<RowMatrixXf> weights_;
};

class RawDownsampleExtractor final : public FeatureExtractor {
 public:
  explicit RawDownsampleExtractor(const ExtractorSpec& spec);
  int output_dim() const override { return spec_.output_dim; }
  FeatureVector extract(const RgbImage& image) const override;
};

// Placeholder for features computed outside this tool. Cannot see images.
class ExternalFeatureSource final : public FeatureExtractor {
 public:
  explicit ExternalFeatureSource(const ExtractorSpec& spec) : FeatureExtractor(spec) {}
  int output_dim() const override { return spec_.output_dim; }
  bool supports_images() const override { return false; }
  FeatureVector extract(const RgbImage&) const override;
};

std::shared_ptr<const FeatureExtractor> build_extractor(const ExtractorSpec& spec);

// Planar float tensor in [0, 1], channels x (height * width).
RowMatrixXf image_to_planes(const RgbImage& image);

struct FeatureSet {
  RowMatrixXf vectors;  // N x D
  RowMatrixXf labels;   // N x z one-hot
  std::string source;

  Index size() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
  Index num_classes() const { return labels.cols(); }
  int label(Index i) const;
  // Throws DataError unless rows agree and every label row is a one-hot.
  void validate() const;
  FeatureSet subset(const std::vector<Index>& rows) const;
};

RowMatrixXf one_hot(const std::vector<int>& labels, int num_classes);

void write_feature_file(const FeatureSet& set, const std::filesystem::path& path);
FeatureSet load_feature_file(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_feature_file(const FeatureSet& set);
FeatureSet decode_feature_file(std::span<const std::uint8_t> bytes);

}  // namespace relscope

#endif  // RELSCOPE_FEATURES_HPP
