#include "relscope/features.hpp"

#include "relscope/binary_io.hpp"
#include "relscope/rng.hpp"

#include <cmath>
#include <random>

namespace relscope {

std::string_view extractor_kind_name(ExtractorKind k) {
  switch (k) {
    case ExtractorKind::FrozenConv:
      return "frozen_conv";
    case ExtractorKind::RawDownsample:
      return "raw_downsample";
    case ExtractorKind::External:
      return "external";
  }
  return "?";
}

ExtractorKind parse_extractor_kind(std::string_view s) {
  for (auto k : {ExtractorKind::FrozenConv, ExtractorKind::RawDownsample, ExtractorKind::External})
    if (extractor_kind_name(k) == s) return k;
  throw UsageError("unknown extractor kind '" + std::string(s) + "'");
}

namespace {

struct StageShape {
  int channels, height, width;
};

int conv_out(int in, int kernel, int stride) { return (in + 2 * (kernel / 2) - kernel) / stride + 1; }

std::vector<StageShape> plan_shapes(const ExtractorSpec& spec) {
  std::vector<StageShape> shapes{{3, spec.input_size, spec.input_size}};
  for (size_t i = 0; i < spec.plan.size(); ++i) {
    const ConvStage& st = spec.plan[i];
    const std::string where = "stage " + std::to_string(i);
    if (st.out_channels < 1 || st.kernel < 1 || st.kernel % 2 == 0 || st.conv_stride < 1 || st.pool < 1)
      throw DimensionError(where + ": channels/stride/pool must be positive and kernel odd");
    const StageShape& in = shapes.back();
    const int h = conv_out(in.height, st.kernel, st.conv_stride);
    const int w = conv_out(in.width, st.kernel, st.conv_stride);
    if (h < st.pool || w < st.pool) throw DimensionError(where + ": pool window larger than feature map");
    shapes.push_back({st.out_channels, h / st.pool, w / st.pool});
  }
  return shapes;
}

// im2col with zero "same" padding; rows are (channel, ky, kx), columns output positions.
RowMatrixXf im2col(const RowMatrixXf& planes, int height, int width, int kernel, int stride,
                   int out_h, int out_w) {
  const int channels = static_cast<int>(planes.rows());
  const int pad = kernel / 2;
  RowMatrixXf cols = RowMatrixXf::Zero(static_cast<Index>(channels) * kernel * kernel,
                                       static_cast<Index>(out_h) * out_w);
  for (int c = 0; c < channels; ++c) {
    const float* plane = planes.row(c).data();
    for (int ky = 0; ky < kernel; ++ky)
      for (int kx = 0; kx < kernel; ++kx) {
        float* dst = cols.row((static_cast<Index>(c) * kernel + ky) * kernel + kx).data();
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= height) continue;
          const float* src = plane + static_cast<size_t>(iy) * width;
          float* out = dst + static_cast<size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < width) out[ox] = src[ix];
          }
        }
      }
  }
  return cols;
}

RowMatrixXf max_pool(const RowMatrixXf& maps, int height, int width, int pool) {
  if (pool == 1) return maps;
  const int ph = height / pool, pw = width / pool;
  RowMatrixXf out(maps.rows(), static_cast<Index>(ph) * pw);
  for (Index c = 0; c < maps.rows(); ++c) {
    const float* src = maps.row(c).data();
    float* dst = out.row(c).data();
    for (int py = 0; py < ph; ++py)
      for (int px = 0; px < pw; ++px) {
        float m = src[static_cast<size_t>(py * pool) * width + px * pool];
        for (int dy = 0; dy < pool; ++dy) {
          const float* row = src + static_cast<size_t>(py * pool + dy) * width + px * pool;
          for (int dx = 0; dx < pool; ++dx) m = std::max(m, row[dx]);
        }
        dst[py * pw + px] = m;
      }
  }
  return out;
}

void check_finite_input(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.data.size() != 3 * static_cast<size_t>(image.width) * image.height)
    throw DimensionError("malformed image raster");
}

}  // namespace

int planned_output_dim(const ExtractorSpec& spec) {
  switch (spec.kind) {
    case ExtractorKind::FrozenConv: {
      const auto shapes = plan_shapes(spec);
      const auto& last = shapes.back();
      return last.channels * last.height * last.width;
    }
    case ExtractorKind::RawDownsample:
      if (spec.grid_rows < 1 || spec.grid_cols < 1 || spec.grid_rows > spec.input_size ||
          spec.grid_cols > spec.input_size)
        throw DimensionError("downsample grid must be within [1, input_size]");
      return 3 * spec.grid_rows * spec.grid_cols;
    case ExtractorKind::External:
      return spec.output_dim;
  }
  return 0;
}

RowMatrixXf image_to_planes(const RgbImage& image) {
  check_finite_input(image);
  const Index n = static_cast<Index>(image.width) * image.height;
  RowMatrixXf planes(3, n);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) planes(c, i) = image.data[3 * i + c] / 255.0f;
  return planes;
}

FrozenConvExtractor::FrozenConvExtractor(const ExtractorSpec& spec) : FeatureExtractor(spec) {
  const auto shapes = plan_shapes(spec);
  Rng rng = make_rng(spec.seed, "extractor");
  for (size_t i = 0; i < spec.plan.size(); ++i) {
    const ConvStage& st = spec.plan[i];
    const int in_ch = shapes[i].channels;
    const int taps = st.kernel * st.kernel;
    // Scaled Gaussian (He) filters, centered per input channel so that flat
    // regions produce no response.
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / (in_ch * taps)));
    RowMatrixXf w(st.out_channels, static_cast<Index>(in_ch) * taps);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<float>(gauss(rng));
    for (Index r = 0; r < w.rows(); ++r)
      for (int c = 0; c < in_ch; ++c) {
        auto block = w.row(r).segment(static_cast<Index>(c) * taps, taps);
        block.array() -= block.mean();
      }
    weights_.push_back(std::move(w));
  }
}

FeatureVector FrozenConvExtractor::extract(const RgbImage& image) const {
  const RgbImage sized = resize_nearest(image, spec_.input_size, spec_.input_size);
  RowMatrixXf act = image_to_planes(sized);
  if (!act.allFinite()) throw NumericError("non-finite pixel input");
  int h = spec_.input_size, w = spec_.input_size;
  for (size_t i = 0; i < spec_.plan.size(); ++i) {
    const ConvStage& st = spec_.plan[i];
    const int oh = conv_out(h, st.kernel, st.conv_stride), ow = conv_out(w, st.kernel, st.conv_stride);
    const RowMatrixXf cols = im2col(act, h, w, st.kernel, st.conv_stride, oh, ow);
    RowMatrixXf conv = weights_[i] * cols;
    conv = conv.cwiseMax(0.0f);
    act = max_pool(conv, oh, ow, st.pool);
    h = oh / st.pool;
    w = ow / st.pool;
  }
  return Eigen::Map<const FeatureVector>(act.data(), act.size());
}

RawDownsampleExtractor::RawDownsampleExtractor(const ExtractorSpec& spec) : FeatureExtractor(spec) {}

FeatureVector RawDownsampleExtractor::extract(const RgbImage& image) const {
  const RgbImage sized = resize_nearest(image, spec_.input_size, spec_.input_size);
  const RowMatrixXf planes = image_to_planes(sized);
  const int n = spec_.input_size, rows = spec_.grid_rows, cols = spec_.grid_cols;
  FeatureVector out(3 * rows * cols);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < rows; ++r)
      for (int q = 0; q < cols; ++q) {
        const int y0 = r * n / rows, y1 = (r + 1) * n / rows;
        const int x0 = q * n / cols, x1 = (q + 1) * n / cols;
        double sum = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) sum += planes(c, static_cast<Index>(y) * n + x);
        out[(c * rows + r) * cols + q] = static_cast<float>(sum / ((y1 - y0) * (x1 - x0)));
      }
  return out;
}

FeatureVector ExternalFeatureSource::extract(const RgbImage&) const {
  throw UnsupportedConfiguration("external feature source cannot extract features from images");
}

std::shared_ptr<const FeatureExtractor> build_extractor(const ExtractorSpec& spec) {
  const int d = planned_output_dim(spec);
  if (d != spec.output_dim)
    throw DimensionError("declared output_dim " + std::to_string(spec.output_dim) +
                         " does not match the plan's " + std::to_string(d));
  if (spec.input_size < 1) throw DimensionError("input_size must be positive");
  switch (spec.kind) {
    case ExtractorKind::FrozenConv:
      return std::make_shared<FrozenConvExtractor>(spec);
    case ExtractorKind::RawDownsample:
      return std::make_shared<RawDownsampleExtractor>(spec);
    case ExtractorKind::External:
      if (spec.output_dim < 1) throw DimensionError("external output_dim must be positive");
      return std::make_shared<ExternalFeatureSource>(spec);
  }
  throw UsageError("unknown extractor kind");
}

int FeatureSet::label(Index i) const {
  Index best = 0;
  labels.row(i).maxCoeff(&best);
  return static_cast<int>(best);
}

void FeatureSet::validate() const {
  if (labels.rows() != vectors.rows()) throw DataError("feature and label row counts differ");
  if (labels.cols() < 1) throw DataError("label width must be positive");
  for (Index i = 0; i < labels.rows(); ++i) {
    int ones = 0;
    for (Index j = 0; j < labels.cols(); ++j) {
      const float v = labels(i, j);
      if (v == 1.0f) ++ones;
      else if (v != 0.0f) throw DataError("label row " + std::to_string(i) + " is not one-hot");
    }
    if (ones != 1) throw DataError("label row " + std::to_string(i) + " is not one-hot");
  }
  if (!vectors.allFinite()) throw DataError("feature set contains non-finite values");
}

FeatureSet FeatureSet::subset(const std::vector<Index>& rows) const {
  FeatureSet out;
  out.vectors.resize(static_cast<Index>(rows.size()), vectors.cols());
  out.labels.resize(static_cast<Index>(rows.size()), labels.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.vectors.row(static_cast<Index>(i)) = vectors.row(rows[i]);
    out.labels.row(static_cast<Index>(i)) = labels.row(rows[i]);
  }
  out.source = source;
  return out;
}

RowMatrixXf one_hot(const std::vector<int>& labels, int num_classes) {
  RowMatrixXf out = RowMatrixXf::Zero(static_cast<Index>(labels.size()), num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw DataError("label out of range");
    out(static_cast<Index>(i), labels[i]) = 1.0f;
  }
  return out;
}

namespace {
constexpr std::string_view kFeatureMagic = "RSCF";
constexpr std::uint32_t kFeatureVersion = 1;
}  // namespace

std::vector<std::uint8_t> encode_feature_file(const FeatureSet& set) {
  set.validate();
  ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u32(kFeatureVersion);
  w.u64(static_cast<std::uint64_t>(set.size()));
  w.u32(static_cast<std::uint32_t>(set.dim()));
  w.u32(static_cast<std::uint32_t>(set.num_classes()));
  for (Index i = 0; i < set.size(); ++i)
    for (Index j = 0; j < set.dim(); ++j) w.f32(set.vectors(i, j));
  for (Index i = 0; i < set.size(); ++i)
    for (Index j = 0; j < set.num_classes(); ++j) w.f32(set.labels(i, j));
  return std::move(w.buffer());
}

FeatureSet decode_feature_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 24) throw FormatError("feature file header truncated");
  if (r.bytes(4) != kFeatureMagic) throw FormatError("bad feature file magic");
  if (r.u32() != kFeatureVersion) throw FormatError("unsupported feature file version");
  const std::uint64_t n = r.u64();
  const std::uint32_t d = r.u32();
  const std::uint32_t z = r.u32();
  const unsigned __int128 expected = static_cast<unsigned __int128>(n) * (d + static_cast<std::uint64_t>(z)) * 4;
  if (expected != r.remaining())
    throw FormatError("feature file payload size does not match header (N=" + std::to_string(n) + ")");
  FeatureSet set;
  set.vectors.resize(static_cast<Index>(n), d);
  set.labels.resize(static_cast<Index>(n), z);
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < static_cast<Index>(d); ++j) set.vectors(i, j) = r.f32();
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < static_cast<Index>(z); ++j) set.labels(i, j) = r.f32();
  set.validate();
  return set;
}

void write_feature_file(const FeatureSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, encode_feature_file(set));
}

FeatureSet load_feature_file(const std::filesystem::path& path) {
  FeatureSet set = decode_feature_file(read_file(path));
  set.source = path.string();
  return set;
}

}  // namespace relscope
