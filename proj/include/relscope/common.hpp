#ifndef RELSCOPE_COMMON_HPP
#define RELSCOPE_COMMON_HPP

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relscope {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXf = RowMatrix<float>;
using RowMatrixXd = RowMatrix<double>;

// Error hierarchy. The CLI maps UsageError to exit status 2 and every other
// Error to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const { return "error"; }
};

#define RELSCOPE_DEFINE_ERROR(Name, Kind)                         \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    std::string_view kind() const override { return Kind; }       \
  };

RELSCOPE_DEFINE_ERROR(DimensionError, "dimension")
RELSCOPE_DEFINE_ERROR(PlacementInfeasible, "placement-infeasible")
RELSCOPE_DEFINE_ERROR(AssetError, "asset")
RELSCOPE_DEFINE_ERROR(FormatError, "format")
RELSCOPE_DEFINE_ERROR(DataError, "data")
RELSCOPE_DEFINE_ERROR(IoError, "io")
RELSCOPE_DEFINE_ERROR(NumericError, "numeric")
RELSCOPE_DEFINE_ERROR(UnsupportedConfiguration, "unsupported-configuration")
RELSCOPE_DEFINE_ERROR(UsageError, "usage")

#undef RELSCOPE_DEFINE_ERROR

enum class Relation : std::uint8_t { Above = 0, Beside = 1, Behind = 2 };

inline constexpr int kNumRelations = 3;
inline constexpr std::array<Relation, kNumRelations> kAllRelations = {
    Relation::Above, Relation::Beside, Relation::Behind};

constexpr int relation_index(Relation r) { return static_cast<int>(r); }

inline std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::Above:
      return "above";
    case Relation::Beside:
      return "beside";
    case Relation::Behind:
      return "behind";
  }
  return "?";
}

inline std::optional<Relation> parse_relation(std::string_view s) {
  for (Relation r : kAllRelations)
    if (relation_name(r) == s) return r;
  return std::nullopt;
}

inline Relation relation_from_index(int i) {
  if (i < 0 || i >= kNumRelations)
    throw DataError("relation index out of range: " + std::to_string(i));
  return static_cast<Relation>(i);
}

// Column name for class index i; relation names for the first three classes.
inline std::string class_name(int i) {
  if (i >= 0 && i < kNumRelations) return std::string(relation_name(relation_from_index(i)));
  return "class" + std::to_string(i);
}

}  // namespace relscope

#endif  // RELSCOPE_COMMON_HPP
