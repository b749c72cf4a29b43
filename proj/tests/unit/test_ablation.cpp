#include "relscope/ablation.hpp"

#include <doctest.h>

using namespace relscope;

namespace {

FeatureSet random_set(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  FeatureSet s;
  s.vectors.resize(n, d);
  std::vector<int> labels;
  for (Index i = 0; i < n; ++i) {
    labels.push_back(static_cast<int>(i % 3));
    for (Index j = 0; j < d; ++j) s.vectors(i, j) = g(rng);
  }
  s.labels = one_hot(labels, 3);
  return s;
}

NodeInfluenceMatrix matrix_of(const RowMatrixXd& e) {
  NodeInfluenceMatrix m;
  m.mean_influence = e;
  m.class_counts.assign(static_cast<size_t>(e.cols()), 4);
  return m;
}

}  // namespace

TEST_CASE("node scan agrees with evaluating the ablated model") {
  const Model model = Model::initialized(12, {9, 6}, 3, 3);
  const FeatureSet s = random_set(kEvalChunk + 20, 12, 1);
  const EvalResult base = evaluate(model, s);
  for (Index layer = 0; layer < 2; ++layer) {
    const NodeInfluenceMatrix m = node_scan(model, s, layer, 1);
    const NodeInfluenceMatrix m3 = node_scan(model, s, layer, 3);
    CHECK(m.mean_influence.cwiseEqual(m3.mean_influence).all());
    for (Index j = 0; j < m.nodes(); ++j) {
      const Index node[] = {j};
      const auto abl = ablate_nodes(model, layer, node);
      const EvalResult r = evaluate(model, s, &abl);
      std::vector<double> sums(3, 0.0);
      for (Index i = 0; i < s.size(); ++i)
        sums[static_cast<size_t>(s.label(i))] +=
            r.cross_entropy[static_cast<size_t>(i)] - base.cross_entropy[static_cast<size_t>(i)];
      for (int y = 0; y < 3; ++y)
        CHECK(m.mean_influence(j, y) ==
              doctest::Approx(sums[static_cast<size_t>(y)] / static_cast<double>(m.class_counts[static_cast<size_t>(y)]))
                  .epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(node_scan(model, s, 2, 1), DimensionError);
}

TEST_CASE("a dead node has a zero influence row") {
  Model model = Model::initialized(6, {5}, 3, 2);
  model.layers()[0].weights.col(3).setZero();
  model.layers()[0].bias[3] = -1.0f;
  const NodeInfluenceMatrix m = node_scan(model, random_set(30, 6, 4), 0, 1);
  CHECK(m.mean_influence.row(3).isZero(0.0));
}

TEST_CASE("single sample leaves other classes NaN and unrankable") {
  const Model model = Model::initialized(6, {5}, 3, 2);
  const FeatureSet one = random_set(1, 6, 5);
  const NodeInfluenceMatrix m = node_scan(model, one, 0, 1);
  CHECK(m.class_counts == std::vector<long>{1, 0, 0});
  CHECK(std::isnan(m.mean_influence(0, 1)));
  CHECK_THROWS_AS(select_groups(m, 0.5), DataError);
  CHECK(node_matrix_summary_json(m, 0.5).find("top_nodes") == std::string::npos);
}

TEST_CASE("group size rounds up without float noise") {
  CHECK(group_size(512, 0.25) == 128);
  CHECK(group_size(10, 0.25) == 3);
  CHECK(group_size(10, 0.3) == 3);
  CHECK(group_size(7, 1.0) == 7);
  CHECK(group_size(3, 0.01) == 1);
}

TEST_CASE("groups take the top nodes per class with ties to the lower index") {
  RowMatrixXd e(5, 3);
  e << 0.5, 0.1, 0.0,
       0.9, 0.1, 0.0,
       0.5, 0.3, 0.0,
       -1., 0.2, 0.0,
       0.2, 0.3, 0.0;
  const auto g = select_groups(matrix_of(e), 0.5);
  REQUIRE(g.size() == 3);
  CHECK(g[0].nodes == std::vector<Index>{1, 0, 2});
  CHECK(g[1].nodes == std::vector<Index>{2, 4, 3});
  CHECK(g[2].nodes == std::vector<Index>{0, 1, 2});
  CHECK_THROWS_AS(select_groups(matrix_of(e), 0.0), UsageError);
  CHECK_THROWS_AS(select_groups(matrix_of(e), 1.5), UsageError);
}

TEST_CASE("cost decomposition splits the mean absolute influence") {
  const CostDecomposition d = decompose({1.0, -0.5, 0.0, 2.0});
  CHECK(d.positive == 2);
  CHECK(d.negative == 1);
  CHECK(d.zero == 1);
  CHECK(d.mean_positive == doctest::Approx(0.75));
  CHECK(d.mean_negative == doctest::Approx(0.125));
  CHECK(d.mean_abs == doctest::Approx(d.mean_positive + d.mean_negative));
  CHECK(decompose({}).mean_abs == 0.0);
}

TEST_CASE("group ablation reports per-group accuracy and costs") {
  const Model model = Model::initialized(8, {10}, 3, 7);
  const FeatureSet s = random_set(60, 8, 2);
  const auto m = node_scan(model, s, 0, 1);
  const auto groups = select_groups(m, 0.3);
  const auto report = group_ablation(model, s, 0, groups);
  CHECK(report.rows.size() == 3);
  CHECK(report.baseline.accuracy == evaluate(model, s).accuracy);
  const std::string table = accuracy_table_csv(report);
  CHECK(table.rfind("layer,row,above,beside,behind\nFC-0,baseline,", 0) == 0);
  CHECK(table.find("FC-0,group 2,") != std::string::npos);
  CHECK(cost_decomposition_csv(report).find("FC-0,1,beside,3,") != std::string::npos);
}

TEST_CASE("node matrix CSV round trip") {
  const Model model = Model::initialized(8, {6}, 3, 7);
  const auto m = node_scan(model, random_set(20, 8, 3), 0, 1);
  const auto back = node_matrix_from_csv(node_matrix_csv(m), 0);
  CHECK(back.mean_influence == m.mean_influence);
  CHECK(back.class_counts == m.class_counts);
  CHECK_THROWS_AS(node_matrix_from_csv("bad header\n", 0), FormatError);
  CHECK_THROWS_AS(node_matrix_from_csv("node_index,relation,mean_E,count\n0,above,x,1\n", 0), FormatError);
}
