#include "relscope/mlp.hpp"

#include <doctest.h>

#include <cmath>

using namespace relscope;

namespace {

using ModelD = MlpModel<double>;

// Mean cross entropy of a batch computed directly from the definition.
double batch_loss(const ModelD& m, const RowMatrixXd& x, const RowMatrixXd& y) {
  const auto pass = forward(m, x);
  double s = 0.0;
  for (Index i = 0; i < x.rows(); ++i) s += cross_entropy(pass.probabilities.row(i), y.row(i));
  return s / static_cast<double>(x.rows());
}

FeatureSet toy_set(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  FeatureSet s;
  s.vectors.resize(n, d);
  std::vector<int> labels;
  for (Index i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 3);
    labels.push_back(y);
    for (Index j = 0; j < d; ++j) s.vectors(i, j) = g(rng) + (j % 3 == y ? 3.0f : 0.0f);
  }
  s.labels = one_hot(labels, 3);
  return s;
}

}  // namespace

TEST_CASE("gradient matches central finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelD m = ModelD::initialized(8, {5, 4}, 3, seed);
    for (auto& l : m.layers()) {
      Rng r(seed + 100);
      for (Index j = 0; j < l.bias.size(); ++j) l.bias[j] = uniform_real(r, 0.05, 0.3);
    }
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    RowMatrixXd x(6, 8);
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    RowMatrixXd y = RowMatrixXd::Zero(6, 3);
    for (Index i = 0; i < 6; ++i) y(i, i % 3) = 1.0;

    const auto grad = gradient(m, x, y);
    const double h = 1e-6;
    double worst = 0.0;
    for (size_t l = 0; l < m.layers().size(); ++l) {
      auto check = [&](double& p, double analytic) {
        const double keep = p;
        p = keep + h;
        const double up = batch_loss(m, x, y);
        p = keep - h;
        const double down = batch_loss(m, x, y);
        p = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(analytic));
        if (scale < 1e-7) return;
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
      };
      auto& W = m.layers()[l].weights;
      for (Index i = 0; i < W.rows(); ++i)
        for (Index j = 0; j < W.cols(); ++j) check(W(i, j), grad.weights[l](i, j));
      auto& b = m.layers()[l].bias;
      for (Index j = 0; j < b.size(); ++j) check(b[j], grad.biases[l][j]);
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("softmax rows sum to one for large logits") {
  RowMatrixXd z(4, 3);
  z << 1e3, -1e3, 0, -1e3, -1e3, -1e3, 1e3, 1e3 - 1, 999.5, 0.1, 0.2, 0.3;
  const RowMatrixXd p = softmax_rows(z);
  for (Index i = 0; i < p.rows(); ++i) {
    CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-9);
    CHECK(p.row(i).allFinite());
  }
  CHECK(p(1, 0) == doctest::Approx(1.0 / 3));
}

TEST_CASE("cross entropy edge cases") {
  Eigen::RowVector3d q(1.0, 0.0, 0.0), y(1.0, 0.0, 0.0);
  CHECK(cross_entropy(q, y) == 0.0);
  Eigen::RowVector3d wrong(0.0, 1.0, 0.0);
  CHECK(cross_entropy(q, wrong) == doctest::Approx(-std::log(1e-12)));
  Eigen::RowVector3d bad(0.5, 0.5, 0.5);
  CHECK_THROWS_AS(cross_entropy(bad, y), DataError);
  Eigen::RowVector3d two(1.0, 1.0, 0.0);
  CHECK_THROWS_AS(cross_entropy(q, two), DataError);

  Eigen::RowVector3d z(2.0, -1.0, 0.5);
  const RowMatrixXd p = softmax_rows(z);
  CHECK(cross_entropy_logits(z, 1) == doctest::Approx(-std::log(p(0, 1))).epsilon(1e-12));
  Eigen::RowVector3d huge(1e4, 0.0, 0.0);
  CHECK(cross_entropy_logits(huge, 1) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("all-ones ablation is a bit-exact identity") {
  const Model m = Model::initialized(20, {16, 8}, 3, 4);
  const FeatureSet s = toy_set(30, 20, 1);
  AblationSet<float> ones{AblationVector<float>::ones(16), AblationVector<float>::ones(8)};
  const auto a = forward(m, s.vectors);
  const auto b = forward(m, s.vectors, &ones);
  CHECK(a.logits == b.logits);
  CHECK(a.probabilities == b.probabilities);
}

TEST_CASE("ablation vectors reject bad input") {
  CHECK_THROWS_AS(AblationVector<float>(RowVector<float>::Constant(3, 0.5f)), DataError);
  const Model m = Model::initialized(4, {3}, 3, 0);
  const Index bad[] = {3};
  CHECK_THROWS_AS(ablate_nodes(m, 0, bad), DimensionError);
  CHECK_THROWS_AS(ablate_nodes(m, 1, bad), DimensionError);
}

TEST_CASE("hidden activations feed logits_from_hidden consistently") {
  const Model m = Model::initialized(10, {7, 5}, 3, 2);
  const FeatureSet s = toy_set(9, 10, 2);
  const auto pass = forward(m, s.vectors);
  for (Index layer = 0; layer < 2; ++layer) {
    const RowMatrixXf act = hidden_activations(m, s.vectors, layer);
    CHECK(logits_from_hidden(m, layer, act) == pass.logits.cast<double>());
  }
}

TEST_CASE("training separates an easy problem and is deterministic") {
  const FeatureSet s = toy_set(90, 12, 3);
  TrainConfig cfg;
  cfg.hidden = {16, 8};
  cfg.epochs = 60;
  cfg.seed = 5;
  const auto a = train(Model::initialized(12, cfg.hidden, 3, 5), s, cfg);
  const auto b = train(Model::initialized(12, cfg.hidden, 3, 5), s, cfg);
  CHECK(a.log.back().loss < a.log.front().loss);
  CHECK(evaluate(a.model, s).accuracy >= 0.95);
  for (size_t l = 0; l < a.model.layers().size(); ++l) CHECK(a.model.layers()[l].weights == b.model.layers()[l].weights);
}

TEST_CASE("early stop ends training when the loss drops below the bar") {
  const FeatureSet s = toy_set(30, 6, 4);
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 10;
  cfg.early_stop_loss = 1e9;
  const auto r = train(Model::initialized(6, cfg.hidden, 3, 0), s, cfg);
  CHECK(r.log.size() == 1);
}

TEST_CASE("evaluate is independent of chunking and reports absent classes as NaN") {
  const Model m = Model::initialized(5, {6}, 3, 1);
  FeatureSet s = toy_set(kEvalChunk + 37, 5, 6);
  const EvalResult full = evaluate(m, s);
  for (Index i = 0; i < s.size(); i += 97) {
    const auto one = forward(m, s.vectors.row(i));
    CHECK(full.predictions[static_cast<size_t>(i)] == argmax(one.probabilities.row(0)));
  }
  std::vector<int> lab(static_cast<size_t>(s.size()), 0);
  s.labels = one_hot(lab, 3);
  CHECK(std::isnan(evaluate(m, s).class_accuracy[2]));
}

TEST_CASE("dimension mismatches are rejected") {
  const Model m = Model::initialized(5, {6}, 3, 1);
  const FeatureSet s = toy_set(4, 7, 0);
  CHECK_THROWS_AS(evaluate(m, s), DimensionError);
  CHECK_THROWS_AS(Model(0, {3}, 3), DimensionError);
}
