#ifndef RELSCOPE_MLP_HPP
#define RELSCOPE_MLP_HPP

#include "relscope/common.hpp"
#include "relscope/features.hpp"
#include "relscope/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

namespace relscope {

// Fully connected layer: out = in * W + b, W is (inputs x units).
template <typename Scalar>
struct DenseLayer {
  RowMatrix<Scalar> weights;
  RowVector<Scalar> bias;

  Index inputs() const { return weights.rows(); }
  Index units() const { return weights.cols(); }
};

// ReLU hidden layers followed by a softmax output layer.
template <typename Scalar>
class MlpModel {
 public:
  MlpModel() = default;

  // Zero-initialized network: input_dim -> hidden... -> classes.
  MlpModel(Index input_dim, const std::vector<Index>& hidden, Index classes) : input_dim_(input_dim) {
    if (input_dim < 1 || classes < 1) throw DimensionError("model dimensions must be positive");
    Index prev = input_dim;
    std::vector<Index> sizes = hidden;
    sizes.push_back(classes);
    for (Index n : sizes) {
      if (n < 1) throw DimensionError("layer sizes must be positive");
      layers_.push_back({RowMatrix<Scalar>::Zero(prev, n), RowVector<Scalar>::Zero(n)});
      prev = n;
    }
  }

  // He-uniform hidden layers, Glorot-uniform output layer, zero biases.
  static MlpModel initialized(Index input_dim, const std::vector<Index>& hidden, Index classes,
                              std::uint64_t seed) {
    MlpModel m(input_dim, hidden, classes);
    Rng rng = make_rng(seed, "init");
    for (size_t l = 0; l < m.layers_.size(); ++l) {
      auto& W = m.layers_[l].weights;
      const bool output = l + 1 == m.layers_.size();
      const double limit = output ? std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()))
                                  : std::sqrt(6.0 / static_cast<double>(W.rows()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Index i = 0; i < W.rows(); ++i)
        for (Index j = 0; j < W.cols(); ++j) W(i, j) = static_cast<Scalar>(dist(rng));
    }
    return m;
  }

  Index input_dim() const { return input_dim_; }
  Index num_classes() const { return layers_.empty() ? 0 : layers_.back().units(); }
  Index num_hidden() const { return static_cast<Index>(layers_.size()) - 1; }
  Index hidden_size(Index l) const { return layers_.at(static_cast<size_t>(l)).units(); }

  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

  template <typename Other>
  MlpModel<Other> cast() const {
    MlpModel<Other> out;
    out.input_dim_ = input_dim_;
    for (const auto& l : layers_)
      out.layers_.push_back({l.weights.template cast<Other>(), l.bias.template cast<Other>()});
    return out;
  }

  // Throws DimensionError if layer shapes do not chain or values are non-finite.
  void validate() const {
    Index prev = input_dim_;
    if (layers_.empty()) throw DimensionError("model has no layers");
    for (const auto& l : layers_) {
      if (l.inputs() != prev || l.bias.size() != l.units())
        throw DimensionError("layer shapes do not chain");
      if (!l.weights.allFinite() || !l.bias.allFinite()) throw NumericError("non-finite model parameter");
      prev = l.units();
    }
  }

 private:
  template <typename>
  friend class MlpModel;

  Index input_dim_ = 0;
  std::vector<DenseLayer<Scalar>> layers_;
};

// {0,1} mask multiplied into a hidden layer's post-ReLU output. An empty
// vector means "no ablation" for that layer.
template <typename Scalar>
class AblationVector {
 public:
  AblationVector() = default;
  explicit AblationVector(RowVector<Scalar> mask) : mask_(std::move(mask)) {
    for (Index i = 0; i < mask_.size(); ++i)
      if (mask_[i] != Scalar(0) && mask_[i] != Scalar(1))
        throw DataError("ablation entries must be 0 or 1");
  }
  static AblationVector ones(Index n) { return AblationVector(RowVector<Scalar>::Ones(n)); }
  static AblationVector zeroing(Index n, std::span<const Index> nodes) {
    RowVector<Scalar> m = RowVector<Scalar>::Ones(n);
    for (Index j : nodes) {
      if (j < 0 || j >= n) throw DimensionError("ablated node index out of range");
      m[j] = Scalar(0);
    }
    return AblationVector(std::move(m));
  }

  bool empty() const { return mask_.size() == 0; }
  Index size() const { return mask_.size(); }
  const RowVector<Scalar>& mask() const { return mask_; }

 private:
  RowVector<Scalar> mask_;
};

// One entry per hidden layer (missing trailing entries mean no ablation).
template <typename Scalar>
using AblationSet = std::vector<AblationVector<Scalar>>;

template <typename Scalar>
AblationSet<Scalar> ablate_nodes(const MlpModel<Scalar>& model, Index layer, std::span<const Index> nodes) {
  if (layer < 0 || layer >= model.num_hidden()) throw DimensionError("hidden layer index out of range");
  AblationSet<Scalar> set(static_cast<size_t>(model.num_hidden()));
  set[static_cast<size_t>(layer)] = AblationVector<Scalar>::zeroing(model.hidden_size(layer), nodes);
  return set;
}

// Row-wise softmax computed in double with max subtraction.
template <typename Derived>
RowMatrixXd softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  RowMatrixXd p = logits.template cast<double>();
  for (Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

inline constexpr double kCrossEntropyClamp = 1e-12;

// -log(max(Q(y*), 1e-12)) for a one-hot P.
template <typename DerivedQ, typename DerivedP>
double cross_entropy(const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedP>& p) {
  if (q.size() != p.size() || q.size() == 0) throw DimensionError("cross_entropy: size mismatch");
  Index hot = -1;
  for (Index i = 0; i < p.size(); ++i) {
    const double v = static_cast<double>(p.coeff(i));
    if (v == 1.0) {
      if (hot >= 0) throw DataError("cross_entropy: label is not one-hot");
      hot = i;
    } else if (v != 0.0) {
      throw DataError("cross_entropy: label is not one-hot");
    }
  }
  if (hot < 0) throw DataError("cross_entropy: label is not one-hot");
  double sum = 0.0;
  for (Index i = 0; i < q.size(); ++i) {
    const double v = static_cast<double>(q.coeff(i));
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("cross_entropy: probability outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("cross_entropy: probabilities do not sum to 1");
  const double qy = static_cast<double>(q.coeff(hot));
  return 0.0 - std::log(std::max(qy, kCrossEntropyClamp));
}

// Same quantity as cross_entropy(softmax(z), onehot(y)), evaluated through
// log-sum-exp so it stays resolvable when Q(y*) rounds to 1.
template <typename Derived>
double cross_entropy_logits(const Eigen::MatrixBase<Derived>& z, int y) {
  if (z.size() == 0 || y < 0 || y >= z.size()) throw DimensionError("cross_entropy_logits: label out of range");
  Index top = 0;
  for (Index i = 1; i < z.size(); ++i)
    if (static_cast<double>(z.coeff(i)) > static_cast<double>(z.coeff(top))) top = i;
  const double m = static_cast<double>(z.coeff(top));
  double rest = 0.0;
  for (Index i = 0; i < z.size(); ++i)
    if (i != top) rest += std::exp(static_cast<double>(z.coeff(i)) - m);
  const double ce = (m - static_cast<double>(z.coeff(y))) + std::log1p(rest);
  if (!std::isfinite(ce)) throw NumericError("cross_entropy_logits: non-finite logits");
  return std::min(ce, -std::log(kCrossEntropyClamp));
}

// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v.coeff(i) > v.coeff(best)) best = i;
  return static_cast<int>(best);
}

template <typename Scalar>
struct ForwardPass {
  std::vector<RowMatrix<Scalar>> inputs;  // inputs[l] feeds layer l
  std::vector<RowMatrix<Scalar>> gates;   // d(out)/d(pre) per hidden layer: relu' * ablation * dropout
  RowMatrix<Scalar> logits;
  RowMatrixXd probabilities;
};

template <typename Scalar>
struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;  // dropout is active only when set
};

namespace detail {

template <typename Scalar>
void check_ablations(const MlpModel<Scalar>& model, const AblationSet<Scalar>* ablations) {
  if (!ablations) return;
  if (static_cast<Index>(ablations->size()) > model.num_hidden())
    throw DimensionError("more ablation vectors than hidden layers");
  for (size_t l = 0; l < ablations->size(); ++l)
    if (!(*ablations)[l].empty() && (*ablations)[l].size() != model.hidden_size(static_cast<Index>(l)))
      throw DimensionError("ablation vector length does not match layer " + std::to_string(l));
}

// Hidden layer l applied to `in`: max(0, in W + b), then ablation, then dropout.
template <typename Scalar>
RowMatrix<Scalar> hidden_forward(const MlpModel<Scalar>& model, size_t l, const RowMatrix<Scalar>& in,
                                 const AblationSet<Scalar>* ablations, const DropoutSpec<Scalar>& dropout,
                                 RowMatrix<Scalar>* gate) {
  const auto& layer = model.layers()[l];
  RowMatrix<Scalar> pre = in * layer.weights;
  pre.rowwise() += layer.bias;
  RowMatrix<Scalar> out = pre.cwiseMax(Scalar(0));
  const bool ablate = ablations && l < ablations->size() && !(*ablations)[l].empty();
  if (ablate) out.array().rowwise() *= (*ablations)[l].mask().array();
  RowMatrix<Scalar> keep;
  if (dropout.rng && dropout.rate > 0.0) {
    keep.resize(out.rows(), out.cols());
    std::bernoulli_distribution drop(dropout.rate);
    const Scalar scale = static_cast<Scalar>(1.0 / (1.0 - dropout.rate));
    for (Index i = 0; i < keep.rows(); ++i)
      for (Index j = 0; j < keep.cols(); ++j) keep(i, j) = drop(*dropout.rng) ? Scalar(0) : scale;
    out.array() *= keep.array();
  }
  if (gate) {
    *gate = (pre.array() > Scalar(0)).template cast<Scalar>().matrix();
    if (ablate) gate->array().rowwise() *= (*ablations)[l].mask().array();
    if (keep.size()) gate->array() *= keep.array();
  }
  return out;
}

}  // namespace detail

// Batched forward pass; rows of x are samples.
template <typename Scalar, typename Derived>
ForwardPass<Scalar> forward(const MlpModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x,
                            const std::type_identity_t<AblationSet<Scalar>>* ablations = nullptr,
                            const std::type_identity_t<DropoutSpec<Scalar>>& dropout = {}, bool keep_cache = false) {
  if (x.cols() != model.input_dim())
    throw DimensionError("input has " + std::to_string(x.cols()) + " features, model expects " +
                         std::to_string(model.input_dim()));
  detail::check_ablations(model, ablations);
  ForwardPass<Scalar> pass;
  RowMatrix<Scalar> act = x.template cast<Scalar>();
  const size_t hidden = static_cast<size_t>(model.num_hidden());
  for (size_t l = 0; l < hidden; ++l) {
    RowMatrix<Scalar> gate;
    RowMatrix<Scalar> next = detail::hidden_forward(model, l, act, ablations, dropout, keep_cache ? &gate : nullptr);
    if (keep_cache) {
      pass.inputs.push_back(std::move(act));
      pass.gates.push_back(std::move(gate));
    }
    act = std::move(next);
  }
  const auto& out = model.layers().back();
  pass.logits = act * out.weights;
  pass.logits.rowwise() += out.bias;
  if (keep_cache) pass.inputs.push_back(std::move(act));
  pass.probabilities = softmax_rows(pass.logits);
  return pass;
}

// Output of hidden layer `layer` (post-ReLU, before any ablation).
template <typename Scalar, typename Derived>
RowMatrix<Scalar> hidden_activations(const MlpModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x,
                                     Index layer) {
  if (layer < 0 || layer >= model.num_hidden()) throw DimensionError("hidden layer index out of range");
  if (x.cols() != model.input_dim()) throw DimensionError("input dimension mismatch");
  RowMatrix<Scalar> act = x.template cast<Scalar>();
  for (size_t l = 0; l <= static_cast<size_t>(layer); ++l)
    act = detail::hidden_forward<Scalar>(model, l, act, nullptr, {}, nullptr);
  return act;
}

// Continues a forward pass from the output of hidden layer `layer`; the rest
// of the network runs exactly as in forward().
template <typename Scalar>
RowMatrixXd logits_from_hidden(const MlpModel<Scalar>& model, Index layer, const RowMatrix<Scalar>& act_in) {
  RowMatrix<Scalar> act = act_in;
  for (size_t l = static_cast<size_t>(layer) + 1; l < static_cast<size_t>(model.num_hidden()); ++l)
    act = detail::hidden_forward<Scalar>(model, l, act, nullptr, {}, nullptr);
  const auto& out = model.layers().back();
  RowMatrix<Scalar> logits = act * out.weights;
  logits.rowwise() += out.bias;
  return logits.template cast<double>();
}

template <typename Scalar>
RowMatrixXd forward_from_hidden(const MlpModel<Scalar>& model, Index layer, const RowMatrix<Scalar>& act_in) {
  return softmax_rows(logits_from_hidden(model, layer, act_in));
}

template <typename Scalar>
struct Gradients {
  std::vector<RowMatrix<Scalar>> weights;
  std::vector<RowVector<Scalar>> biases;
  double loss = 0.0;  // mean cross entropy of the batch
  int correct = 0;
};

// Gradients of the batch-mean cross entropy with respect to every parameter.
template <typename Scalar, typename DX, typename DY>
Gradients<Scalar> gradient(const MlpModel<Scalar>& model, const Eigen::MatrixBase<DX>& x,
                           const Eigen::MatrixBase<DY>& onehot, const DropoutSpec<Scalar>& dropout = {}) {
  if (x.rows() == 0) throw DataError("gradient of an empty batch");
  if (onehot.rows() != x.rows() || onehot.cols() != model.num_classes())
    throw DimensionError("label matrix does not match batch/classes");
  const ForwardPass<Scalar> pass = forward(model, x, nullptr, dropout, true);
  const double inv_n = 1.0 / static_cast<double>(x.rows());

  Gradients<Scalar> g;
  const size_t L = model.layers().size();
  g.weights.resize(L);
  g.biases.resize(L);
  for (Index i = 0; i < x.rows(); ++i) {
    g.loss += cross_entropy(pass.probabilities.row(i), onehot.row(i).template cast<double>());
    if (onehot(i, argmax(pass.probabilities.row(i))) == 1) ++g.correct;
  }
  g.loss *= inv_n;

  RowMatrix<Scalar> delta = ((pass.probabilities - onehot.template cast<double>()) * inv_n).template cast<Scalar>();
  for (size_t l = L; l-- > 0;) {
    const auto& in = pass.inputs[l];
    g.weights[l] = in.transpose() * delta;
    g.biases[l] = delta.colwise().sum();
    if (l > 0) {
      RowMatrix<Scalar> back = delta * model.layers()[l].weights.transpose();
      delta = back.cwiseProduct(pass.gates[l - 1]);
    }
  }
  return g;
}

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
class AdamState {
 public:
  explicit AdamState(const MlpModel<Scalar>& model) {
    for (const auto& l : model.layers()) {
      mw_.push_back(RowMatrix<Scalar>::Zero(l.weights.rows(), l.weights.cols()));
      vw_.push_back(mw_.back());
      mb_.push_back(RowVector<Scalar>::Zero(l.bias.size()));
      vb_.push_back(mb_.back());
    }
  }

  std::uint64_t step() const { return t_; }

  void apply(MlpModel<Scalar>& model, const Gradients<Scalar>& g, const AdamConfig& cfg) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (size_t l = 0; l < model.layers().size(); ++l) {
      update(model.layers()[l].weights, mw_[l], vw_[l], g.weights[l], cfg, c1, c2);
      update(model.layers()[l].bias, mb_[l], vb_[l], g.biases[l], cfg, c1, c2);
    }
  }

 private:
  template <typename P, typename G>
  static void update(P& param, P& m, P& v, const G& grad, const AdamConfig& cfg, double c1, double c2) {
    const Scalar b1 = static_cast<Scalar>(cfg.beta1), b2 = static_cast<Scalar>(cfg.beta2);
    m.array() = b1 * m.array() + (Scalar(1) - b1) * grad.array();
    v.array() = b2 * v.array() + (Scalar(1) - b2) * grad.array().square();
    const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
    const Scalar ic1 = static_cast<Scalar>(1.0 / c1), ic2 = static_cast<Scalar>(1.0 / c2);
    const Scalar eps = static_cast<Scalar>(cfg.epsilon);
    param.array() -= lr * (m.array() * ic1) / ((v.array() * ic2).sqrt() + eps);
  }

  std::vector<RowMatrix<Scalar>> mw_, vw_;
  std::vector<RowVector<Scalar>> mb_, vb_;
  std::uint64_t t_ = 0;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 10;
  double dropout_rate = 0.5;
  int epochs = 50;
  double early_stop_loss = 1e-4;
  std::uint64_t seed = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::vector<Index> hidden{512, 256};

  void validate() const {
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout must be in [0, 1)");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) throw UsageError("learning_rate must be >= 0");
    if (epochs < 0) throw UsageError("epochs must be >= 0");
  }
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;      // mean batch loss (dropout active)
  double accuracy = 0.0;  // fraction of training samples predicted correctly during the epoch
};

template <typename Scalar>
struct TrainResult {
  MlpModel<Scalar> model;
  std::vector<EpochLog> log;
};

// Mini-batch Adam on the mean cross entropy, reshuffling every epoch.
// Deterministic for a fixed (model, data, config).
template <typename Scalar>
TrainResult<Scalar> train(MlpModel<Scalar> model, const FeatureSet& data, const TrainConfig& config) {
  config.validate();
  if (data.size() == 0) throw DataError("empty training set");
  if (data.dim() != model.input_dim()) throw DimensionError("feature dimension does not match model");
  if (data.num_classes() != model.num_classes()) throw DimensionError("label width does not match model");

  const AdamConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
  AdamState<Scalar> state(model);
  Rng shuffle_rng = make_rng(config.seed, "shuffle");
  Rng dropout_rng = make_rng(config.seed, "dropout");
  const DropoutSpec<Scalar> dropout{config.dropout_rate, &dropout_rng};

  std::vector<Index> order(static_cast<size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index{0});
  TrainResult<Scalar> result;
  RowMatrix<Scalar> xb;
  RowMatrix<Scalar> yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    long correct = 0;
    long batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      const Index rows = static_cast<Index>(end - start);
      xb.resize(rows, data.dim());
      yb.resize(rows, data.num_classes());
      for (Index r = 0; r < rows; ++r) {
        xb.row(r) = data.vectors.row(order[start + static_cast<size_t>(r)]).template cast<Scalar>();
        yb.row(r) = data.labels.row(order[start + static_cast<size_t>(r)]).template cast<Scalar>();
      }
      const Gradients<Scalar> g = gradient(model, xb, yb, dropout);
      if (!std::isfinite(g.loss))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches));
      state.apply(model, g, adam);
      loss_sum += g.loss;
      correct += g.correct;
      ++batches;
    }
    EpochLog e{epoch, loss_sum / static_cast<double>(batches),
               static_cast<double>(correct) / static_cast<double>(data.size())};
    result.log.push_back(e);
    if (e.loss < config.early_stop_loss) break;
  }
  result.model = std::move(model);
  return result;
}

struct EvalResult {
  double accuracy = 0.0;
  std::vector<double> class_accuracy;  // NaN for classes absent from the set
  std::vector<long> class_counts;
  std::vector<int> predictions;
  std::vector<double> cross_entropy;   // per sample, against the true label
};

inline constexpr Index kEvalChunk = 256;

// Dropout-off evaluation in fixed-size chunks.
template <typename Scalar>
EvalResult evaluate(const MlpModel<Scalar>& model, const FeatureSet& set,
                    const AblationSet<Scalar>* ablations = nullptr) {
  if (set.size() == 0) throw DataError("evaluate on an empty set");
  if (set.dim() != model.input_dim())
    throw DimensionError("feature dimension " + std::to_string(set.dim()) + " does not match model input " +
                         std::to_string(model.input_dim()));
  if (set.num_classes() != model.num_classes()) throw DimensionError("label width does not match model");
  const Index z = model.num_classes();
  EvalResult r;
  r.predictions.resize(static_cast<size_t>(set.size()));
  r.cross_entropy.resize(static_cast<size_t>(set.size()));
  std::vector<long> hits(static_cast<size_t>(z), 0);
  r.class_counts.assign(static_cast<size_t>(z), 0);
  long total_hits = 0;
  for (Index start = 0; start < set.size(); start += kEvalChunk) {
    const Index rows = std::min(kEvalChunk, set.size() - start);
    const RowMatrix<Scalar> x = set.vectors.middleRows(start, rows).template cast<Scalar>();
    const ForwardPass<Scalar> pass = forward(model, x, ablations);
    for (Index i = 0; i < rows; ++i) {
      const Index n = start + i;
      const int truth = set.label(n);
      const int pred = argmax(pass.probabilities.row(i));
      r.predictions[static_cast<size_t>(n)] = pred;
      r.cross_entropy[static_cast<size_t>(n)] = cross_entropy_logits(pass.logits.row(i), truth);
      ++r.class_counts[static_cast<size_t>(truth)];
      if (pred == truth) {
        ++hits[static_cast<size_t>(truth)];
        ++total_hits;
      }
    }
  }
  r.accuracy = static_cast<double>(total_hits) / static_cast<double>(set.size());
  for (Index c = 0; c < z; ++c) {
    const long n = r.class_counts[static_cast<size_t>(c)];
    r.class_accuracy.push_back(n ? static_cast<double>(hits[static_cast<size_t>(c)]) / static_cast<double>(n)
                                 : std::numeric_limits<double>::quiet_NaN());
  }
  return r;
}

// Rows of `set` whose prediction matches the label.
template <typename Scalar>
std::vector<Index> correctly_classified(const MlpModel<Scalar>& model, const FeatureSet& set) {
  const EvalResult r = evaluate(model, set);
  std::vector<Index> rows;
  for (Index i = 0; i < set.size(); ++i)
    if (r.predictions[static_cast<size_t>(i)] == set.label(i)) rows.push_back(i);
  return rows;
}

using Model = MlpModel<float>;

}  // namespace relscope

#endif  // RELSCOPE_MLP_HPP
