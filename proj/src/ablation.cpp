#include "relscope/ablation.hpp"

#include "relscope/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace relscope {

namespace {

// Hidden activations and baseline cross entropies, chunked exactly as
// evaluate() chunks its input.
struct LayerCache {
  std::vector<RowMatrixXf> activations;
  std::vector<double> baseline_ce;
};

LayerCache cache_layer(const Model& model, const FeatureSet& set, Index layer) {
  LayerCache cache;
  cache.baseline_ce.resize(static_cast<size_t>(set.size()));
  for (Index start = 0; start < set.size(); start += kEvalChunk) {
    const Index rows = std::min(kEvalChunk, set.size() - start);
    const RowMatrixXf x = set.vectors.middleRows(start, rows);
    RowMatrixXf act = hidden_activations(model, x, layer);
    const RowMatrixXd logits = logits_from_hidden(model, layer, act);
    for (Index i = 0; i < rows; ++i)
      cache.baseline_ce[static_cast<size_t>(start + i)] = cross_entropy_logits(logits.row(i), set.label(start + i));
    cache.activations.push_back(std::move(act));
  }
  return cache;
}

}  // namespace

NodeInfluenceMatrix node_scan(const Model& model, const FeatureSet& set, Index layer, int workers) {
  if (layer < 0 || layer >= model.num_hidden())
    throw DimensionError("layer " + std::to_string(layer) + " out of range (model has " +
                         std::to_string(model.num_hidden()) + " hidden layers)");
  if (set.size() == 0) throw DataError("node scan on an empty set");
  if (set.dim() != model.input_dim()) throw DimensionError("feature dimension does not match model");
  if (set.num_classes() != model.num_classes()) throw DimensionError("label width does not match model");

  const Index p = model.hidden_size(layer), z = model.num_classes();
  const LayerCache cache = cache_layer(model, set, layer);
  NodeInfluenceMatrix m;
  m.layer = layer;
  m.class_counts.assign(static_cast<size_t>(z), 0);
  for (Index i = 0; i < set.size(); ++i) ++m.class_counts[static_cast<size_t>(set.label(i))];
  m.mean_influence = RowMatrixXd::Zero(p, z);

  parallel_for(static_cast<size_t>(p), workers, [&](std::size_t node) {
    const Index j = static_cast<Index>(node);
    std::vector<double> sums(static_cast<size_t>(z), 0.0);
    Index start = 0;
    for (const RowMatrixXf& act : cache.activations) {
      const Index rows = act.rows();
      // A node that is already zero on every row of the chunk cannot change
      // anything downstream.
      if (!(act.col(j).array() != 0.0f).any()) {
        start += rows;
        continue;
      }
      RowMatrixXf ablated = act;
      ablated.col(j).setZero();
      const RowMatrixXd logits = logits_from_hidden(model, layer, ablated);
      for (Index i = 0; i < rows; ++i) {
        const int label = set.label(start + i);
        const double ce = cross_entropy_logits(logits.row(i), label);
        sums[static_cast<size_t>(label)] += ce - cache.baseline_ce[static_cast<size_t>(start + i)];
      }
      start += rows;
    }
    for (Index y = 0; y < z; ++y) {
      const long n = m.class_counts[static_cast<size_t>(y)];
      m.mean_influence(j, y) = n ? sums[static_cast<size_t>(y)] / static_cast<double>(n)
                                 : std::numeric_limits<double>::quiet_NaN();
    }
  });
  return m;
}

Index group_size(Index layer_size, double fraction) {
  return std::min(layer_size, static_cast<Index>(std::ceil(fraction * static_cast<double>(layer_size) - 1e-9)));
}

std::vector<NodeGroup> select_groups(const NodeInfluenceMatrix& matrix, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw UsageError("fraction must be in (0, 1]");
  const Index p = matrix.nodes();
  const Index k = group_size(p, fraction);
  std::vector<NodeGroup> groups;
  for (Index y = 0; y < matrix.classes(); ++y) {
    if (matrix.class_counts[static_cast<size_t>(y)] == 0)
      throw DataError("no samples for class " + class_name(static_cast<int>(y)) + "; cannot rank nodes");
    std::vector<Index> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return matrix.mean_influence(a, y) > matrix.mean_influence(b, y);
    });
    order.resize(static_cast<size_t>(k));
    groups.push_back({static_cast<int>(y), fraction, std::move(order)});
  }
  return groups;
}

CostDecomposition decompose(const std::vector<double>& influences) {
  CostDecomposition d;
  if (influences.empty()) return d;
  for (double e : influences) {
    d.mean_abs += std::abs(e);
    if (e > 0) {
      d.mean_positive += e;
      ++d.positive;
    } else if (e < 0) {
      d.mean_negative -= e;
      ++d.negative;
    } else {
      ++d.zero;
    }
  }
  const double n = static_cast<double>(influences.size());
  d.mean_abs /= n;
  d.mean_positive /= n;
  d.mean_negative /= n;
  return d;
}

GroupAblationReport group_ablation(const Model& model, const FeatureSet& set, Index layer,
                                   const std::vector<NodeGroup>& groups) {
  if (layer < 0 || layer >= model.num_hidden()) throw DimensionError("layer out of range");
  GroupAblationReport report;
  report.layer = layer;
  report.groups = groups;
  const EvalResult base = evaluate(model, set);
  report.baseline = {"baseline", base.accuracy, base.class_accuracy, decompose(std::vector<double>(base.cross_entropy.size(), 0.0))};
  for (size_t g = 0; g < groups.size(); ++g) {
    const auto abl = ablate_nodes(model, layer, groups[g].nodes);
    const EvalResult r = evaluate(model, set, &abl);
    std::vector<double> e(r.cross_entropy.size());
    for (size_t i = 0; i < e.size(); ++i) e[i] = r.cross_entropy[i] - base.cross_entropy[i];
    report.rows.push_back({"group " + std::to_string(g), r.accuracy, r.class_accuracy, decompose(e)});
  }
  return report;
}

std::string node_matrix_csv(const NodeInfluenceMatrix& m) {
  std::string out = "node_index,relation,mean_E,count\n";
  char line[160];
  for (Index j = 0; j < m.nodes(); ++j)
    for (Index y = 0; y < m.classes(); ++y) {
      std::snprintf(line, sizeof line, "%ld,%s,%.17g,%ld\n", static_cast<long>(j),
                    class_name(static_cast<int>(y)).c_str(), m.mean_influence(j, y), m.count(j, y));
      out += line;
    }
  return out;
}

NodeInfluenceMatrix node_matrix_from_csv(std::string_view csv, Index layer) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "node_index,relation,mean_E,count")
    throw FormatError("node matrix CSV: bad header");
  struct Cell {
    Index node;
    int cls;
    double mean;
    long count;
  };
  std::vector<Cell> cells;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string node, cls, mean, count;
    if (!std::getline(row, node, ',') || !std::getline(row, cls, ',') || !std::getline(row, mean, ',') ||
        !std::getline(row, count))
      throw FormatError("node matrix CSV: malformed row '" + line + "'");
    auto it = std::find(names.begin(), names.end(), cls);
    if (it == names.end()) it = names.insert(names.end(), cls);
    try {
      cells.push_back({std::stol(node), static_cast<int>(it - names.begin()), std::stod(mean), std::stol(count)});
    } catch (const std::exception&) {
      throw FormatError("node matrix CSV: malformed row '" + line + "'");
    }
  }
  if (cells.empty()) throw FormatError("node matrix CSV: no rows");
  Index p = 0;
  for (const auto& c : cells) p = std::max(p, c.node + 1);
  const Index z = static_cast<Index>(names.size());
  if (static_cast<Index>(cells.size()) != p * z) throw FormatError("node matrix CSV: incomplete grid");
  NodeInfluenceMatrix m;
  m.layer = layer;
  m.mean_influence = RowMatrixXd::Zero(p, z);
  m.class_counts.assign(static_cast<size_t>(z), 0);
  for (const auto& c : cells) {
    m.mean_influence(c.node, c.cls) = c.mean;
    m.class_counts[static_cast<size_t>(c.cls)] = c.count;
  }
  return m;
}

std::string node_matrix_summary_json(const NodeInfluenceMatrix& m, double fraction) {
  nlohmann::json classes = nlohmann::json::array();
  std::vector<NodeGroup> groups;
  bool rankable = std::all_of(m.class_counts.begin(), m.class_counts.end(), [](long n) { return n > 0; });
  if (rankable) groups = select_groups(m, fraction);
  for (Index y = 0; y < m.classes(); ++y) {
    nlohmann::json c{{"relation", class_name(static_cast<int>(y))}, {"count", m.class_counts[static_cast<size_t>(y)]}};
    if (m.class_counts[static_cast<size_t>(y)] > 0) {
      c["mean_E_over_nodes"] = m.mean_influence.col(y).mean();
      c["max_E"] = m.mean_influence.col(y).maxCoeff();
    }
    if (rankable) c["top_nodes"] = groups[static_cast<size_t>(y)].nodes;
    classes.push_back(c);
  }
  nlohmann::json j{{"layer", m.layer}, {"nodes", m.nodes()}, {"fraction", fraction},
                   {"group_size", group_size(m.nodes(), fraction)}, {"classes", classes}};
  return j.dump(1) + "\n";
}

namespace {

std::string accuracy_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string accuracy_table_csv(const GroupAblationReport& report) {
  const size_t z = report.baseline.class_accuracy.size();
  std::string out = "layer,row";
  for (size_t c = 0; c < z; ++c) out += "," + class_name(static_cast<int>(c));
  out += "\n";
  auto emit = [&](const GroupAblationRow& row) {
    out += "FC-" + std::to_string(report.layer) + "," + row.name;
    for (double a : row.class_accuracy) out += "," + accuracy_cell(a);
    out += "\n";
  };
  emit(report.baseline);
  for (const auto& r : report.rows) emit(r);
  return out;
}

std::string cost_decomposition_csv(const GroupAblationReport& report) {
  std::string out = "layer,group,relation,size,mean_abs_E,mean_positive_E,mean_negative_E,positive,negative,zero\n";
  char line[256];
  for (size_t g = 0; g < report.rows.size(); ++g) {
    const auto& c = report.rows[g].cost;
    std::snprintf(line, sizeof line, "FC-%ld,%zu,%s,%zu,%.17g,%.17g,%.17g,%ld,%ld,%ld\n",
                  static_cast<long>(report.layer), g, class_name(report.groups[g].relation).c_str(),
                  report.groups[g].nodes.size(), c.mean_abs, c.mean_positive, c.mean_negative, c.positive,
                  c.negative, c.zero);
    out += line;
  }
  return out;
}

}  // namespace relscope
