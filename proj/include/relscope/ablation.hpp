#ifndef RELSCOPE_ABLATION_HPP
#define RELSCOPE_ABLATION_HPP

#include "relscope/features.hpp"
#include "relscope/mlp.hpp"

#include <string>
#include <vector>

namespace relscope {

// Average influence of zeroing each node of one hidden layer, per true label.
struct NodeInfluenceMatrix {
  Index layer = 0;
  RowMatrixXd mean_influence;      // nodes x classes; NaN where the class has no samples
  std::vector<long> class_counts;  // samples averaged into every cell of a column

  Index nodes() const { return mean_influence.rows(); }
  Index classes() const { return mean_influence.cols(); }
  long count(Index /*node*/, Index cls) const { return class_counts[static_cast<size_t>(cls)]; }
};

// For each node j of hidden layer `layer`, ablates j alone and averages
// E = C(ablated) - C(baseline) over the samples of each true label.
NodeInfluenceMatrix node_scan(const Model& model, const FeatureSet& set, Index layer, int workers = 1);

struct NodeGroup {
  int relation = 0;
  double fraction = 0.25;
  std::vector<Index> nodes;  // ascending by rank: highest mean E first
};

// ceil(fraction * p) for the rounding used by select_groups.
Index group_size(Index layer_size, double fraction);

// Top ceil(fraction * p) nodes by mean E per class; ties go to the lower index.
std::vector<NodeGroup> select_groups(const NodeInfluenceMatrix& matrix, double fraction = 0.25);

// Split of |E| over a sample set. The means are taken over all samples, so
// mean_abs == mean_positive + mean_negative.
struct CostDecomposition {
  double mean_abs = 0.0;
  double mean_positive = 0.0;
  double mean_negative = 0.0;  // magnitude of the negative part
  long positive = 0, negative = 0, zero = 0;
};

CostDecomposition decompose(const std::vector<double>& influences);

struct GroupAblationRow {
  std::string name;
  double accuracy = 0.0;
  std::vector<double> class_accuracy;
  CostDecomposition cost;
};

struct GroupAblationReport {
  Index layer = 0;
  GroupAblationRow baseline;
  std::vector<GroupAblationRow> rows;  // one per group, in input order
  std::vector<NodeGroup> groups;
};

// Evaluates the set once per group with all of the group's nodes zeroed.
GroupAblationReport group_ablation(const Model& model, const FeatureSet& set, Index layer,
                                   const std::vector<NodeGroup>& groups);

// CSV: node_index,relation,mean_E,count
std::string node_matrix_csv(const NodeInfluenceMatrix& matrix);
NodeInfluenceMatrix node_matrix_from_csv(std::string_view csv, Index layer);
std::string node_matrix_summary_json(const NodeInfluenceMatrix& matrix, double fraction);
// Rows: baseline then one row per group; columns: classes.
std::string accuracy_table_csv(const GroupAblationReport& report);
// Rows per group: mean |E|, mean positive E, mean |negative E| plus counts.
std::string cost_decomposition_csv(const GroupAblationReport& report);

}  // namespace relscope

#endif  // RELSCOPE_ABLATION_HPP
