#pragma once

#include <metarec/tabular.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metarec {

/// Anything that maps an instance over a training schema to class
/// probabilities.
class Classifier
{
public:
    virtual ~Classifier() = default;

    virtual std::vector<double> predict_proba(std::span<const double> row) const = 0;
    virtual std::size_t num_classes() const = 0;

    /// Most probable class, lowest index on ties.
    int predict(std::span<const double> row) const;
};

struct TreeParams
{
    std::size_t min_leaf = 2;
    std::optional<std::size_t> max_depth; ///< root is depth 0; unset = unlimited

    friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Gain-ratio decision tree with Laplace-smoothed class distributions.
///
/// Numeric splits are binary (`value <= threshold` goes to child 0), nominal
/// splits have one child per declared category. Missing values follow the
/// child that received the most training instances. A node is only split when
/// it holds at least `2 * min_leaf` instances; a numeric split needs
/// `min_leaf` instances on both sides, a nominal one needs at least two
/// branches with `min_leaf` instances. Among the admissible splits with
/// positive gain the highest gain ratio wins; ties keep the lowest attribute
/// index, then the lowest threshold.
class DecisionTree final : public Classifier
{
public:
    struct Node
    {
        int attribute = -1;   ///< -1 for leaves
        double threshold = 0; ///< numeric splits only
        std::vector<int> children;
        int heaviest_child = 0;
        std::vector<double> distribution;
        std::size_t count = 0; ///< training instances that reached the node
        double gain_ratio = 0;

        bool leaf() const { return attribute < 0; }
    };

    DecisionTree() = default;

    static DecisionTree train(const TabularDataset& dataset, const TreeParams& params);

    /// One-level tree splitting on `attribute` (best information-gain
    /// threshold when numeric). Falls back to a single leaf when the
    /// attribute cannot separate anything.
    static DecisionTree train_stump(const TabularDataset& dataset, std::size_t attribute);

    std::vector<double> predict_proba(std::span<const double> row) const override;
    std::size_t num_classes() const override { return m_classes.size(); }

    /// Index into nodes() of the leaf reached by `row`.
    std::size_t leaf_index(std::span<const double> row) const;

    const std::vector<Node>& nodes() const { return m_nodes; }
    const Node& root() const { return m_nodes.front(); }
    const std::vector<std::string>& class_labels() const { return m_classes; }
    const std::vector<Attribute>& schema() const { return m_schema; }
    const TreeParams& params() const { return m_params; }

    std::string to_json() const;
    static DecisionTree from_json(const std::string& text);

private:
    std::vector<Node> m_nodes;
    std::vector<std::string> m_classes;
    std::vector<Attribute> m_schema;
    TreeParams m_params;

    friend class TreeBuilder;
};

DecisionTree train_tree(const TabularDataset& dataset, const TreeParams& params);
std::vector<double> predict_proba(const DecisionTree& tree, std::span<const double> row);

/// Information gain (bits) of the attribute over the whole dataset; numeric
/// attributes use their best binary threshold. Missing values are excluded
/// and the gain is scaled by the known fraction.
double information_gain(const TabularDataset& dataset, std::size_t attribute);

/// Heterogeneous overlap distance: range-normalized absolute difference for
/// numeric attributes, 0/1 overlap for nominal ones, 1 when either side is
/// missing; combined as the Euclidean norm of the per-attribute terms.
class MixedDistance
{
public:
    MixedDistance() = default;
    explicit MixedDistance(const TabularDataset& dataset);
    MixedDistance(const TabularDataset& dataset, std::vector<std::size_t> attributes);

    double operator()(std::span<const double> a, std::span<const double> b) const;

private:
    std::vector<std::size_t> m_attributes;
    std::vector<bool> m_nominal;
    std::vector<double> m_min;
    std::vector<double> m_range;
};

class NaiveBayes final : public Classifier
{
public:
    static NaiveBayes train(const TabularDataset& dataset);

    std::vector<double> predict_proba(std::span<const double> row) const override;
    std::size_t num_classes() const override { return m_log_prior.size(); }

private:
    std::vector<double> m_log_prior;
    std::vector<bool> m_nominal;
    // numeric: per attribute, per class (mean, variance)
    std::vector<std::vector<std::pair<double, double>>> m_gaussian;
    // nominal: per attribute, per class, per category log-probability
    std::vector<std::vector<std::vector<double>>> m_log_frequency;
};

/// 1-nearest-neighbor under MixedDistance, optionally restricted to a subset
/// of attributes. Distance ties go to the earliest training instance.
class NearestNeighbor final : public Classifier
{
public:
    static NearestNeighbor train(const TabularDataset& dataset);
    static NearestNeighbor train(const TabularDataset& dataset, std::vector<std::size_t> attributes);

    std::vector<double> predict_proba(std::span<const double> row) const override;
    std::size_t num_classes() const override { return m_num_classes; }

    std::size_t nearest(std::span<const double> row) const;

private:
    TabularDataset m_train;
    MixedDistance m_distance;
    std::size_t m_num_classes = 0;
};

/// Predicts the Laplace-smoothed class prior for every instance.
class MajorityClass final : public Classifier
{
public:
    static MajorityClass train(const TabularDataset& dataset);

    std::vector<double> predict_proba(std::span<const double> row) const override;
    std::size_t num_classes() const override { return m_prior.size(); }

private:
    std::vector<double> m_prior;
};

enum class LandmarkerKind
{
    naive_bayes,
    one_nn,
    elite_one_nn,
    decision_node,
    random_node,
    worst_node,
};

inline constexpr LandmarkerKind all_landmarkers[] = {
    LandmarkerKind::naive_bayes,
    LandmarkerKind::one_nn,
    LandmarkerKind::elite_one_nn,
    LandmarkerKind::decision_node,
    LandmarkerKind::random_node,
    LandmarkerKind::worst_node,
};

std::string_view to_string(LandmarkerKind kind);

struct LandmarkModel
{
    LandmarkerKind kind = LandmarkerKind::naive_bayes;
    /// Attribute the model was restricted to (elite 1-NN and node trees).
    std::optional<std::size_t> attribute;
    std::shared_ptr<const Classifier> model;

    int predict(std::span<const double> row) const { return model->predict(row); }
};

/// Elite 1-NN uses the single attribute with the highest information gain;
/// the decision / worst node trees split on the highest / lowest gain
/// attribute and the random node tree on a seeded uniform choice.
LandmarkModel train_landmarker(const TabularDataset& dataset, LandmarkerKind kind, std::uint64_t seed);

/// Candidate algorithms the library can evaluate itself.
enum class LearnerKind
{
    tree,
    stump,
    naive_bayes,
    one_nn,
    majority,
};

struct LearnerSpec
{
    std::string name;
    LearnerKind kind = LearnerKind::tree;
    TreeParams tree;
};

std::unique_ptr<Classifier> train_learner(const LearnerSpec& spec, const TabularDataset& dataset);

/// The five built-in demo candidates: gain-ratio tree, decision stump, naive
/// Bayes, 1-NN and majority class.
std::vector<LearnerSpec> demo_candidates();

/// Fraction of rows of `test` whose predicted class equals the label.
double accuracy(const Classifier& model, const TabularDataset& test);

} // namespace metarec
