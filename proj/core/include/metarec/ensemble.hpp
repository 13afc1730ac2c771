#pragma once

#include <metarec/learners.hpp>
#include <metarec/metadata.hpp>
#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metarec {

enum class FilterMode
{
    all,
    accurate,
    diverse,
    accurate_and_diverse,
};

inline constexpr FilterMode all_filter_modes[] = {
    FilterMode::all,
    FilterMode::accurate,
    FilterMode::diverse,
    FilterMode::accurate_and_diverse,
};

std::string_view to_string(FilterMode mode);
/// Accepts "all", "accurate", "diverse" and "accurate-and-diverse".
std::optional<FilterMode> parse_filter_mode(std::string_view text);

/// t x k grid of binary decision trees: cell (i, j) predicts whether
/// algorithm j is appropriate from the features of combo i.
class ModelMatrix
{
public:
    ModelMatrix() = default;
    ModelMatrix(std::vector<FamilyCombo> combos, std::vector<std::string> algorithms, std::vector<DecisionTree> models);

    static ModelMatrix train(
        const std::vector<MetaFeatureGroupSet>& features,
        const TargetTable& targets,
        const std::vector<FamilyCombo>& combos,
        const TreeParams& params);

    std::size_t combos() const { return m_combos.size(); }
    std::size_t algorithms() const { return m_algorithms.size(); }
    const std::vector<FamilyCombo>& combo_list() const { return m_combos; }
    const std::vector<std::string>& algorithm_names() const { return m_algorithms; }
    const DecisionTree& model(std::size_t combo, std::size_t algorithm) const
    {
        return m_models[combo * m_algorithms.size() + algorithm];
    }

    /// Probability of "appropriate" for every cell, combo-major (t x k).
    std::vector<double> probabilities(const MetaFeatureGroupSet& x) const;

private:
    std::vector<FamilyCombo> m_combos;
    std::vector<std::string> m_algorithms;
    std::vector<DecisionTree> m_models;
};

class FlagMatrix
{
public:
    FlagMatrix() = default;
    FlagMatrix(std::size_t combos, std::size_t algorithms, int value = 1) :
        m_combos(combos), m_algorithms(algorithms), m_flags(combos * algorithms, value)
    {
    }

    std::size_t combos() const { return m_combos; }
    std::size_t algorithms() const { return m_algorithms; }
    int at(std::size_t combo, std::size_t algorithm) const { return m_flags[combo * m_algorithms + algorithm]; }
    void set(std::size_t combo, std::size_t algorithm, int value) { m_flags[combo * m_algorithms + algorithm] = value; }
    std::size_t column_sum(std::size_t algorithm) const;
    std::size_t total() const;

    friend bool operator==(const FlagMatrix&, const FlagMatrix&) = default;

private:
    std::size_t m_combos = 0;
    std::size_t m_algorithms = 0;
    std::vector<int> m_flags;
};

/// Outputs of every base model on a common validation set.
struct ValidationRecord
{
    std::size_t combos = 0;
    std::size_t algorithms = 0;
    /// predictions[(i * k + j)][row]: predicted bit of model (i, j).
    std::vector<std::vector<int>> predictions;
    /// truth[j][row]: true bit of algorithm j.
    std::vector<std::vector<int>> truth;
    std::vector<double> accuracies; ///< t x k, combo-major

    double accuracy(std::size_t combo, std::size_t algorithm) const { return accuracies[combo * algorithms + algorithm]; }
    const std::vector<int>& outputs(std::size_t combo, std::size_t algorithm) const
    {
        return predictions[combo * algorithms + algorithm];
    }
};

ValidationRecord validate(
    const ModelMatrix& matrix,
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets);

/// Flags for one column of t models. Accurate: accuracy >= 0.5. Diverse:
/// greedy scan in descending accuracy (ties by position); each kept model
/// drops every later kept model whose error contingency table fails the
/// diversity verdict. A column left empty keeps its most accurate model.
std::vector<int> model_filter(
    std::span<const double> accuracies,
    const std::vector<std::vector<int>>& outputs,
    std::span<const int> truth,
    double alpha,
    FilterMode mode);

FlagMatrix filter_models(const ValidationRecord& validation, double alpha, FilterMode mode);

/// Flagged-model average of the "appropriate" probability per algorithm.
std::vector<double> ensemble_predict(const ModelMatrix& matrix, const FlagMatrix& flags, const MetaFeatureGroupSet& x);
/// Same combination for precomputed t x k cell probabilities.
std::vector<double> combine_probabilities(std::span<const double> cells, const FlagMatrix& flags);

/// Rank 1 for the highest probability; ties share the average rank.
std::vector<double> rank_algorithms(std::span<const double> probabilities);

struct Recommendation
{
    std::vector<double> probabilities;
    std::vector<int> picks;
    std::vector<double> ranks;
};

Recommendation recommend(std::span<const double> probabilities, double threshold = 0.5);

void write_recommendation(std::ostream& out, const std::vector<std::string>& algorithms, const Recommendation& rec);

/// Half of the given rows for training and half for validation, dealt
/// round-robin within groups of identical target patterns after a seeded
/// shuffle.
struct HalfSplit
{
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

HalfSplit split_half(const std::vector<MetaTarget>& targets, std::span<const std::size_t> rows, std::uint64_t seed);

struct EnsembleConfig
{
    double alpha = 0.05;
    FilterMode mode = FilterMode::accurate_and_diverse;
    double threshold = 0.5;
    int families = family_count;
    TreeParams tree;
    std::uint64_t seed = 1;
};

struct Ensemble
{
    EnsembleConfig config;
    ModelMatrix matrix;
    FlagMatrix flags;

    Recommendation recommend(const MetaFeatureGroupSet& x) const;
};

/// Splits the meta-data in half, trains the matrix on one half and filters
/// it on the other.
Ensemble train_ensemble(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const EnsembleConfig& config);

/// Bundle directory: config.json, combos.csv, flags.csv and
/// models/<combo>_<algorithm>.json. The directory is assembled next to the
/// destination and renamed into place.
void save_bundle(const Ensemble& ensemble, const std::filesystem::path& directory);
Ensemble load_bundle(const std::filesystem::path& directory);

} // namespace metarec
