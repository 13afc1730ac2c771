#pragma once

#include <metarec/learners.hpp>
#include <metarec/stats.hpp>
#include <metarec/tabular.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace metarec {

/// k algorithms x r runs of accuracies in [0, 1].
class AccuracyMatrix
{
public:
    AccuracyMatrix() = default;
    /// `values` is algorithm-major: values[a * runs + run].
    AccuracyMatrix(std::vector<std::string> names, std::size_t runs, std::vector<double> values);

    std::size_t algorithms() const { return m_names.size(); }
    std::size_t runs() const { return m_runs; }
    const std::vector<std::string>& names() const { return m_names; }

    double at(std::size_t algorithm, std::size_t run) const { return m_values[algorithm * m_runs + run]; }
    std::span<const double> runs_of(std::size_t algorithm) const
    {
        return {m_values.data() + algorithm * m_runs, m_runs};
    }
    double mean(std::size_t algorithm) const;

    /// Same runs with the algorithms reordered: result column i is column
    /// order[i] of this matrix.
    AccuracyMatrix permuted(std::span<const std::size_t> order) const;

private:
    std::vector<std::string> m_names;
    std::size_t m_runs = 0;
    std::vector<double> m_values;
};

/// 5 x 10-fold stratified cross-validation: every candidate is trained on
/// nine folds and scored on the tenth. Runs are ordered repetition-major,
/// fold-minor, giving 50 accuracies per candidate.
AccuracyMatrix estimate_accuracy_matrix(
    const TabularDataset& dataset,
    const std::vector<LearnerSpec>& candidates,
    std::uint64_t seed,
    int repetitions = 5,
    int folds = 10);

/// CSV with a header of algorithm names and one row per run.
AccuracyMatrix load_accuracy_matrix(const std::filesystem::path& path);
AccuracyMatrix parse_accuracy_matrix(std::string_view text);
void write_accuracy_matrix(std::ostream& out, const AccuracyMatrix& matrix);

struct MetaTarget
{
    std::vector<int> bits;

    friend bool operator==(const MetaTarget&, const MetaTarget&) = default;
};

enum class TargetTest
{
    friedman_holm,
    wilcoxon, ///< fallback when only two candidates exist
};

struct TargetDerivation
{
    MetaTarget target;
    TargetTest test = TargetTest::friedman_holm;
    double statistic = 0.0;
    double p_value = 1.0;
    bool omnibus_rejected = false;
    std::size_t reference = 0;
};

/// Appropriate algorithms: all of them when the Friedman test does not
/// reject, otherwise the Holm survivors against the best-mean reference.
/// Two candidates use the paired Wilcoxon signed-rank test instead.
TargetDerivation derive_meta_target_detailed(const AccuracyMatrix& accuracies, double alpha);
MetaTarget derive_meta_target(const AccuracyMatrix& accuracies, double alpha);

/// One labelled multi-label row: problem name plus k bits.
struct TargetTable
{
    std::vector<std::string> algorithms;
    std::vector<std::string> problems;
    std::vector<MetaTarget> targets;
};

void write_target_table(std::ostream& out, const TargetTable& table);
TargetTable load_target_table(const std::filesystem::path& path);
TargetTable parse_target_table(std::string_view text);

} // namespace metarec
