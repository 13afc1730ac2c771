#pragma once

#include <metarec/ensemble.hpp>
#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace metarec {

/// All metrics throw DegenerateTarget when the truth has no appropriate or
/// no inappropriate algorithm.

/// Fraction of (appropriate, inappropriate) pairs where the appropriate one
/// has a strictly larger (worse) rank.
double ranking_loss(std::span<const double> ranks, std::span<const int> truth);

/// Appropriate algorithms among the m best ranked, divided by m. Equal ranks
/// are ordered by index when cutting the list.
double precision_at(std::span<const double> ranks, std::span<const int> truth, std::size_t m);

double average_precision(std::span<const double> ranks, std::span<const int> truth);

/// Algorithm indices from best to worst rank, ties by index.
std::vector<std::size_t> ranked_order(std::span<const double> ranks);

enum class Metric
{
    ranking_loss,
    precision_at_1,
    average_precision,
};

inline constexpr std::array<Metric, 3> all_metrics = {
    Metric::ranking_loss,
    Metric::precision_at_1,
    Metric::average_precision,
};

std::string_view to_string(Metric metric);

struct CvConfig
{
    double alpha = 0.05;
    std::vector<FilterMode> modes{FilterMode::accurate_and_diverse};
    std::uint64_t seed = 1;
    int repetitions = 5;
    int folds = 10;
    int families = family_count;
    TreeParams tree;
    /// Worker threads for the evaluation cells; 0 uses the hardware count.
    unsigned threads = 1;
};

struct CvCell
{
    int repetition = 0;
    int fold = 0;
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
    /// Test problems left out of the metrics for a degenerate target.
    std::size_t skipped = 0;
    /// metrics[variant][metric]: mean over the scored test problems, NaN
    /// when none was scored.
    std::vector<std::array<double, 3>> metrics;
    /// kept[mode][algorithm]: flagged models in that column.
    std::vector<std::vector<std::size_t>> kept;
};

struct CvReport
{
    CvConfig config;
    std::size_t instances = 0;
    std::vector<std::string> algorithms;
    /// Combo ids "1".."t" followed by one ensemble variant per mode ("En"
    /// when a single mode was run, "En:<mode>" otherwise).
    std::vector<std::string> variants;
    std::vector<CvCell> cells;

    std::size_t variant_index(std::string_view name) const;
    std::size_t ensemble_variant(std::size_t mode_index) const { return variants.size() - config.modes.size() + mode_index; }
    std::vector<double> values(std::size_t variant, Metric metric) const;
    double mean(std::size_t variant, Metric metric) const;
    double median(std::size_t variant, Metric metric) const;
    /// Average flagged models per column over all cells.
    double mean_kept(std::size_t mode_index) const;
    std::size_t skipped() const;

    /// Variant (combo ids only) with the lowest mean of the metric, or the
    /// highest when `higher_is_better`.
    std::size_t best_base(Metric metric, bool higher_is_better) const;
};

/// Repeated k-fold evaluation over the meta-data: each held-out fold is
/// scored by the ensemble (one per filter mode) and by every single-combo
/// model, all trained on half of the remaining problems and filtered on the
/// other half.
CvReport run_cross_validation(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const CvConfig& config);

/// report.json, one CSV per metric (variant, mean, median, cell values) and
/// kept_models.csv, written into `directory`.
void write_cv_report(const CvReport& report, const std::filesystem::path& directory);
std::string cv_report_json(const CvReport& report);

} // namespace metarec
