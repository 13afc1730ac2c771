#include "fixtures.hpp"

#include <metarec/error.hpp>
#include <metarec/eval.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace metarec;
using namespace metarec::testing;

namespace {

// Textbook average precision over distinct ranks: for every appropriate
// algorithm, the share of appropriate algorithms ranked at or above it.
double set_based_average_precision(const std::vector<double>& ranks, const std::vector<int>& truth)
{
    double sum = 0.0;
    double positives = 0.0;
    for (std::size_t j = 0; j < ranks.size(); ++j)
    {
        if (!truth[j])
        {
            continue;
        }
        positives += 1.0;
        double above = 0.0;
        for (std::size_t i = 0; i < ranks.size(); ++i)
        {
            above += truth[i] && ranks[i] <= ranks[j] ? 1.0 : 0.0;
        }
        sum += above / ranks[j];
    }
    return sum / positives;
}

CvConfig small_config()
{
    CvConfig config;
    config.repetitions = 2;
    config.folds = 5;
    config.modes = {all_filter_modes[0], all_filter_modes[1], all_filter_modes[2], all_filter_modes[3]};
    return config;
}

} // namespace

TEST(Metrics, HandComputedExample)
{
    const std::vector<double> ranks{1, 2, 3, 4};
    const std::vector<int> truth{1, 0, 1, 0};
    // only (appropriate 3rd, inappropriate 2nd) is misordered out of four pairs
    EXPECT_DOUBLE_EQ(ranking_loss(ranks, truth), 0.25);
    EXPECT_DOUBLE_EQ(precision_at(ranks, truth, 1), 1.0);
    EXPECT_DOUBLE_EQ(precision_at(ranks, truth, 2), 0.5);
    EXPECT_DOUBLE_EQ(average_precision(ranks, truth), (1.0 + 2.0 / 3.0) / 2.0);
}

TEST(Metrics, PerfectAndReversedRankings)
{
    const std::vector<int> truth{1, 1, 0, 0, 0};
    const std::vector<double> perfect{1, 2, 3, 4, 5};
    const std::vector<double> reversed{5, 4, 3, 2, 1};
    EXPECT_EQ(ranking_loss(perfect, truth), 0.0);
    EXPECT_EQ(average_precision(perfect, truth), 1.0);
    EXPECT_EQ(ranking_loss(reversed, truth), 1.0);
    EXPECT_EQ(precision_at(reversed, truth, 1), 0.0);
}

TEST(Metrics, TiedRanksDoNotCountAsMisordered)
{
    const std::vector<double> ranks{1.5, 1.5, 3};
    const std::vector<int> truth{0, 1, 0};
    EXPECT_EQ(ranking_loss(ranks, truth), 0.0);
    // the tie is cut by index, so the appropriate algorithm lands second
    EXPECT_EQ(precision_at(ranks, truth, 1), 0.0);
    EXPECT_EQ(ranked_order(ranks), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Metrics, AveragePrecisionMatchesSetDefinition)
{
    Rng rng(12);
    for (int trial = 0; trial < 500; ++trial)
    {
        const std::size_t k = 2 + rng.index(12);
        std::vector<double> ranks(k);
        std::iota(ranks.begin(), ranks.end(), 1.0);
        rng.shuffle(std::span<double>(ranks));
        std::vector<int> truth(k);
        for (auto& b : truth) b = static_cast<int>(rng.index(2));
        truth[rng.index(k)] = 1;
        const auto zero = rng.index(k);
        if (truth[zero] && std::count(truth.begin(), truth.end(), 1) == static_cast<std::ptrdiff_t>(k))
        {
            truth[zero] = 0;
        }
        if (std::count(truth.begin(), truth.end(), 1) == static_cast<std::ptrdiff_t>(k))
        {
            continue;
        }
        EXPECT_NEAR(average_precision(ranks, truth), set_based_average_precision(ranks, truth), 1e-12);
        const double rl = ranking_loss(ranks, truth);
        EXPECT_GE(rl, 0.0);
        EXPECT_LE(rl, 1.0);
    }
}

TEST(Metrics, DegenerateAndMismatchedInputs)
{
    const std::vector<double> ranks{1, 2};
    const std::vector<int> all{1, 1}, none{0, 0}, mixed{1, 0}, short_truth{1};
    for (const auto* truth : {&all, &none})
    {
        try
        {
            ranking_loss(ranks, *truth);
            FAIL();
        }
        catch (const Error& e)
        {
            EXPECT_EQ(e.kind(), ErrorKind::degenerate_target);
        }
        EXPECT_THROW(average_precision(ranks, *truth), Error);
        EXPECT_THROW(precision_at(ranks, *truth, 1), Error);
    }
    EXPECT_THROW(ranking_loss(ranks, short_truth), Error);
    EXPECT_THROW(precision_at(ranks, mixed, 0), Error);
    EXPECT_THROW(precision_at(ranks, mixed, 3), Error);
}

TEST(CrossValidation, CellStructure)
{
    const auto corpus = fake_meta_corpus(40, 3, 2);
    const auto report = run_cross_validation(corpus.features, corpus.targets, small_config());
    ASSERT_EQ(report.cells.size(), 10u);
    ASSERT_EQ(report.variants.size(), 35u);
    EXPECT_EQ(report.variants[0], "1");
    EXPECT_EQ(report.variants[31], "En:all");
    EXPECT_EQ(report.variants[34], "En:accurate-and-diverse");
    EXPECT_EQ(report.ensemble_variant(3), 34u);
    std::array<std::size_t, 2> tested{0, 0};
    for (const auto& cell : report.cells)
    {
        EXPECT_EQ(cell.train + cell.validation + cell.test, 40u);
        EXPECT_LE(cell.validation, cell.train);
        EXPECT_GE(cell.validation + 1, cell.train);
        tested[static_cast<std::size_t>(cell.repetition)] += cell.test;
        ASSERT_EQ(cell.kept.size(), 4u);
        for (std::size_t j = 0; j < 3; ++j)
        {
            EXPECT_EQ(cell.kept[0][j], 31u);
            EXPECT_GE(cell.kept[3][j], 1u);
            EXPECT_LE(cell.kept[3][j], cell.kept[1][j]);
        }
        for (const auto& metrics : cell.metrics)
        {
            for (const double v : metrics)
            {
                if (std::isfinite(v))
                {
                    EXPECT_GE(v, 0.0);
                    EXPECT_LE(v, 1.0);
                }
            }
        }
    }
    EXPECT_EQ(tested[0], 40u);
    EXPECT_EQ(tested[1], 40u);
    EXPECT_DOUBLE_EQ(report.mean_kept(0), 31.0);
}

TEST(CrossValidation, SkipsDegenerateTargets)
{
    auto corpus = fake_meta_corpus(30, 3, 3);
    corpus.targets.targets[0].bits = {1, 1, 1};
    corpus.targets.targets[1].bits = {0, 0, 0};
    std::size_t degenerate = 0;
    for (const auto& target : corpus.targets.targets)
    {
        const auto ones = std::count(target.bits.begin(), target.bits.end(), 1);
        degenerate += ones == 0 || ones == 3 ? 1 : 0;
    }
    const auto report = run_cross_validation(corpus.features, corpus.targets, small_config());
    // every problem is tested once per repetition
    EXPECT_EQ(report.skipped(), 2 * degenerate);
}

TEST(CrossValidation, ThreadCountDoesNotChangeResults)
{
    const auto corpus = fake_meta_corpus(30, 2, 4);
    auto config = small_config();
    const auto serial = run_cross_validation(corpus.features, corpus.targets, config);
    config.threads = 3;
    const auto parallel = run_cross_validation(corpus.features, corpus.targets, config);
    EXPECT_EQ(cv_report_json(serial), cv_report_json(parallel));
}

TEST(CrossValidation, BestBaseAndSummaries)
{
    const auto corpus = fake_meta_corpus(40, 3, 5);
    const auto report = run_cross_validation(corpus.features, corpus.targets, small_config());
    const auto best = report.best_base(Metric::ranking_loss, false);
    ASSERT_LT(best, 31u);
    for (std::size_t v = 0; v < 31; ++v)
    {
        EXPECT_LE(report.mean(best, Metric::ranking_loss), report.mean(v, Metric::ranking_loss));
    }
    const auto values = report.values(0, Metric::average_precision);
    EXPECT_EQ(values.size(), 10u);
    EXPECT_DOUBLE_EQ(report.median(0, Metric::average_precision), quantile(values, 0.5));
    EXPECT_THROW(report.variant_index("nope"), Error);
    EXPECT_EQ(report.variant_index("En:diverse"), 33u);
}

TEST(CrossValidation, Preconditions)
{
    const auto corpus = fake_meta_corpus(19, 2, 6);
    try
    {
        run_cross_validation(corpus.features, corpus.targets, {});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::too_few_instances);
    }
    const auto enough = fake_meta_corpus(20, 2, 6);
    CvConfig config;
    config.folds = 1;
    EXPECT_THROW(run_cross_validation(enough.features, enough.targets, config), Error);
}

TEST(CrossValidation, ReportFiles)
{
    const auto corpus = fake_meta_corpus(25, 2, 7);
    CvConfig config;
    config.repetitions = 1;
    config.folds = 5;
    const auto report = run_cross_validation(corpus.features, corpus.targets, config);
    TempDir dir("cv");
    write_cv_report(report, dir.path());
    for (const auto* name : {"report.json", "ranking_loss.csv", "precision_at_1.csv", "average_precision.csv", "kept_models.csv"})
    {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    const auto csv = read_file(dir / "ranking_loss.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "variant,mean,median,r1f1,r1f2,r1f3,r1f4,r1f5");
    EXPECT_NE(csv.find("\nEn,"), std::string::npos);
    EXPECT_EQ(read_file(dir / "report.json"), cv_report_json(report));
}
