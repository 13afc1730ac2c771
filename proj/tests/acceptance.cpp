// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances are pinned here rather than taken from the command line.

#include "fixtures.hpp"

#include <cli.hpp>

#include <metarec/ensemble.hpp>
#include <metarec/eval.hpp>
#include <metarec/metadata.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/random.hpp>
#include <metarec/stats.hpp>
#include <metarec/synthetic.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace metarec;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4)
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1: tie-averaged ranking of a fixed probability vector.
Outcome rank_example()
{
    const auto start = Clock::now();
    const std::vector<double> p{0.7, 0.4, 0.8, 0.5, 0.7};
    const auto ranks = rank_algorithms(p);
    const std::vector<double> expected{2.5, 5, 1, 4, 2.5};
    const double elapsed = seconds_since(start);
    std::ostringstream detail;
    for (const double r : ranks)
    {
        detail << r << " ";
    }
    detail << "in " << fmt(elapsed, 6) << " s";
    return {ranks == expected && elapsed < 1.0, detail.str()};
}

// 2: kappa on hand-traced tables.
Outcome kappa_oracle()
{
    const double half = kappa(ContingencyTable(2, {3, 1, 1, 3}));
    const double one = kappa(ContingencyTable(2, {4, 0, 0, 4}));
    const double minus = kappa(ContingencyTable(2, {0, 4, 4, 0}));
    const bool pass = std::abs(half - 0.5) <= 1e-12 && std::abs(one - 1.0) <= 1e-12 && std::abs(minus + 1.0) <= 1e-12;
    return {pass, "kappa = " + fmt(half, 12) + ", " + fmt(one, 12) + ", " + fmt(minus, 12)};
}

// 3: diversity threshold against a Boost Student-t oracle.
Outcome threshold_oracle()
{
    const auto oracle = [](std::size_t n)
    {
        const double df = static_cast<double>(n) - 2.0;
        const double tc = boost::math::quantile(boost::math::students_t(df), 0.975);
        return tc / std::sqrt(df + tc * tc);
    };
    const double d52 = diversity_threshold(52, 0.05);
    bool pass = std::abs(d52 - 0.2732) <= 0.002 && std::abs(d52 - oracle(52)) <= 1e-9;
    double previous = 2.0;
    std::string series;
    for (const std::size_t n : {10u, 52u, 102u, 1002u})
    {
        const double d = diversity_threshold(n, 0.05);
        pass = pass && d < previous && std::abs(d - oracle(n)) <= 1e-9;
        previous = d;
        series += fmt(d) + " ";
    }
    return {pass, "delta(52) = " + fmt(d52) + ", delta(10,52,102,1002) = " + series};
}

// 4: under independence the verdict should reject diversity at about alpha.
// Binary error tables of independent models are structurally negatively
// associated, so the null model uses a third class as the truth: both models
// err everywhere and guess between the two other classes independently.
Outcome calibration()
{
    const auto start = Clock::now();
    constexpr int trials = 1000;
    constexpr std::size_t rows = 100;
    int non_diverse = 0;
    for (int trial = 0; trial < trials; ++trial)
    {
        Rng rng(derive_seed(4, static_cast<std::uint64_t>(trial)));
        std::vector<int> a(rows), b(rows), truth(rows, 2);
        for (std::size_t i = 0; i < rows; ++i)
        {
            a[i] = static_cast<int>(rng.index(2));
            b[i] = static_cast<int>(rng.index(2));
        }
        if (!diversity_verdict(build_contingency(a, b, truth, 3), 0.05).diverse)
        {
            ++non_diverse;
        }
    }
    const double rate = static_cast<double>(non_diverse) / trials;
    const double elapsed = seconds_since(start);
    return {rate <= 0.08 && elapsed < 30.0, "non-diverse rate " + fmt(rate) + " in " + fmt(elapsed, 3) + " s"};
}

// 5: Friedman/Holm meta-targets and the average-rank computation.
Outcome friedman_holm()
{
    Rng rng(5);
    std::vector<double> column(50);
    for (auto& v : column)
    {
        v = rng.uniform(0.5, 0.9);
    }
    std::vector<double> identical;
    for (int a = 0; a < 3; ++a)
    {
        identical.insert(identical.end(), column.begin(), column.end());
    }
    const auto same = derive_meta_target(AccuracyMatrix({"a", "b", "c"}, 50, identical), 0.05).bits;
    const bool all_ones = same == std::vector<int>{1, 1, 1};

    std::vector<double> dominated;
    for (const double level : {0.82, 0.80, 0.65})
    {
        for (int r = 0; r < 50; ++r)
        {
            dominated.push_back(level + rng.uniform(-0.02, 0.02));
        }
    }
    const auto bits = derive_meta_target(AccuracyMatrix({"a", "b", "c"}, 50, dominated), 0.05).bits;
    const bool dropped = bits[2] == 0 && bits[0] == 1;

    bool ranks_match = true;
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<double> values(5 * 20);
        for (auto& v : values)
        {
            v = static_cast<double>(rng.index(6)) / 5.0;
        }
        const AccuracyMatrix m({"a", "b", "c", "d", "e"}, 20, values);
        std::vector<double> oracle(5, 0.0);
        for (std::size_t run = 0; run < 20; ++run)
        {
            std::vector<double> values_of_run(5);
            for (std::size_t a = 0; a < 5; ++a)
            {
                values_of_run[a] = m.at(a, run);
            }
            const auto ranks = average_ranks(values_of_run);
            for (std::size_t a = 0; a < 5; ++a)
            {
                double greater = 0.0, equal = 0.0;
                for (std::size_t b = 0; b < 5; ++b)
                {
                    greater += m.at(b, run) > m.at(a, run) ? 1.0 : 0.0;
                    equal += m.at(b, run) == m.at(a, run) ? 1.0 : 0.0;
                }
                const double rank = 1.0 + greater + (equal - 1.0) / 2.0;
                ranks_match = ranks_match && ranks[a] == rank;
                oracle[a] += rank;
            }
        }
        for (auto& v : oracle)
        {
            v /= 20.0;
        }
        ranks_match = ranks_match && mean_ranks(m) == oracle;
    }
    std::ostringstream detail;
    detail << "identical -> " << (all_ones ? "all ones" : "NOT all ones") << ", dominated bit " << bits[2]
           << ", brute-force ranks " << (ranks_match ? "match" : "DIFFER");
    return {all_ones && dropped && ranks_match, detail.str()};
}

// 6: metrics against exhaustive enumeration.
Outcome metric_oracles()
{
    Rng rng(6);
    int checked = 0;
    bool pass = true;
    for (int trial = 0; trial < 1000; ++trial)
    {
        const std::size_t k = 2 + rng.index(7);
        std::vector<double> ranks(k);
        std::iota(ranks.begin(), ranks.end(), 1.0);
        rng.shuffle(std::span<double>(ranks));
        std::vector<int> truth(k, 0);
        const auto positives = 1 + rng.index(k - 1);
        for (std::size_t i = 0; i < positives; ++i)
        {
            truth[i] = 1;
        }
        rng.shuffle(std::span<int>(truth));

        std::size_t wrong = 0, pairs = 0;
        double ap = 0.0;
        for (std::size_t a = 0; a < k; ++a)
        {
            if (!truth[a])
            {
                continue;
            }
            double above = 0.0;
            for (std::size_t b = 0; b < k; ++b)
            {
                if (!truth[b])
                {
                    ++pairs;
                    wrong += ranks[a] > ranks[b] ? 1 : 0;
                }
                else
                {
                    above += ranks[b] <= ranks[a] ? 1.0 : 0.0;
                }
            }
            ap += above / ranks[a];
        }
        const double rl = static_cast<double>(wrong) / static_cast<double>(pairs);
        ap /= static_cast<double>(positives);
        pass = pass && ranking_loss(ranks, truth) == rl;
        pass = pass && std::abs(average_precision(ranks, truth) - ap) <= 1e-15;
        pass = pass && precision_at(ranks, truth, k) == static_cast<double>(positives) / static_cast<double>(k);
        ++checked;
    }
    return {pass, std::to_string(checked) + " instances checked"};
}

// 7: structure counts.
Outcome structure_counts()
{
    const auto combos = feature_combinations(5);
    const auto corpus = testing::fake_meta_corpus(40, 13, 7);
    const auto matrix = ModelMatrix::train(corpus.features, corpus.targets, combos, {});
    const auto record = validate(matrix, corpus.features, corpus.targets);
    const auto flags = filter_models(record, 0.05, FilterMode::all);
    const auto trained = matrix.combos() * matrix.algorithms();
    return {combos.size() == 31 && trained == 403 && flags.total() == 403,
            std::to_string(combos.size()) + " combos, " + std::to_string(trained) + " trees, " +
                std::to_string(flags.total()) + " kept under all"};
}

// 8: Binary Relevance is lossless.
Outcome br_lossless()
{
    Rng rng(8);
    const auto combos = feature_combinations(5);
    bool pass = true;
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto corpus = testing::fake_meta_corpus(5 + rng.index(30), 1 + rng.index(12), derive_seed(8, static_cast<std::uint64_t>(trial)));
        const auto meta = assemble_meta_dataset(corpus.features, corpus.targets, combos[rng.index(combos.size())]);
        const auto binary = br_transform(meta);
        std::vector<std::vector<int>> stacked(meta.rows(), std::vector<int>(binary.size()));
        for (std::size_t j = 0; j < binary.size(); ++j)
        {
            pass = pass && binary[j].features == meta.features;
            for (std::size_t r = 0; r < meta.rows(); ++r)
            {
                stacked[r][j] = binary[j].bits[r];
            }
        }
        pass = pass && stacked == meta.targets;
    }
    return {pass, "100 random meta-datasets"};
}

// 9 and 10 share the synthetic-corpus runs.
struct DeskScale
{
    int seeds = 0;
    std::size_t problems = 0;
    double en_rl = 0, en_ap = 0;
    double all_rl = 0, all_kept = 0, diverse_rl = 0, diverse_kept = 0;
    std::vector<double> base_rl, base_ap;
    double seconds = 0;
};

DeskScale run_desk_scale(int seeds)
{
    const auto start = Clock::now();
    DeskScale out;
    out.seeds = seeds;
    out.base_rl.assign(31, 0.0);
    out.base_ap.assign(31, 0.0);
    for (int s = 1; s <= seeds; ++s)
    {
        const auto seed = static_cast<std::uint64_t>(s);
        const auto corpus = build_synthetic_corpus(200, seed);
        out.problems += corpus.features.size();
        CvConfig config;
        config.seed = seed;
        config.threads = 0;
        config.modes = {FilterMode::all, FilterMode::diverse, FilterMode::accurate_and_diverse};
        const auto report = run_cross_validation(corpus.features, corpus.targets, config);
        for (std::size_t v = 0; v < 31; ++v)
        {
            out.base_rl[v] += report.mean(v, Metric::ranking_loss);
            out.base_ap[v] += report.mean(v, Metric::average_precision);
        }
        out.all_rl += report.mean(report.ensemble_variant(0), Metric::ranking_loss);
        out.all_kept += report.mean_kept(0);
        out.diverse_rl += report.mean(report.ensemble_variant(1), Metric::ranking_loss);
        out.diverse_kept += report.mean_kept(1);
        out.en_rl += report.mean(report.ensemble_variant(2), Metric::ranking_loss);
        out.en_ap += report.mean(report.ensemble_variant(2), Metric::average_precision);
        std::cerr << "  seed " << s << "/" << seeds << " done after " << fmt(seconds_since(start), 1) << " s\n";
    }
    const double n = seeds;
    for (auto* v : {&out.en_rl, &out.en_ap, &out.all_rl, &out.all_kept, &out.diverse_rl, &out.diverse_kept})
    {
        *v /= n;
    }
    for (std::size_t v = 0; v < 31; ++v)
    {
        out.base_rl[v] /= n;
        out.base_ap[v] /= n;
    }
    out.seconds = seconds_since(start);
    return out;
}

Outcome desk_replication(const DeskScale& d)
{
    const auto best_rl = std::min_element(d.base_rl.begin(), d.base_rl.end());
    const auto best_ap = std::max_element(d.base_ap.begin(), d.base_ap.end());
    const bool pass = d.en_rl <= *best_rl + 0.02 && d.en_ap >= *best_ap - 0.02 && d.seconds < 600.0;
    std::ostringstream detail;
    detail << d.seeds << " seeds, " << d.problems / static_cast<std::size_t>(d.seeds) << " problems/seed: ensemble RL "
           << fmt(d.en_rl) << " vs best base " << fmt(*best_rl) << " (combo " << (best_rl - d.base_rl.begin()) + 1
           << "), AP " << fmt(d.en_ap) << " vs " << fmt(*best_ap) << " (combo " << (best_ap - d.base_ap.begin()) + 1
           << "), " << fmt(d.seconds, 1) << " s";
    return {pass, detail.str()};
}

Outcome sensitivity(const DeskScale& d)
{
    const bool pass = d.diverse_kept < d.all_kept && d.diverse_rl <= d.all_rl + 0.02;
    return {pass, "models/column diverse " + fmt(d.diverse_kept, 2) + " vs all " + fmt(d.all_kept, 2) + ", RL diverse " +
                      fmt(d.diverse_rl) + " vs all " + fmt(d.all_rl)};
}

// 11: the xval command is byte-reproducible.
Outcome xval_determinism()
{
    testing::TempDir dir("acceptance-xval");
    const auto corpus = testing::fake_meta_corpus(60, 4, 11);
    std::ostringstream features, targets;
    write_feature_table(features, corpus.features);
    write_target_table(targets, corpus.targets);
    testing::write_file(dir / "features.csv", features.str());
    testing::write_file(dir / "targets.csv", targets.str());
    const auto run = [&](const std::string& out)
    {
        std::ostringstream sink;
        return cli::run({"xval", "--features", (dir / "features.csv").string(), "--targets", (dir / "targets.csv").string(),
                         "--seed", "7", "--mode", "every", "--out", (dir / out).string()},
                        sink, sink);
    };
    if (run("first") != cli::exit_ok || run("second") != cli::exit_ok)
    {
        return {false, "xval failed"};
    }
    std::size_t compared = 0;
    bool same = true;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "first"))
    {
        const auto name = entry.path().filename();
        same = same && testing::read_file(entry.path()) == testing::read_file(dir / "second" / name);
        ++compared;
    }
    return {same && compared == 5, std::to_string(compared) + " report files compared"};
}

} // namespace

int main()
{
    int failures = 0;
    const auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check)
    {
        Outcome outcome;
        try
        {
            outcome = check();
        }
        catch (const std::exception& e)
        {
            outcome = {false, std::string("threw: ") + e.what()};
        }
        failures += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "PASS " : "FAIL ") << std::setw(2) << id << "  " << name << ": " << outcome.detail
                  << std::endl;
    };

    report(1, "tie-averaged ranking", rank_example);
    report(2, "kappa oracle", kappa_oracle);
    report(3, "diversity threshold", threshold_oracle);
    report(4, "calibration under independence", calibration);
    report(5, "Friedman/Holm meta-targets", friedman_holm);
    report(6, "metric oracles", metric_oracles);
    report(7, "structure counts", structure_counts);
    report(8, "binary relevance losslessness", br_lossless);

    DeskScale desk;
    std::string desk_error;
    try
    {
        desk = run_desk_scale(20);
    }
    catch (const std::exception& e)
    {
        desk_error = e.what();
    }
    report(9, "desk-scale replication", [&]
    {
        return desk_error.empty() ? desk_replication(desk) : Outcome{false, "threw: " + desk_error};
    });
    report(10, "diversity sensitivity", [&]
    {
        return desk_error.empty() ? sensitivity(desk) : Outcome{false, "threw: " + desk_error};
    });
    report(11, "xval determinism", xval_determinism);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
