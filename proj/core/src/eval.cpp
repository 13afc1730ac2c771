#include <metarec/csv.hpp>
#include <metarec/error.hpp>
#include <metarec/eval.hpp>
#include <metarec/random.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace metarec {

namespace {

void check_target(std::span<const double> ranks, std::span<const int> truth)
{
    if (ranks.size() != truth.size())
    {
        throw Error(ErrorKind::length_mismatch, "ranks and truth differ in length");
    }
    const auto positives = std::count_if(truth.begin(), truth.end(), [](int b) { return b != 0; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(truth.size()))
    {
        throw Error(ErrorKind::degenerate_target, "truth needs both appropriate and inappropriate algorithms");
    }
}

} // namespace

double ranking_loss(std::span<const double> ranks, std::span<const int> truth)
{
    check_target(ranks, truth);
    std::size_t wrong = 0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < truth.size(); ++a)
    {
        if (!truth[a])
        {
            continue;
        }
        for (std::size_t b = 0; b < truth.size(); ++b)
        {
            if (truth[b])
            {
                continue;
            }
            ++pairs;
            if (ranks[a] > ranks[b])
            {
                ++wrong;
            }
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(pairs);
}

std::vector<std::size_t> ranked_order(std::span<const double> ranks)
{
    std::vector<std::size_t> order(ranks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
    return order;
}

double precision_at(std::span<const double> ranks, std::span<const int> truth, std::size_t m)
{
    check_target(ranks, truth);
    if (m < 1 || m > ranks.size())
    {
        throw Error(ErrorKind::domain_error, "precision cut-off must lie in [1, k]");
    }
    const auto order = ranked_order(ranks);
    std::size_t hits = 0;
    for (std::size_t p = 0; p < m; ++p)
    {
        hits += truth[order[p]] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(m);
}

double average_precision(std::span<const double> ranks, std::span<const int> truth)
{
    check_target(ranks, truth);
    const auto order = ranked_order(ranks);
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t p = 0; p < order.size(); ++p)
    {
        if (truth[order[p]])
        {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(p + 1);
        }
    }
    return sum / static_cast<double>(hits);
}

std::string_view to_string(Metric metric)
{
    switch (metric)
    {
    case Metric::ranking_loss: return "ranking_loss";
    case Metric::precision_at_1: return "precision_at_1";
    case Metric::average_precision: return "average_precision";
    }
    return "unknown";
}

std::size_t CvReport::variant_index(std::string_view name) const
{
    const auto it = std::find(variants.begin(), variants.end(), name);
    if (it == variants.end())
    {
        throw Error(ErrorKind::domain_error, "unknown model variant '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - variants.begin());
}

std::vector<double> CvReport::values(std::size_t variant, Metric metric) const
{
    std::vector<double> out;
    for (const auto& cell : cells)
    {
        const double v = cell.metrics.at(variant)[static_cast<std::size_t>(metric)];
        if (std::isfinite(v))
        {
            out.push_back(v);
        }
    }
    return out;
}

double CvReport::mean(std::size_t variant, Metric metric) const
{
    const auto v = values(variant, metric);
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double CvReport::median(std::size_t variant, Metric metric) const
{
    return quantile(values(variant, metric), 0.5);
}

double CvReport::mean_kept(std::size_t mode_index) const
{
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& cell : cells)
    {
        for (const auto kept : cell.kept.at(mode_index))
        {
            sum += static_cast<double>(kept);
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::size_t CvReport::skipped() const
{
    std::size_t total = 0;
    for (const auto& cell : cells)
    {
        total += cell.skipped;
    }
    return total;
}

std::size_t CvReport::best_base(Metric metric, bool higher_is_better) const
{
    const auto bases = variants.size() - config.modes.size();
    std::size_t best = 0;
    for (std::size_t v = 1; v < bases; ++v)
    {
        const double candidate = mean(v, metric);
        const double incumbent = mean(best, metric);
        if (higher_is_better ? candidate > incumbent : candidate < incumbent)
        {
            best = v;
        }
    }
    return best;
}

namespace {

template <typename T>
std::vector<T> pick(const std::vector<T>& values, std::span<const std::size_t> rows)
{
    std::vector<T> out;
    out.reserve(rows.size());
    for (const auto r : rows)
    {
        out.push_back(values[r]);
    }
    return out;
}

TargetTable pick(const TargetTable& table, std::span<const std::size_t> rows)
{
    TargetTable out;
    out.algorithms = table.algorithms;
    out.problems = pick(table.problems, rows);
    out.targets = pick(table.targets, rows);
    return out;
}

bool degenerate(const MetaTarget& target)
{
    const auto positives = std::count(target.bits.begin(), target.bits.end(), 1);
    return positives == 0 || positives == static_cast<std::ptrdiff_t>(target.bits.size());
}

CvCell evaluate_cell(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const std::vector<FamilyCombo>& combos,
    const CvConfig& config,
    int repetition,
    int fold,
    const std::vector<std::size_t>& test_rows,
    const std::vector<std::size_t>& rest)
{
    const auto t = combos.size();
    const auto k = targets.algorithms.size();
    const auto cell_seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(repetition * config.folds + fold));
    const auto split = split_half(targets.targets, rest, cell_seed);

    CvCell cell;
    cell.repetition = repetition;
    cell.fold = fold;
    cell.train = split.train.size();
    cell.validation = split.validation.size();
    cell.test = test_rows.size();

    const auto matrix = ModelMatrix::train(pick(features, split.train), pick(targets, split.train), combos, config.tree);
    const auto record = validate(matrix, pick(features, split.validation), pick(targets, split.validation));
    std::vector<FlagMatrix> flags;
    for (const auto mode : config.modes)
    {
        flags.push_back(filter_models(record, config.alpha, mode));
        std::vector<std::size_t> kept(k);
        for (std::size_t j = 0; j < k; ++j)
        {
            kept[j] = flags.back().column_sum(j);
        }
        cell.kept.push_back(std::move(kept));
    }

    const auto variants = t + config.modes.size();
    std::vector<std::array<double, 3>> sums(variants, {0.0, 0.0, 0.0});
    std::size_t scored = 0;
    for (const auto r : test_rows)
    {
        const auto& truth = targets.targets[r].bits;
        if (degenerate(targets.targets[r]))
        {
            ++cell.skipped;
            continue;
        }
        ++scored;
        const auto cells = matrix.probabilities(features[r]);
        const auto score = [&](std::size_t variant, std::span<const double> probabilities)
        {
            const auto ranks = rank_algorithms(probabilities);
            sums[variant][0] += ranking_loss(ranks, truth);
            sums[variant][1] += precision_at(ranks, truth, 1);
            sums[variant][2] += average_precision(ranks, truth);
        };
        for (std::size_t i = 0; i < t; ++i)
        {
            score(i, std::span<const double>(cells).subspan(i * k, k));
        }
        for (std::size_t m = 0; m < flags.size(); ++m)
        {
            score(t + m, combine_probabilities(cells, flags[m]));
        }
    }
    cell.metrics.resize(variants);
    for (std::size_t v = 0; v < variants; ++v)
    {
        for (std::size_t m = 0; m < 3; ++m)
        {
            cell.metrics[v][m] = scored == 0 ? std::numeric_limits<double>::quiet_NaN()
                                             : sums[v][m] / static_cast<double>(scored);
        }
    }
    return cell;
}

} // namespace

CvReport run_cross_validation(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const CvConfig& config)
{
    const auto n = features.size();
    if (n != targets.targets.size())
    {
        throw Error(ErrorKind::length_mismatch, "meta-features and meta-targets cover different numbers of problems");
    }
    if (n < 20)
    {
        throw Error(ErrorKind::too_few_instances, "cross-validation needs at least 20 meta-instances");
    }
    if (config.repetitions < 1 || config.folds < 2 || config.modes.empty())
    {
        throw Error(ErrorKind::domain_error, "cross-validation needs repetitions >= 1, folds >= 2 and a filter mode");
    }
    const auto combos = feature_combinations(config.families);

    CvReport report;
    report.config = config;
    report.instances = n;
    report.algorithms = targets.algorithms;
    for (const auto& combo : combos)
    {
        report.variants.push_back(std::to_string(combo.id));
    }
    for (const auto mode : config.modes)
    {
        report.variants.push_back(config.modes.size() == 1 ? "En" : "En:" + std::string(to_string(mode)));
    }

    struct Task
    {
        int repetition;
        int fold;
        std::vector<std::size_t> test;
        std::vector<std::size_t> rest;
    };
    std::vector<Task> tasks;
    for (int rep = 0; rep < config.repetitions; ++rep)
    {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(rep)));
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<int> fold_of(n);
        for (std::size_t p = 0; p < n; ++p)
        {
            fold_of[order[p]] = static_cast<int>(p % static_cast<std::size_t>(config.folds));
        }
        for (int fold = 0; fold < config.folds; ++fold)
        {
            Task task{rep, fold, {}, {}};
            for (std::size_t r = 0; r < n; ++r)
            {
                (fold_of[r] == fold ? task.test : task.rest).push_back(r);
            }
            tasks.push_back(std::move(task));
        }
    }

    report.cells.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]
    {
        for (auto i = next++; i < tasks.size(); i = next++)
        {
            try
            {
                const auto& task = tasks[i];
                report.cells[i] = evaluate_cell(features, targets, combos, config, task.repetition, task.fold, task.test, task.rest);
            }
            catch (...)
            {
                const std::lock_guard lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
                next = tasks.size();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(
        config.threads == 0 ? std::thread::hardware_concurrency() : config.threads,
        static_cast<unsigned>(tasks.size())));
    if (threads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
        {
            pool.emplace_back(worker);
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
    return report;
}

namespace {

nlohmann::ordered_json number(double v)
{
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
}

} // namespace

std::string cv_report_json(const CvReport& report)
{
    using json = nlohmann::ordered_json;
    json root;
    json config;
    config["alpha"] = report.config.alpha;
    json modes = json::array();
    for (const auto mode : report.config.modes)
    {
        modes.push_back(std::string(to_string(mode)));
    }
    config["modes"] = modes;
    config["seed"] = report.config.seed;
    config["repetitions"] = report.config.repetitions;
    config["folds"] = report.config.folds;
    config["families"] = report.config.families;
    config["min_leaf"] = report.config.tree.min_leaf;
    config["max_depth"] = report.config.tree.max_depth ? json(*report.config.tree.max_depth) : json();
    root["config"] = config;
    root["instances"] = report.instances;
    root["algorithms"] = report.algorithms;
    root["skipped_degenerate"] = report.skipped();

    json summary;
    for (std::size_t v = 0; v < report.variants.size(); ++v)
    {
        json entry;
        for (const auto metric : all_metrics)
        {
            entry[std::string(to_string(metric))] = {
                {"mean", number(report.mean(v, metric))},
                {"median", number(report.median(v, metric))},
            };
        }
        summary[report.variants[v]] = entry;
    }
    root["summary"] = summary;

    json kept;
    for (std::size_t m = 0; m < report.config.modes.size(); ++m)
    {
        const auto k = report.algorithms.size();
        std::vector<double> per_column(k, 0.0);
        for (const auto& cell : report.cells)
        {
            for (std::size_t j = 0; j < k; ++j)
            {
                per_column[j] += static_cast<double>(cell.kept[m][j]) / static_cast<double>(report.cells.size());
            }
        }
        kept[std::string(to_string(report.config.modes[m]))] = {
            {"mean", report.mean_kept(m)},
            {"per_algorithm", per_column},
        };
    }
    root["kept_models"] = kept;

    json cells = json::array();
    for (const auto& cell : report.cells)
    {
        json entry;
        entry["repetition"] = cell.repetition;
        entry["fold"] = cell.fold;
        entry["train"] = cell.train;
        entry["validation"] = cell.validation;
        entry["test"] = cell.test;
        entry["skipped"] = cell.skipped;
        json metrics;
        for (std::size_t v = 0; v < report.variants.size(); ++v)
        {
            json values;
            for (const auto metric : all_metrics)
            {
                values[std::string(to_string(metric))] = number(cell.metrics[v][static_cast<std::size_t>(metric)]);
            }
            metrics[report.variants[v]] = values;
        }
        entry["metrics"] = metrics;
        json kept_cell;
        for (std::size_t m = 0; m < report.config.modes.size(); ++m)
        {
            kept_cell[std::string(to_string(report.config.modes[m]))] = cell.kept[m];
        }
        entry["kept"] = kept_cell;
        cells.push_back(entry);
    }
    root["cells"] = cells;
    return root.dump(2) + "\n";
}

void write_cv_report(const CvReport& report, const std::filesystem::path& directory)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
    {
        throw Error(ErrorKind::io_error, "cannot create " + directory.string() + ": " + ec.message());
    }
    csv::write_file_atomic(directory / "report.json", cv_report_json(report));

    for (const auto metric : all_metrics)
    {
        std::ostringstream out;
        csv::Row header{"variant", "mean", "median"};
        for (const auto& cell : report.cells)
        {
            header.push_back("r" + std::to_string(cell.repetition + 1) + "f" + std::to_string(cell.fold + 1));
        }
        csv::write_row(out, header);
        for (std::size_t v = 0; v < report.variants.size(); ++v)
        {
            csv::Row row{report.variants[v], csv::format_double(report.mean(v, metric)),
                         csv::format_double(report.median(v, metric))};
            for (const auto& cell : report.cells)
            {
                row.push_back(csv::format_double(cell.metrics[v][static_cast<std::size_t>(metric)]));
            }
            csv::write_row(out, row);
        }
        csv::write_file_atomic(directory / (std::string(to_string(metric)) + ".csv"), out.str());
    }

    std::ostringstream kept;
    csv::Row header{"mode", "mean"};
    header.insert(header.end(), report.algorithms.begin(), report.algorithms.end());
    csv::write_row(kept, header);
    for (std::size_t m = 0; m < report.config.modes.size(); ++m)
    {
        csv::Row row{std::string(to_string(report.config.modes[m])), csv::format_double(report.mean_kept(m))};
        for (std::size_t j = 0; j < report.algorithms.size(); ++j)
        {
            double sum = 0.0;
            for (const auto& cell : report.cells)
            {
                sum += static_cast<double>(cell.kept[m][j]);
            }
            row.push_back(csv::format_double(sum / static_cast<double>(report.cells.size())));
        }
        csv::write_row(kept, row);
    }
    csv::write_file_atomic(directory / "kept_models.csv", kept.str());
}

} // namespace metarec
