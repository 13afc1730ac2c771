#include "cli.hpp"

#include <metarec/csv.hpp>
#include <metarec/ensemble.hpp>
#include <metarec/error.hpp>
#include <metarec/eval.hpp>
#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/tabular.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>

namespace metarec::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::string mode = "accurate-and-diverse";
    double threshold = 0.5;
    std::size_t min_leaf = 2;
    std::size_t max_depth = 0; ///< 0 = unlimited
    int repetitions = 5;
    int folds = 10;
    unsigned threads = 1;
    std::string features;
    std::string targets;
    std::string bundle;
    std::string dataset;
    std::string target_column;
    std::string out;
    std::string config;
    std::string input;
    std::string accuracies_out;
    bool from_datasets = false;
};

// Options bound to RunConfig fields; the JSON config fills whatever the
// command line left unset.
class Binder
{
public:
    explicit Binder(CLI::App& app) : m_app(app) {}

    template <typename T>
    void option(const std::string& key, const std::string& flag, T& field, const std::string& help)
    {
        auto* opt = m_app.add_option(flag, field, help);
        m_setters[key] = [opt, &field](const nlohmann::json& value)
        {
            if (opt->count() == 0)
            {
                field = value.get<T>();
            }
        };
        m_options[key] = opt;
    }

    CLI::Option* get(const std::string& key) const { return m_options.at(key); }
    bool given(const std::string& key) const { return m_options.count(key) && m_options.at(key)->count() > 0; }

    void apply(const nlohmann::json& file)
    {
        for (const auto& [key, value] : file.items())
        {
            const auto it = m_setters.find(key);
            if (it == m_setters.end())
            {
                if (!known_key(key))
                {
                    throw UsageError("unknown configuration key '" + key + "'");
                }
                continue;
            }
            try
            {
                it->second(value);
                m_from_file.insert(key);
            }
            catch (const nlohmann::json::exception&)
            {
                throw UsageError("configuration key '" + key + "' has the wrong type");
            }
        }
    }

    bool set(const std::string& key) const { return given(key) || m_from_file.count(key) > 0; }

    static bool known_key(const std::string& key)
    {
        static const std::vector<std::string> keys = {
            "seed", "alpha", "mode", "threshold", "min_leaf", "max_depth", "repetitions", "folds", "threads",
            "features", "targets", "bundle", "dataset", "target_column", "out",
        };
        return std::find(keys.begin(), keys.end(), key) != keys.end();
    }

private:
    CLI::App& m_app;
    std::map<std::string, std::function<void(const nlohmann::json&)>> m_setters;
    std::map<std::string, CLI::Option*> m_options;
    std::set<std::string> m_from_file;
};

struct Command
{
    CLI::App* app = nullptr;
    std::unique_ptr<Binder> binder;
};

void tree_options(Binder& binder, RunConfig& config)
{
    binder.option("alpha", "--alpha", config.alpha, "Significance level");
    binder.option("mode", "--mode", config.mode, "Filter mode: all, accurate, diverse, accurate-and-diverse");
    binder.option("min_leaf", "--min-leaf", config.min_leaf, "Minimum instances per tree leaf");
    binder.option("max_depth", "--max-depth", config.max_depth, "Maximum tree depth (0 = unlimited)");
}

void validate(const RunConfig& config, bool allow_every)
{
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
    {
        throw UsageError("alpha must lie in (0, 1)");
    }
    if (!(config.threshold >= 0.0 && config.threshold <= 1.0))
    {
        throw UsageError("threshold must lie in [0, 1]");
    }
    if (!parse_filter_mode(config.mode) && !(allow_every && config.mode == "every"))
    {
        throw UsageError("unknown filter mode '" + config.mode + "'");
    }
    if (config.min_leaf < 1)
    {
        throw UsageError("min-leaf must be at least 1");
    }
    if (config.repetitions < 1 || config.folds < 2)
    {
        throw UsageError("need repetitions >= 1 and folds >= 2");
    }
}

TreeParams tree_params(const RunConfig& config)
{
    TreeParams params;
    params.min_leaf = config.min_leaf;
    if (config.max_depth > 0)
    {
        params.max_depth = config.max_depth;
    }
    return params;
}

std::string lower(std::string text)
{
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::vector<fs::path> list_files(const fs::path& directory, const std::vector<std::string>& extensions)
{
    std::error_code ec;
    if (!fs::is_directory(directory, ec))
    {
        throw UsageError("cannot read directory " + directory.string());
    }
    std::vector<fs::path> files;
    for (fs::directory_iterator it(directory, ec), end; !ec && it != end; it.increment(ec))
    {
        if (!it->is_regular_file())
        {
            continue;
        }
        const auto extension = lower(it->path().extension().string());
        if (std::find(extensions.begin(), extensions.end(), extension) != extensions.end())
        {
            files.push_back(it->path());
        }
    }
    if (ec)
    {
        throw UsageError("cannot read directory " + directory.string() + ": " + ec.message());
    }
    std::sort(files.begin(), files.end());
    return files;
}

void require(const std::string& value, const std::string& what)
{
    if (value.empty())
    {
        throw UsageError(what + " is required");
    }
}

LoadOptions load_options(const RunConfig& config)
{
    LoadOptions options;
    if (!config.target_column.empty())
    {
        options.target_column = config.target_column;
    }
    return options;
}

int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    require(config.input, "a datasets directory");
    require(config.out, "--out");
    const auto files = list_files(config.input, {".csv", ".arff"});
    if (files.empty())
    {
        throw UsageError("no .csv or .arff files in " + config.input);
    }
    std::vector<MetaFeatureGroupSet> features;
    std::size_t failed = 0;
    for (const auto& file : files)
    {
        try
        {
            const auto dataset = load_dataset(file, load_options(config));
            features.push_back(extract_all(dataset, config.seed));
        }
        catch (const std::exception& e)
        {
            ++failed;
            err << file.filename().string() << ": " << e.what() << "\n";
        }
    }
    std::ostringstream table, imputed;
    write_feature_table(table, features);
    write_imputation_table(imputed, features);
    const fs::path path(config.out);
    csv::write_file_atomic(path, table.str());
    auto sidecar = path;
    sidecar.replace_filename(path.stem().string() + ".imputed.csv");
    csv::write_file_atomic(sidecar, imputed.str());
    out << "extracted " << features.size() << " of " << files.size() << " datasets into " << path.string() << "\n";
    if (failed > 0)
    {
        err << failed << " dataset(s) failed\n";
        return exit_data_error;
    }
    return exit_ok;
}

int cmd_targets(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    require(config.input, "an input directory");
    require(config.out, "--out");
    const auto files = config.from_datasets ? list_files(config.input, {".csv", ".arff"}) : list_files(config.input, {".csv"});
    if (files.empty())
    {
        throw UsageError("no input files in " + config.input);
    }
    if (!config.accuracies_out.empty())
    {
        fs::create_directories(config.accuracies_out);
    }
    TargetTable table;
    std::size_t failed = 0;
    for (const auto& file : files)
    {
        try
        {
            AccuracyMatrix matrix;
            std::string problem = file.stem().string();
            if (config.from_datasets)
            {
                const auto dataset = load_dataset(file, load_options(config));
                problem = dataset.name();
                matrix = estimate_accuracy_matrix(dataset, demo_candidates(), config.seed, config.repetitions, config.folds);
                if (!config.accuracies_out.empty())
                {
                    std::ostringstream text;
                    write_accuracy_matrix(text, matrix);
                    csv::write_file_atomic(fs::path(config.accuracies_out) / (problem + ".csv"), text.str());
                }
            }
            else
            {
                matrix = load_accuracy_matrix(file);
            }
            if (table.algorithms.empty())
            {
                table.algorithms = matrix.names();
            }
            else if (table.algorithms != matrix.names())
            {
                throw Error(ErrorKind::schema_mismatch, "algorithm columns differ from the first matrix");
            }
            const auto derivation = derive_meta_target_detailed(matrix, config.alpha);
            if (derivation.test == TargetTest::wilcoxon)
            {
                err << file.filename().string() << ": two candidates, Wilcoxon signed-rank test used instead of Friedman/Holm\n";
            }
            table.problems.push_back(problem);
            table.targets.push_back(derivation.target);
        }
        catch (const std::exception& e)
        {
            ++failed;
            err << file.filename().string() << ": " << e.what() << "\n";
        }
    }
    std::ostringstream text;
    write_target_table(text, table);
    csv::write_file_atomic(config.out, text.str());
    out << "derived " << table.targets.size() << " meta-targets into " << config.out << "\n";
    if (failed > 0)
    {
        err << failed << " input(s) failed\n";
        return exit_data_error;
    }
    return exit_ok;
}

// Meta-features and meta-targets joined on the problem name, in feature
// table order.
std::pair<std::vector<MetaFeatureGroupSet>, TargetTable> load_meta_data(const RunConfig& config)
{
    require(config.features, "--features");
    require(config.targets, "--targets");
    auto features = load_feature_table(config.features);
    const auto targets = load_target_table(config.targets);
    std::map<std::string, std::size_t> index;
    for (std::size_t p = 0; p < targets.problems.size(); ++p)
    {
        index.emplace(targets.problems[p], p);
    }
    TargetTable aligned;
    aligned.algorithms = targets.algorithms;
    for (const auto& set : features)
    {
        const auto it = index.find(set.problem);
        if (it == index.end())
        {
            throw Error(ErrorKind::length_mismatch, "no meta-target for problem '" + set.problem + "'");
        }
        aligned.problems.push_back(set.problem);
        aligned.targets.push_back(targets.targets[it->second]);
    }
    return {std::move(features), std::move(aligned)};
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream&)
{
    require(config.out, "--out");
    const auto [features, targets] = load_meta_data(config);
    EnsembleConfig ensemble_config;
    ensemble_config.alpha = config.alpha;
    ensemble_config.mode = *parse_filter_mode(config.mode);
    ensemble_config.threshold = config.threshold;
    ensemble_config.tree = tree_params(config);
    ensemble_config.seed = config.seed;
    const auto ensemble = train_ensemble(features, targets, ensemble_config);
    save_bundle(ensemble, config.out);
    out << "trained " << ensemble.matrix.combos() << " x " << ensemble.matrix.algorithms() << " models, kept";
    for (std::size_t j = 0; j < ensemble.matrix.algorithms(); ++j)
    {
        out << " " << ensemble.matrix.algorithm_names()[j] << "=" << ensemble.flags.column_sum(j);
    }
    out << "\n";
    return exit_ok;
}

int cmd_recommend(const RunConfig& config, const Binder& binder, std::ostream& out, std::ostream&)
{
    require(config.bundle, "--bundle");
    require(config.dataset, "--dataset");
    auto ensemble = load_bundle(config.bundle);
    if (binder.set("threshold"))
    {
        ensemble.config.threshold = config.threshold;
    }
    const auto dataset = load_dataset(config.dataset, load_options(config));
    const auto rec = ensemble.recommend(extract_all(dataset, config.seed));
    std::ostringstream text;
    write_recommendation(text, ensemble.matrix.algorithm_names(), rec);
    if (config.out.empty())
    {
        out << text.str();
    }
    else
    {
        csv::write_file_atomic(config.out, text.str());
    }
    return exit_ok;
}

int cmd_xval(const RunConfig& config, std::ostream& out, std::ostream&)
{
    require(config.out, "--out");
    const auto [features, targets] = load_meta_data(config);
    CvConfig cv;
    cv.alpha = config.alpha;
    cv.seed = config.seed;
    cv.repetitions = config.repetitions;
    cv.folds = config.folds;
    cv.tree = tree_params(config);
    cv.threads = config.threads;
    if (config.mode == "every")
    {
        cv.modes.assign(std::begin(all_filter_modes), std::end(all_filter_modes));
    }
    else
    {
        cv.modes = {*parse_filter_mode(config.mode)};
    }
    const auto report = run_cross_validation(features, targets, cv);
    write_cv_report(report, config.out);
    for (std::size_t m = 0; m < cv.modes.size(); ++m)
    {
        const auto v = report.ensemble_variant(m);
        out << report.variants[v] << ": ranking loss " << csv::format_double(report.mean(v, Metric::ranking_loss))
            << ", average precision " << csv::format_double(report.mean(v, Metric::average_precision))
            << ", models per column " << csv::format_double(report.mean_kept(m)) << "\n";
    }
    const auto best = report.best_base(Metric::ranking_loss, false);
    out << "best single combo " << report.variants[best] << ": ranking loss "
        << csv::format_double(report.mean(best, Metric::ranking_loss)) << "\n";
    return exit_ok;
}

int cmd_datasetoids(const RunConfig& config, std::ostream& out, std::ostream&)
{
    require(config.input, "a dataset");
    require(config.out, "--out");
    const auto dataset = load_dataset(config.input, load_options(config));
    const auto derived = generate_datasetoids(dataset);
    fs::create_directories(config.out);
    for (const auto& d : derived)
    {
        std::ostringstream text;
        write_csv(text, d);
        csv::write_file_atomic(fs::path(config.out) / (d.name() + ".csv"), text.str());
    }
    out << "wrote " << derived.size() << " datasetoid(s) into " << config.out << "\n";
    return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Algorithm recommendation from dataset meta-features", "metarec"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    RunConfig config;
    std::map<std::string, Command> commands;
    const auto add = [&](const std::string& name, const std::string& help)
    {
        auto& command = commands[name];
        command.app = app.add_subcommand(name, help);
        command.binder = std::make_unique<Binder>(*command.app);
        command.app->add_option("--config", config.config, "JSON file with flat option keys; flags take precedence");
        return std::ref(command);
    };

    {
        Command& c = add("extract", "Compute the meta-feature table of a directory of CSV/ARFF datasets");
        c.app->add_option("datasets", config.input, "Directory of datasets")->required();
        c.binder->option("seed", "--seed", config.seed, "Seed for landmarking and complexity sampling");
        c.binder->option("out", "--out", config.out, "Meta-feature CSV");
        c.binder->option("target_column", "--target-column", config.target_column, "Target column (default: last)");
    }
    {
        Command& c = add("targets", "Derive meta-targets from per-problem accuracy matrices");
        c.app->add_option("input", config.input, "Directory of accuracy CSVs (or datasets with --from-datasets)")->required();
        c.app->add_flag("--from-datasets", config.from_datasets, "Estimate the built-in candidates on datasets instead");
        c.app->add_option("--accuracies-out", config.accuracies_out, "Also save the estimated accuracy matrices here");
        c.binder->option("seed", "--seed", config.seed, "Seed for the cross-validation folds");
        c.binder->option("alpha", "--alpha", config.alpha, "Significance level");
        c.binder->option("repetitions", "--repetitions", config.repetitions, "Cross-validation repetitions");
        c.binder->option("folds", "--folds", config.folds, "Cross-validation folds");
        c.binder->option("out", "--out", config.out, "Meta-target CSV");
        c.binder->option("target_column", "--target-column", config.target_column, "Target column (default: last)");
    }
    {
        Command& c = add("train", "Train and filter the recommendation ensemble");
        c.binder->option("features", "--features", config.features, "Meta-feature CSV");
        c.binder->option("targets", "--targets", config.targets, "Meta-target CSV");
        c.binder->option("seed", "--seed", config.seed, "Seed for the training/validation split");
        tree_options(*c.binder, config);
        c.binder->option("threshold", "--threshold", config.threshold, "Pick threshold stored in the bundle");
        c.binder->option("out", "--out", config.out, "Bundle directory");
    }
    {
        Command& c = add("recommend", "Recommend algorithms for one dataset");
        c.binder->option("bundle", "--bundle", config.bundle, "Bundle directory");
        c.binder->option("dataset", "--dataset", config.dataset, "CSV or ARFF dataset");
        c.binder->option("seed", "--seed", config.seed, "Seed for meta-feature extraction");
        c.binder->option("threshold", "--threshold", config.threshold, "Pick threshold (default: the bundle's)");
        c.binder->option("target_column", "--target-column", config.target_column, "Target column (default: last)");
        c.binder->option("out", "--out", config.out, "Recommendation CSV (default: stdout)");
    }
    {
        Command& c = add("xval", "Cross-validate the ensemble and every single-combo model");
        c.binder->option("features", "--features", config.features, "Meta-feature CSV");
        c.binder->option("targets", "--targets", config.targets, "Meta-target CSV");
        c.binder->option("seed", "--seed", config.seed, "Seed for folds and splits");
        tree_options(*c.binder, config);
        c.binder->option("repetitions", "--repetitions", config.repetitions, "Repetitions");
        c.binder->option("folds", "--folds", config.folds, "Folds");
        c.binder->option("threads", "--threads", config.threads, "Worker threads (0 = all cores)");
        c.binder->option("out", "--out", config.out, "Report directory");
    }
    {
        Command& c = add("datasetoids", "Write the datasetoids of a dataset");
        c.app->add_option("dataset", config.input, "CSV or ARFF dataset")->required();
        c.binder->option("target_column", "--target-column", config.target_column, "Target column (default: last)");
        c.binder->option("out", "--out", config.out, "Output directory");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage_error;
    }

    try
    {
        std::string name;
        Command* command = nullptr;
        for (auto& [key, c] : commands)
        {
            if (c.app->parsed())
            {
                name = key;
                command = &c;
            }
        }
        if (!config.config.empty())
        {
            nlohmann::json file;
            try
            {
                file = nlohmann::json::parse(csv::read_text(config.config));
            }
            catch (const std::exception& e)
            {
                throw UsageError("cannot read config " + config.config + ": " + e.what());
            }
            if (!file.is_object())
            {
                throw UsageError("config file must hold a JSON object");
            }
            command->binder->apply(file);
        }
        validate(config, name == "xval");

        if (name == "extract") return cmd_extract(config, out, err);
        if (name == "targets") return cmd_targets(config, out, err);
        if (name == "train") return cmd_train(config, out, err);
        if (name == "recommend") return cmd_recommend(config, *command->binder, out, err);
        if (name == "xval") return cmd_xval(config, out, err);
        return cmd_datasetoids(config, out, err);
    }
    catch (const UsageError& e)
    {
        err << "error: " << e.what() << "\n";
        return exit_usage_error;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << "\n";
        return exit_data_error;
    }
}

} // namespace metarec::cli
