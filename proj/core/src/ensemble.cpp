#include <metarec/csv.hpp>
#include <metarec/ensemble.hpp>
#include <metarec/error.hpp>
#include <metarec/random.hpp>
#include <metarec/stats.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace metarec {

std::string_view to_string(FilterMode mode)
{
    switch (mode)
    {
    case FilterMode::all: return "all";
    case FilterMode::accurate: return "accurate";
    case FilterMode::diverse: return "diverse";
    case FilterMode::accurate_and_diverse: return "accurate-and-diverse";
    }
    return "all";
}

std::optional<FilterMode> parse_filter_mode(std::string_view text)
{
    for (const auto mode : all_filter_modes)
    {
        if (text == to_string(mode))
        {
            return mode;
        }
    }
    return std::nullopt;
}

ModelMatrix::ModelMatrix(std::vector<FamilyCombo> combos, std::vector<std::string> algorithms, std::vector<DecisionTree> models) :
    m_combos(std::move(combos)),
    m_algorithms(std::move(algorithms)),
    m_models(std::move(models))
{
    if (m_models.size() != m_combos.size() * m_algorithms.size())
    {
        throw Error(ErrorKind::length_mismatch, "model grid does not match combos x algorithms");
    }
}

namespace {

const Attribute& appropriate_target()
{
    static const Attribute target = Attribute::make_nominal("appropriate", {"0", "1"});
    return target;
}

} // namespace

ModelMatrix ModelMatrix::train(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const std::vector<FamilyCombo>& combos,
    const TreeParams& params)
{
    if (combos.empty())
    {
        throw Error(ErrorKind::domain_error, "no feature combinations to train on");
    }
    if (features.empty())
    {
        throw Error(ErrorKind::too_few_instances, "no meta-instances to train on");
    }
    const auto k = targets.algorithms.size();
    std::vector<DecisionTree> models;
    models.reserve(combos.size() * k);
    for (const auto& combo : combos)
    {
        const auto meta = assemble_meta_dataset(features, targets, combo);
        std::vector<Attribute> attributes;
        for (const auto& name : meta.feature_names)
        {
            attributes.push_back(Attribute::make_numeric(name));
        }
        std::vector<double> cells;
        cells.reserve(meta.rows() * attributes.size());
        for (const auto& row : meta.features)
        {
            cells.insert(cells.end(), row.begin(), row.end());
        }
        for (const auto& binary : br_transform(meta))
        {
            const TabularDataset dataset(
                "combo" + std::to_string(combo.id), attributes, appropriate_target(), cells,
                std::vector<int>(binary.bits.begin(), binary.bits.end()));
            models.push_back(DecisionTree::train(dataset, params));
        }
    }
    return ModelMatrix(combos, targets.algorithms, std::move(models));
}

std::vector<double> ModelMatrix::probabilities(const MetaFeatureGroupSet& x) const
{
    const auto k = m_algorithms.size();
    std::vector<double> out(m_combos.size() * k);
    for (std::size_t i = 0; i < m_combos.size(); ++i)
    {
        const auto row = combo_features(x, m_combos[i]);
        for (std::size_t j = 0; j < k; ++j)
        {
            const auto proba = m_models[i * k + j].predict_proba(row);
            out[i * k + j] = proba.size() > 1 ? proba[1] : 0.0;
        }
    }
    return out;
}

std::size_t FlagMatrix::column_sum(std::size_t algorithm) const
{
    std::size_t sum = 0;
    for (std::size_t i = 0; i < m_combos; ++i)
    {
        sum += static_cast<std::size_t>(at(i, algorithm));
    }
    return sum;
}

std::size_t FlagMatrix::total() const
{
    return static_cast<std::size_t>(std::count(m_flags.begin(), m_flags.end(), 1));
}

ValidationRecord validate(
    const ModelMatrix& matrix,
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets)
{
    if (features.size() != targets.targets.size())
    {
        throw Error(ErrorKind::length_mismatch, "validation features and targets differ in length");
    }
    const auto t = matrix.combos();
    const auto k = matrix.algorithms();
    if (targets.algorithms.size() != k)
    {
        throw Error(ErrorKind::arity_mismatch, "validation targets do not match the model matrix algorithms");
    }
    ValidationRecord record;
    record.combos = t;
    record.algorithms = k;
    record.predictions.assign(t * k, std::vector<int>(features.size(), 0));
    record.truth.assign(k, std::vector<int>(features.size(), 0));
    record.accuracies.assign(t * k, 0.0);
    for (std::size_t r = 0; r < features.size(); ++r)
    {
        const auto probs = matrix.probabilities(features[r]);
        for (std::size_t j = 0; j < k; ++j)
        {
            record.truth[j][r] = targets.targets[r].bits.at(j);
        }
        for (std::size_t cell = 0; cell < t * k; ++cell)
        {
            // argmax over {0, 1} with ties to class 0
            const int predicted = probs[cell] > 0.5 ? 1 : 0;
            record.predictions[cell][r] = predicted;
            if (predicted == record.truth[cell % k][r])
            {
                record.accuracies[cell] += 1.0;
            }
        }
    }
    if (!features.empty())
    {
        for (auto& a : record.accuracies)
        {
            a /= static_cast<double>(features.size());
        }
    }
    return record;
}

std::vector<int> model_filter(
    std::span<const double> accuracies,
    const std::vector<std::vector<int>>& outputs,
    std::span<const int> truth,
    double alpha,
    FilterMode mode)
{
    const auto t = accuracies.size();
    if (outputs.size() != t)
    {
        throw Error(ErrorKind::length_mismatch, "model outputs and accuracies differ in length");
    }
    for (const auto& out : outputs)
    {
        if (out.size() != truth.size())
        {
            throw Error(ErrorKind::length_mismatch, "model outputs and validation truth differ in length");
        }
    }
    std::vector<int> flags(t, 1);
    if (t == 0 || mode == FilterMode::all)
    {
        return flags;
    }

    std::vector<std::size_t> order(t);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return accuracies[a] > accuracies[b]; });

    if (mode == FilterMode::accurate || mode == FilterMode::accurate_and_diverse)
    {
        for (std::size_t i = 0; i < t; ++i)
        {
            if (accuracies[i] < 0.5)
            {
                flags[i] = 0;
            }
        }
    }
    if (mode == FilterMode::diverse || mode == FilterMode::accurate_and_diverse)
    {
        std::size_t classes = 2;
        for (const int label : truth)
        {
            classes = std::max(classes, static_cast<std::size_t>(label) + 1);
        }
        for (const auto& out : outputs)
        {
            for (const int label : out)
            {
                classes = std::max(classes, static_cast<std::size_t>(label) + 1);
            }
        }
        for (std::size_t a = 0; a < t; ++a)
        {
            const auto kept = order[a];
            if (!flags[kept])
            {
                continue;
            }
            for (std::size_t b = a + 1; b < t; ++b)
            {
                const auto other = order[b];
                if (!flags[other])
                {
                    continue;
                }
                const auto table = build_contingency(outputs[kept], outputs[other], truth, classes);
                if (!diversity_verdict(table, alpha).diverse)
                {
                    flags[other] = 0;
                }
            }
        }
    }
    if (std::none_of(flags.begin(), flags.end(), [](int f) { return f != 0; }))
    {
        flags[order.front()] = 1;
    }
    return flags;
}

FlagMatrix filter_models(const ValidationRecord& validation, double alpha, FilterMode mode)
{
    const auto t = validation.combos;
    const auto k = validation.algorithms;
    FlagMatrix flags(t, k);
    std::vector<double> accs(t);
    std::vector<std::vector<int>> outputs(t);
    for (std::size_t j = 0; j < k; ++j)
    {
        for (std::size_t i = 0; i < t; ++i)
        {
            accs[i] = validation.accuracy(i, j);
            outputs[i] = validation.outputs(i, j);
        }
        const auto column = model_filter(accs, outputs, validation.truth[j], alpha, mode);
        for (std::size_t i = 0; i < t; ++i)
        {
            flags.set(i, j, column[i]);
        }
    }
    return flags;
}

std::vector<double> combine_probabilities(std::span<const double> cells, const FlagMatrix& flags)
{
    const auto t = flags.combos();
    const auto k = flags.algorithms();
    if (cells.size() != t * k)
    {
        throw Error(ErrorKind::schema_mismatch, "cell probabilities do not match the flag matrix");
    }
    std::vector<double> out(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
    {
        double sum = 0.0;
        double weight = 0.0;
        for (std::size_t i = 0; i < t; ++i)
        {
            if (flags.at(i, j))
            {
                sum += cells[i * k + j];
                weight += 1.0;
            }
        }
        if (weight == 0.0)
        {
            throw Error(ErrorKind::schema_mismatch, "flag column " + std::to_string(j) + " selects no model");
        }
        out[j] = sum / weight;
    }
    return out;
}

std::vector<double> ensemble_predict(const ModelMatrix& matrix, const FlagMatrix& flags, const MetaFeatureGroupSet& x)
{
    if (flags.combos() != matrix.combos() || flags.algorithms() != matrix.algorithms())
    {
        throw Error(ErrorKind::schema_mismatch, "flag matrix shape differs from the model matrix");
    }
    return combine_probabilities(matrix.probabilities(x), flags);
}

std::vector<double> rank_algorithms(std::span<const double> probabilities)
{
    const auto k = probabilities.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });
    std::vector<double> ranks(k);
    for (std::size_t start = 0; start < k;)
    {
        std::size_t end = start + 1;
        while (end < k && probabilities[order[end]] == probabilities[order[start]])
        {
            ++end;
        }
        const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t p = start; p < end; ++p)
        {
            ranks[order[p]] = rank;
        }
        start = end;
    }
    return ranks;
}

Recommendation recommend(std::span<const double> probabilities, double threshold)
{
    Recommendation rec;
    rec.probabilities.assign(probabilities.begin(), probabilities.end());
    for (const double p : probabilities)
    {
        rec.picks.push_back(p > threshold ? 1 : 0);
    }
    rec.ranks = rank_algorithms(probabilities);
    return rec;
}

void write_recommendation(std::ostream& out, const std::vector<std::string>& algorithms, const Recommendation& rec)
{
    csv::write_row(out, {"algorithm", "probability", "pick", "rank"});
    for (std::size_t j = 0; j < algorithms.size(); ++j)
    {
        csv::write_row(out, {algorithms[j], csv::format_double(rec.probabilities[j]), rec.picks[j] ? "1" : "0",
                             csv::format_double(rec.ranks[j])});
    }
}

HalfSplit split_half(const std::vector<MetaTarget>& targets, std::span<const std::size_t> rows, std::uint64_t seed)
{
    std::map<std::vector<int>, std::vector<std::size_t>> groups;
    for (const auto r : rows)
    {
        groups[targets.at(r).bits].push_back(r);
    }
    Rng rng(seed);
    HalfSplit split;
    bool to_train = true;
    for (auto& [pattern, members] : groups)
    {
        rng.shuffle(std::span<std::size_t>(members));
        for (const auto r : members)
        {
            (to_train ? split.train : split.validation).push_back(r);
            to_train = !to_train;
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

Recommendation Ensemble::recommend(const MetaFeatureGroupSet& x) const
{
    return metarec::recommend(ensemble_predict(matrix, flags, x), config.threshold);
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

} // namespace

Ensemble train_ensemble(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const EnsembleConfig& config)
{
    if (features.size() != targets.targets.size())
    {
        throw Error(ErrorKind::length_mismatch, "meta-features and meta-targets cover different numbers of problems");
    }
    if (features.size() < 4)
    {
        throw Error(ErrorKind::too_few_instances, "training an ensemble needs at least 4 meta-instances");
    }
    std::vector<std::size_t> rows(features.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto split = split_half(targets.targets, rows, derive_seed(config.seed, 0));

    Ensemble ensemble;
    ensemble.config = config;
    ensemble.matrix = ModelMatrix::train(
        pick(features, split.train), pick(targets, split.train), feature_combinations(config.families), config.tree);
    const auto record = validate(ensemble.matrix, pick(features, split.validation), pick(targets, split.validation));
    ensemble.flags = filter_models(record, config.alpha, config.mode);
    return ensemble;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out)
    {
        throw Error(ErrorKind::io_error, "cannot write " + path.string());
    }
}

} // namespace

void save_bundle(const Ensemble& ensemble, const std::filesystem::path& directory)
{
    namespace fs = std::filesystem;
    const auto& matrix = ensemble.matrix;
    const auto target = fs::absolute(directory);
    const auto staging = fs::path(target.string() + ".partial");
    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::create_directories(staging / "models", ec);
    if (ec)
    {
        throw Error(ErrorKind::io_error, "cannot create " + staging.string() + ": " + ec.message());
    }

    nlohmann::ordered_json config;
    config["alpha"] = ensemble.config.alpha;
    config["mode"] = std::string(to_string(ensemble.config.mode));
    config["threshold"] = ensemble.config.threshold;
    config["families"] = ensemble.config.families;
    config["seed"] = ensemble.config.seed;
    config["min_leaf"] = ensemble.config.tree.min_leaf;
    config["max_depth"] = ensemble.config.tree.max_depth ? nlohmann::ordered_json(*ensemble.config.tree.max_depth) : nlohmann::ordered_json();
    config["algorithms"] = matrix.algorithm_names();
    write_text(staging / "config.json", config.dump(2) + "\n");

    std::ostringstream combos;
    csv::write_row(combos, {"id", "members"});
    for (const auto& combo : matrix.combo_list())
    {
        std::string members;
        for (std::size_t m = 0; m < combo.members.size(); ++m)
        {
            members += (m ? ";" : "") + std::to_string(combo.members[m]);
        }
        csv::write_row(combos, {std::to_string(combo.id), members});
    }
    write_text(staging / "combos.csv", combos.str());

    std::ostringstream flags;
    csv::Row header{"combo"};
    header.insert(header.end(), matrix.algorithm_names().begin(), matrix.algorithm_names().end());
    csv::write_row(flags, header);
    for (std::size_t i = 0; i < matrix.combos(); ++i)
    {
        csv::Row row{std::to_string(matrix.combo_list()[i].id)};
        for (std::size_t j = 0; j < matrix.algorithms(); ++j)
        {
            row.push_back(ensemble.flags.at(i, j) ? "1" : "0");
        }
        csv::write_row(flags, row);
    }
    write_text(staging / "flags.csv", flags.str());

    for (std::size_t i = 0; i < matrix.combos(); ++i)
    {
        for (std::size_t j = 0; j < matrix.algorithms(); ++j)
        {
            write_text(staging / "models" / (std::to_string(i + 1) + "_" + std::to_string(j + 1) + ".json"),
                       matrix.model(i, j).to_json() + "\n");
        }
    }

    // swap the finished bundle into place
    const auto previous = fs::path(target.string() + ".previous");
    fs::remove_all(previous, ec);
    if (fs::exists(target))
    {
        fs::rename(target, previous, ec);
        if (ec)
        {
            throw Error(ErrorKind::io_error, "cannot replace " + target.string() + ": " + ec.message());
        }
    }
    fs::rename(staging, target, ec);
    if (ec)
    {
        throw Error(ErrorKind::io_error, "cannot move bundle into " + target.string() + ": " + ec.message());
    }
    fs::remove_all(previous, ec);
}

Ensemble load_bundle(const std::filesystem::path& directory)
{
    Ensemble ensemble;
    std::vector<std::string> algorithms;
    try
    {
        const auto config = nlohmann::json::parse(csv::read_text(directory / "config.json"));
        ensemble.config.alpha = config.at("alpha").get<double>();
        const auto mode = parse_filter_mode(config.at("mode").get<std::string>());
        if (!mode)
        {
            throw Error(ErrorKind::malformed_input, "bundle names an unknown filter mode");
        }
        ensemble.config.mode = *mode;
        ensemble.config.threshold = config.at("threshold").get<double>();
        ensemble.config.families = config.at("families").get<int>();
        ensemble.config.seed = config.at("seed").get<std::uint64_t>();
        ensemble.config.tree.min_leaf = config.at("min_leaf").get<std::size_t>();
        if (!config.at("max_depth").is_null())
        {
            ensemble.config.tree.max_depth = config.at("max_depth").get<std::size_t>();
        }
        algorithms = config.at("algorithms").get<std::vector<std::string>>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorKind::malformed_input, std::string("bundle config: ") + e.what());
    }

    std::vector<FamilyCombo> combos;
    const auto combo_rows = csv::read_file(directory / "combos.csv");
    for (std::size_t r = 1; r < combo_rows.size(); ++r)
    {
        const auto& row = combo_rows[r];
        if (row.size() != 2)
        {
            throw Error(ErrorKind::malformed_input, "combos.csv row " + std::to_string(r + 1) + " is ragged");
        }
        FamilyCombo combo;
        combo.id = std::stoi(row[0]);
        std::stringstream members(row[1]);
        for (std::string member; std::getline(members, member, ';');)
        {
            combo.members.push_back(std::stoi(member));
        }
        combos.push_back(std::move(combo));
    }

    const auto t = combos.size();
    const auto k = algorithms.size();
    const auto flag_rows = csv::read_file(directory / "flags.csv");
    if (flag_rows.size() != t + 1)
    {
        throw Error(ErrorKind::malformed_input, "flags.csv does not have one row per combo");
    }
    ensemble.flags = FlagMatrix(t, k, 0);
    for (std::size_t i = 0; i < t; ++i)
    {
        const auto& row = flag_rows[i + 1];
        if (row.size() != k + 1)
        {
            throw Error(ErrorKind::malformed_input, "flags.csv row " + std::to_string(i + 2) + " is ragged");
        }
        for (std::size_t j = 0; j < k; ++j)
        {
            ensemble.flags.set(i, j, row[j + 1] == "1" ? 1 : 0);
        }
    }

    std::vector<DecisionTree> models;
    for (std::size_t i = 0; i < t; ++i)
    {
        for (std::size_t j = 0; j < k; ++j)
        {
            models.push_back(DecisionTree::from_json(
                csv::read_text(directory / "models" / (std::to_string(i + 1) + "_" + std::to_string(j + 1) + ".json"))));
        }
    }
    ensemble.matrix = ModelMatrix(std::move(combos), std::move(algorithms), std::move(models));
    return ensemble;
}

} // namespace metarec
