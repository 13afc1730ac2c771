#include <metarec/error.hpp>
#include <metarec/learners.hpp>
#include <metarec/random.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace metarec {

int Classifier::predict(std::span<const double> row) const
{
    const auto proba = predict_proba(row);
    return static_cast<int>(std::max_element(proba.begin(), proba.end()) - proba.begin());
}

namespace {

constexpr double min_gain = 1e-12;

double entropy(std::span<const double> counts, double total)
{
    if (total <= 0.0)
    {
        return 0.0;
    }
    double h = 0.0;
    for (const double c : counts)
    {
        if (c > 0.0)
        {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

double split_term(double count, double total)
{
    if (count <= 0.0)
    {
        return 0.0;
    }
    const double p = count / total;
    return -p * std::log2(p);
}

std::vector<double> laplace(std::span<const double> counts)
{
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const double k = static_cast<double>(counts.size());
    std::vector<double> out(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
    {
        out[c] = (counts[c] + 1.0) / (total + k);
    }
    return out;
}

enum class Criterion
{
    gain_ratio,
    gain,
};

struct SplitChoice
{
    int attribute = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double gain_ratio = 0.0;

    bool valid() const { return attribute >= 0; }
};

struct Scorer
{
    Criterion criterion;
    SplitChoice best;

    double score(const SplitChoice& s) const { return criterion == Criterion::gain ? s.gain : s.gain_ratio; }

    void offer(const SplitChoice& candidate)
    {
        if (candidate.gain <= min_gain)
        {
            return;
        }
        if (!best.valid() || score(candidate) > score(best))
        {
            best = candidate;
        }
    }
};

} // namespace

class TreeBuilder
{
public:
    TreeBuilder(const TabularDataset& dataset, const TreeParams& params, DecisionTree& tree) :
        m_data(dataset),
        m_params(params),
        m_tree(tree),
        m_classes(dataset.num_classes()),
        m_xlogx(dataset.num_instances() + 1, 0.0)
    {
        for (std::size_t c = 2; c < m_xlogx.size(); ++c)
        {
            m_xlogx[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
        }
        tree.m_params = params;
        tree.m_schema = dataset.attributes();
        tree.m_classes = dataset.target().categories;
        tree.m_nodes.clear();
    }

    void grow(std::vector<std::size_t> rows) { build(std::move(rows), 0, {}); }

    void stump(std::vector<std::size_t> rows, std::size_t attribute)
    {
        Scorer scorer{Criterion::gain, {}};
        if (attribute < m_data.num_attributes())
        {
            evaluate(rows, attribute, 1, scorer);
        }
        const auto counts = class_counts(rows);
        const int node = add_node(laplace(counts), rows.size());
        if (scorer.best.valid())
        {
            split(node, scorer.best, rows, [&](std::vector<std::size_t> child, int, std::span<const double> parent)
            {
                return leaf_for(child, parent);
            });
        }
    }

    SplitChoice best_split(std::span<const std::size_t> rows, std::size_t min_leaf, Criterion criterion) const
    {
        Scorer scorer{criterion, {}};
        for (std::size_t a = 0; a < m_data.num_attributes(); ++a)
        {
            evaluate(rows, a, min_leaf, scorer);
        }
        return scorer.best;
    }

    void evaluate(std::span<const std::size_t> rows, std::size_t attribute, std::size_t min_leaf, Scorer& scorer) const
    {
        if (m_data.attribute(attribute).nominal())
        {
            evaluate_nominal(rows, attribute, min_leaf, scorer);
        }
        else
        {
            evaluate_numeric(rows, attribute, min_leaf, scorer);
        }
    }

private:
    std::vector<double> class_counts(std::span<const std::size_t> rows) const
    {
        std::vector<double> counts(m_classes, 0.0);
        for (const auto r : rows)
        {
            counts[static_cast<std::size_t>(m_data.label(r))] += 1.0;
        }
        return counts;
    }

    int add_node(std::vector<double> distribution, std::size_t count)
    {
        DecisionTree::Node node;
        node.distribution = std::move(distribution);
        node.count = count;
        m_tree.m_nodes.push_back(std::move(node));
        return static_cast<int>(m_tree.m_nodes.size() - 1);
    }

    int leaf_for(std::span<const std::size_t> rows, std::span<const double> parent)
    {
        if (rows.empty())
        {
            return add_node(std::vector<double>(parent.begin(), parent.end()), 0);
        }
        return add_node(laplace(class_counts(rows)), rows.size());
    }

    template <typename MakeChild>
    void split(int node, const SplitChoice& choice, std::span<const std::size_t> rows, MakeChild&& make_child)
    {
        const auto attribute = static_cast<std::size_t>(choice.attribute);
        const bool nominal = m_data.attribute(attribute).nominal();
        const std::size_t branches = nominal ? m_data.attribute(attribute).categories.size() : 2;

        std::vector<std::vector<std::size_t>> parts(branches);
        std::vector<std::size_t> unknown;
        for (const auto r : rows)
        {
            const double v = m_data.value(r, attribute);
            if (is_missing(v))
            {
                unknown.push_back(r);
            }
            else if (nominal)
            {
                parts[static_cast<std::size_t>(v)].push_back(r);
            }
            else
            {
                parts[v <= choice.threshold ? 0 : 1].push_back(r);
            }
        }
        std::size_t heaviest = 0;
        for (std::size_t b = 1; b < branches; ++b)
        {
            if (parts[b].size() > parts[heaviest].size())
            {
                heaviest = b;
            }
        }
        parts[heaviest].insert(parts[heaviest].end(), unknown.begin(), unknown.end());
        std::sort(parts[heaviest].begin(), parts[heaviest].end());

        {
            auto& n = m_tree.m_nodes[static_cast<std::size_t>(node)];
            n.attribute = choice.attribute;
            n.threshold = choice.threshold;
            n.gain_ratio = choice.gain_ratio;
            n.heaviest_child = static_cast<int>(heaviest);
        }
        const auto parent = m_tree.m_nodes[static_cast<std::size_t>(node)].distribution;
        std::vector<int> children;
        for (std::size_t b = 0; b < branches; ++b)
        {
            children.push_back(make_child(std::move(parts[b]), static_cast<int>(b), parent));
        }
        m_tree.m_nodes[static_cast<std::size_t>(node)].children = std::move(children);
    }

    int build(std::vector<std::size_t> rows, std::size_t depth, std::span<const double> parent)
    {
        if (rows.empty())
        {
            return leaf_for(rows, parent);
        }
        const auto counts = class_counts(rows);
        const int node = add_node(laplace(counts), rows.size());

        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        const bool too_small = rows.size() < 2 * m_params.min_leaf;
        const bool too_deep = m_params.max_depth && depth >= *m_params.max_depth;
        if (pure || too_small || too_deep)
        {
            return node;
        }

        const auto choice = best_split(rows, m_params.min_leaf, Criterion::gain_ratio);
        if (!choice.valid())
        {
            return node;
        }
        split(node, choice, rows, [&](std::vector<std::size_t> child, int, std::span<const double> parent_dist)
        {
            return build(std::move(child), depth + 1, parent_dist);
        });
        return node;
    }

    void evaluate_numeric(std::span<const std::size_t> rows, std::size_t attribute, std::size_t min_leaf, Scorer& scorer) const
    {
        std::vector<std::pair<double, int>> known;
        known.reserve(rows.size());
        for (const auto r : rows)
        {
            const double v = m_data.value(r, attribute);
            if (!is_missing(v))
            {
                known.emplace_back(v, m_data.label(r));
            }
        }
        if (known.size() < 2)
        {
            return;
        }
        std::sort(known.begin(), known.end());

        // entropies from integer counts: H = (xlogx(total) - sum xlogx(c)) / total
        const auto xlogx = [&](std::size_t c) { return m_xlogx[c]; };
        const double n = static_cast<double>(rows.size());
        const double n_known = static_cast<double>(known.size());
        const double n_unknown = n - n_known;
        const double log_n = std::log2(n);
        std::vector<std::size_t> left(m_classes, 0), right(m_classes, 0);
        for (const auto& [v, label] : known)
        {
            ++right[static_cast<std::size_t>(label)];
        }
        double right_sum = 0.0;
        for (const auto c : right)
        {
            right_sum += xlogx(c);
        }
        const double base = (xlogx(known.size()) - right_sum) / n_known;
        double left_sum = 0.0;
        const double unknown_term = n_unknown > 0.0 ? -(n_unknown / n) * std::log2(n_unknown / n) : 0.0;

        for (std::size_t i = 0; i + 1 < known.size(); ++i)
        {
            const auto label = static_cast<std::size_t>(known[i].second);
            left_sum += xlogx(left[label] + 1) - xlogx(left[label]);
            right_sum += xlogx(right[label] - 1) - xlogx(right[label]);
            ++left[label];
            --right[label];
            if (!(known[i].first < known[i + 1].first))
            {
                continue;
            }
            const std::size_t size_left = i + 1;
            const std::size_t size_right = known.size() - size_left;
            if (size_left < min_leaf || size_right < min_leaf)
            {
                continue;
            }
            const double conditional = (xlogx(size_left) - left_sum + xlogx(size_right) - right_sum) / n_known;
            SplitChoice candidate;
            candidate.attribute = static_cast<int>(attribute);
            candidate.threshold = 0.5 * (known[i].first + known[i + 1].first);
            if (!(candidate.threshold < known[i + 1].first))
            {
                candidate.threshold = known[i].first;
            }
            candidate.gain = (n_known / n) * (base - conditional);
            const double n_left = static_cast<double>(size_left);
            const double n_right = static_cast<double>(size_right);
            const double info = (n_left * log_n - xlogx(size_left)) / n + (n_right * log_n - xlogx(size_right)) / n + unknown_term;
            if (info <= min_gain)
            {
                continue;
            }
            candidate.gain_ratio = candidate.gain / info;
            scorer.offer(candidate);
        }
    }

    void evaluate_nominal(std::span<const std::size_t> rows, std::size_t attribute, std::size_t min_leaf, Scorer& scorer) const
    {
        const auto branches = m_data.attribute(attribute).categories.size();
        std::vector<std::vector<double>> counts(branches, std::vector<double>(m_classes, 0.0));
        std::vector<double> sizes(branches, 0.0);
        std::vector<double> known_counts(m_classes, 0.0);
        double n_known = 0.0;
        for (const auto r : rows)
        {
            const double v = m_data.value(r, attribute);
            if (is_missing(v))
            {
                continue;
            }
            const auto b = static_cast<std::size_t>(v);
            const auto label = static_cast<std::size_t>(m_data.label(r));
            counts[b][label] += 1.0;
            sizes[b] += 1.0;
            known_counts[label] += 1.0;
            n_known += 1.0;
        }
        const auto populated = std::count_if(sizes.begin(), sizes.end(),
            [&](double s) { return s >= static_cast<double>(min_leaf); });
        if (populated < 2 || n_known <= 0.0)
        {
            return;
        }
        const double n = static_cast<double>(rows.size());
        double conditional = 0.0;
        double info = split_term(n - n_known, n);
        for (std::size_t b = 0; b < branches; ++b)
        {
            conditional += (sizes[b] / n_known) * entropy(counts[b], sizes[b]);
            info += split_term(sizes[b], n);
        }
        if (info <= min_gain)
        {
            return;
        }
        SplitChoice candidate;
        candidate.attribute = static_cast<int>(attribute);
        candidate.gain = (n_known / n) * (entropy(known_counts, n_known) - conditional);
        candidate.gain_ratio = candidate.gain / info;
        scorer.offer(candidate);
    }

    const TabularDataset& m_data;
    TreeParams m_params;
    DecisionTree& m_tree;
    std::size_t m_classes;
    std::vector<double> m_xlogx;
};

namespace {

std::vector<std::size_t> all_rows(const TabularDataset& dataset)
{
    std::vector<std::size_t> rows(dataset.num_instances());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

void require_non_empty(const TabularDataset& dataset)
{
    if (dataset.num_instances() == 0)
    {
        throw Error(ErrorKind::empty_dataset, "cannot train on an empty dataset '" + dataset.name() + "'");
    }
}

} // namespace

DecisionTree DecisionTree::train(const TabularDataset& dataset, const TreeParams& params)
{
    require_non_empty(dataset);
    if (params.min_leaf < 1)
    {
        throw Error(ErrorKind::domain_error, "min_leaf must be at least 1");
    }
    DecisionTree tree;
    TreeBuilder builder(dataset, params, tree);
    builder.grow(all_rows(dataset));
    return tree;
}

DecisionTree DecisionTree::train_stump(const TabularDataset& dataset, std::size_t attribute)
{
    require_non_empty(dataset);
    DecisionTree tree;
    TreeBuilder builder(dataset, TreeParams{1, 1}, tree);
    builder.stump(all_rows(dataset), attribute);
    return tree;
}

std::size_t DecisionTree::leaf_index(std::span<const double> row) const
{
    if (row.size() != m_schema.size())
    {
        throw Error(ErrorKind::schema_mismatch,
            "instance has " + std::to_string(row.size()) + " values, tree expects " + std::to_string(m_schema.size()));
    }
    std::size_t index = 0;
    while (!m_nodes[index].leaf())
    {
        const auto& node = m_nodes[index];
        const auto attribute = static_cast<std::size_t>(node.attribute);
        const double v = row[attribute];
        int child = node.heaviest_child;
        if (!is_missing(v))
        {
            if (m_schema[attribute].nominal())
            {
                if (v < 0.0 || v >= static_cast<double>(node.children.size()))
                {
                    throw Error(ErrorKind::schema_mismatch, "category index out of range for '" + m_schema[attribute].name + "'");
                }
                child = static_cast<int>(v);
            }
            else
            {
                child = v <= node.threshold ? 0 : 1;
            }
        }
        index = static_cast<std::size_t>(node.children[static_cast<std::size_t>(child)]);
    }
    return index;
}

std::vector<double> DecisionTree::predict_proba(std::span<const double> row) const
{
    return m_nodes[leaf_index(row)].distribution;
}

std::string DecisionTree::to_json() const
{
    using nlohmann::json;
    json doc;
    doc["classes"] = m_classes;
    doc["params"] = {
        {"min_leaf", m_params.min_leaf},
        {"max_depth", m_params.max_depth ? json(*m_params.max_depth) : json(nullptr)},
    };
    json schema = json::array();
    for (const auto& attribute : m_schema)
    {
        json a = {{"name", attribute.name}, {"kind", attribute.nominal() ? "nominal" : "numeric"}};
        if (attribute.nominal())
        {
            a["categories"] = attribute.categories;
        }
        schema.push_back(std::move(a));
    }
    doc["attributes"] = std::move(schema);
    json nodes = json::array();
    for (const auto& node : m_nodes)
    {
        json n;
        if (node.leaf())
        {
            n["kind"] = "leaf";
        }
        else
        {
            n["kind"] = m_schema[static_cast<std::size_t>(node.attribute)].nominal() ? "nominal" : "numeric";
            n["attribute"] = node.attribute;
            if (!m_schema[static_cast<std::size_t>(node.attribute)].nominal())
            {
                n["threshold"] = node.threshold;
            }
            n["children"] = node.children;
            n["heaviest"] = node.heaviest_child;
            n["gain_ratio"] = node.gain_ratio;
        }
        n["count"] = node.count;
        n["distribution"] = node.distribution;
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump();
}

DecisionTree DecisionTree::from_json(const std::string& text)
{
    using nlohmann::json;
    DecisionTree tree;
    try
    {
        const auto doc = json::parse(text);
        tree.m_classes = doc.at("classes").get<std::vector<std::string>>();
        tree.m_params.min_leaf = doc.at("params").at("min_leaf").get<std::size_t>();
        const auto& depth = doc.at("params").at("max_depth");
        if (!depth.is_null())
        {
            tree.m_params.max_depth = depth.get<std::size_t>();
        }
        for (const auto& a : doc.at("attributes"))
        {
            if (a.at("kind") == "nominal")
            {
                tree.m_schema.push_back(Attribute::make_nominal(a.at("name"), a.at("categories").get<std::vector<std::string>>()));
            }
            else
            {
                tree.m_schema.push_back(Attribute::make_numeric(a.at("name")));
            }
        }
        for (const auto& n : doc.at("nodes"))
        {
            Node node;
            node.count = n.at("count").get<std::size_t>();
            node.distribution = n.at("distribution").get<std::vector<double>>();
            if (n.at("kind") != "leaf")
            {
                node.attribute = n.at("attribute").get<int>();
                node.threshold = n.value("threshold", 0.0);
                node.children = n.at("children").get<std::vector<int>>();
                node.heaviest_child = n.at("heaviest").get<int>();
                node.gain_ratio = n.value("gain_ratio", 0.0);
            }
            tree.m_nodes.push_back(std::move(node));
        }
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorKind::malformed_input, std::string("tree JSON: ") + e.what());
    }

    const auto count = static_cast<int>(tree.m_nodes.size());
    if (count == 0)
    {
        throw Error(ErrorKind::malformed_input, "tree JSON has no nodes");
    }
    for (const auto& node : tree.m_nodes)
    {
        if (node.distribution.size() != tree.m_classes.size())
        {
            throw Error(ErrorKind::malformed_input, "tree JSON distribution width mismatch");
        }
        if (node.leaf())
        {
            continue;
        }
        if (node.attribute >= static_cast<int>(tree.m_schema.size()) || node.children.size() < 2 ||
            node.heaviest_child < 0 || node.heaviest_child >= static_cast<int>(node.children.size()))
        {
            throw Error(ErrorKind::malformed_input, "tree JSON has an invalid internal node");
        }
        for (const int child : node.children)
        {
            if (child <= 0 || child >= count)
            {
                throw Error(ErrorKind::malformed_input, "tree JSON child index out of range");
            }
        }
    }
    return tree;
}

DecisionTree train_tree(const TabularDataset& dataset, const TreeParams& params)
{
    return DecisionTree::train(dataset, params);
}

std::vector<double> predict_proba(const DecisionTree& tree, std::span<const double> row)
{
    return tree.predict_proba(row);
}

double information_gain(const TabularDataset& dataset, std::size_t attribute)
{
    DecisionTree scratch;
    TreeBuilder builder(dataset, TreeParams{1, 1}, scratch);
    Scorer scorer{Criterion::gain, {}};
    const auto rows = all_rows(dataset);
    builder.evaluate(rows, attribute, 1, scorer);
    return scorer.best.valid() ? scorer.best.gain : 0.0;
}

MixedDistance::MixedDistance(const TabularDataset& dataset) :
    MixedDistance(dataset, [&]
    {
        std::vector<std::size_t> all(dataset.num_attributes());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }())
{
}

MixedDistance::MixedDistance(const TabularDataset& dataset, std::vector<std::size_t> attributes) :
    m_attributes(std::move(attributes))
{
    for (const auto a : m_attributes)
    {
        const bool nominal = dataset.attribute(a).nominal();
        m_nominal.push_back(nominal);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        if (!nominal)
        {
            for (std::size_t r = 0; r < dataset.num_instances(); ++r)
            {
                const double v = dataset.value(r, a);
                if (!is_missing(v))
                {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        const bool spread = std::isfinite(lo) && hi > lo;
        m_min.push_back(std::isfinite(lo) ? lo : 0.0);
        m_range.push_back(spread ? hi - lo : 1.0);
    }
}

double MixedDistance::operator()(std::span<const double> a, std::span<const double> b) const
{
    double total = 0.0;
    for (std::size_t i = 0; i < m_attributes.size(); ++i)
    {
        const auto attribute = m_attributes[i];
        const double x = a[attribute];
        const double y = b[attribute];
        double d;
        if (is_missing(x) || is_missing(y))
        {
            d = 1.0;
        }
        else if (m_nominal[i])
        {
            d = x == y ? 0.0 : 1.0;
        }
        else
        {
            d = std::abs(x - y) / m_range[i];
        }
        total += d * d;
    }
    return std::sqrt(total);
}

NaiveBayes NaiveBayes::train(const TabularDataset& dataset)
{
    require_non_empty(dataset);
    NaiveBayes nb;
    const auto k = dataset.num_classes();
    const auto n = static_cast<double>(dataset.num_instances());
    const auto counts = dataset.class_counts();
    for (std::size_t c = 0; c < k; ++c)
    {
        nb.m_log_prior.push_back(std::log((static_cast<double>(counts[c]) + 1.0) / (n + static_cast<double>(k))));
    }

    nb.m_gaussian.resize(dataset.num_attributes());
    nb.m_log_frequency.resize(dataset.num_attributes());
    for (std::size_t a = 0; a < dataset.num_attributes(); ++a)
    {
        const auto& attribute = dataset.attribute(a);
        nb.m_nominal.push_back(attribute.nominal());
        if (attribute.nominal())
        {
            const auto categories = attribute.categories.size();
            std::vector<std::vector<double>> freq(k, std::vector<double>(categories, 0.0));
            std::vector<double> totals(k, 0.0);
            for (std::size_t r = 0; r < dataset.num_instances(); ++r)
            {
                const double v = dataset.value(r, a);
                if (!is_missing(v))
                {
                    const auto c = static_cast<std::size_t>(dataset.label(r));
                    freq[c][static_cast<std::size_t>(v)] += 1.0;
                    totals[c] += 1.0;
                }
            }
            for (std::size_t c = 0; c < k; ++c)
            {
                for (auto& f : freq[c])
                {
                    f = std::log((f + 1.0) / (totals[c] + static_cast<double>(categories)));
                }
            }
            nb.m_log_frequency[a] = std::move(freq);
        }
        else
        {
            std::vector<double> sum(k, 0.0), sum_sq(k, 0.0), cnt(k, 0.0);
            double all_sum = 0.0, all_sq = 0.0, all_cnt = 0.0;
            for (std::size_t r = 0; r < dataset.num_instances(); ++r)
            {
                const double v = dataset.value(r, a);
                if (!is_missing(v))
                {
                    const auto c = static_cast<std::size_t>(dataset.label(r));
                    sum[c] += v;
                    sum_sq[c] += v * v;
                    cnt[c] += 1.0;
                    all_sum += v;
                    all_sq += v * v;
                    all_cnt += 1.0;
                }
            }
            const double all_mean = all_cnt > 0.0 ? all_sum / all_cnt : 0.0;
            const double all_var = all_cnt > 1.0 ? std::max(0.0, all_sq / all_cnt - all_mean * all_mean) : 1.0;
            const double floor = 1e-6 * std::max(1.0, all_var);
            std::vector<std::pair<double, double>> params(k);
            for (std::size_t c = 0; c < k; ++c)
            {
                if (cnt[c] > 0.0)
                {
                    const double mean = sum[c] / cnt[c];
                    const double var = cnt[c] > 1.0 ? std::max(0.0, sum_sq[c] / cnt[c] - mean * mean) : all_var;
                    params[c] = {mean, std::max(var, floor)};
                }
                else
                {
                    params[c] = {all_mean, std::max(all_var, floor)};
                }
            }
            nb.m_gaussian[a] = std::move(params);
        }
    }
    return nb;
}

std::vector<double> NaiveBayes::predict_proba(std::span<const double> row) const
{
    if (row.size() != m_nominal.size())
    {
        throw Error(ErrorKind::schema_mismatch, "instance width does not match naive Bayes schema");
    }
    std::vector<double> log_post = m_log_prior;
    for (std::size_t a = 0; a < row.size(); ++a)
    {
        const double v = row[a];
        if (is_missing(v))
        {
            continue;
        }
        for (std::size_t c = 0; c < log_post.size(); ++c)
        {
            if (m_nominal[a])
            {
                const auto& freq = m_log_frequency[a][c];
                const auto index = static_cast<std::size_t>(v);
                if (index >= freq.size())
                {
                    throw Error(ErrorKind::schema_mismatch, "category index out of range");
                }
                log_post[c] += freq[index];
            }
            else
            {
                const auto [mean, var] = m_gaussian[a][c];
                const double z = v - mean;
                log_post[c] += -0.5 * std::log(2.0 * std::numbers::pi * var) - z * z / (2.0 * var);
            }
        }
    }
    const double top = *std::max_element(log_post.begin(), log_post.end());
    double total = 0.0;
    for (auto& p : log_post)
    {
        p = std::exp(p - top);
        total += p;
    }
    for (auto& p : log_post)
    {
        p /= total;
    }
    return log_post;
}

NearestNeighbor NearestNeighbor::train(const TabularDataset& dataset)
{
    std::vector<std::size_t> all(dataset.num_attributes());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return train(dataset, std::move(all));
}

NearestNeighbor NearestNeighbor::train(const TabularDataset& dataset, std::vector<std::size_t> attributes)
{
    require_non_empty(dataset);
    NearestNeighbor nn;
    nn.m_distance = MixedDistance(dataset, std::move(attributes));
    nn.m_train = dataset;
    nn.m_num_classes = dataset.num_classes();
    return nn;
}

std::size_t NearestNeighbor::nearest(std::span<const double> row) const
{
    if (row.size() != m_train.num_attributes())
    {
        throw Error(ErrorKind::schema_mismatch, "instance width does not match 1-NN schema");
    }
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m_train.num_instances(); ++r)
    {
        const double d = m_distance(row, m_train.row(r));
        if (d < best_distance)
        {
            best_distance = d;
            best = r;
        }
    }
    return best;
}

std::vector<double> NearestNeighbor::predict_proba(std::span<const double> row) const
{
    std::vector<double> out(m_num_classes, 0.0);
    out[static_cast<std::size_t>(m_train.label(nearest(row)))] = 1.0;
    return out;
}

MajorityClass MajorityClass::train(const TabularDataset& dataset)
{
    require_non_empty(dataset);
    MajorityClass m;
    const auto counts = dataset.class_counts();
    std::vector<double> as_double(counts.begin(), counts.end());
    m.m_prior = laplace(as_double);
    return m;
}

std::vector<double> MajorityClass::predict_proba(std::span<const double>) const
{
    return m_prior;
}

std::string_view to_string(LandmarkerKind kind)
{
    switch (kind)
    {
    case LandmarkerKind::naive_bayes: return "NaiveBayes";
    case LandmarkerKind::one_nn: return "1NN";
    case LandmarkerKind::elite_one_nn: return "Elite1NN";
    case LandmarkerKind::decision_node: return "DecisionNode";
    case LandmarkerKind::random_node: return "RandomNode";
    case LandmarkerKind::worst_node: return "WorstNode";
    }
    return "unknown";
}

namespace {

// Attribute with the highest (or lowest) information gain, lowest index on ties.
std::optional<std::size_t> extreme_gain_attribute(const TabularDataset& dataset, bool highest)
{
    std::optional<std::size_t> best;
    double best_gain = 0.0;
    for (std::size_t a = 0; a < dataset.num_attributes(); ++a)
    {
        const double gain = information_gain(dataset, a);
        if (!best || (highest ? gain > best_gain : gain < best_gain))
        {
            best = a;
            best_gain = gain;
        }
    }
    return best;
}

} // namespace

LandmarkModel train_landmarker(const TabularDataset& dataset, LandmarkerKind kind, std::uint64_t seed)
{
    require_non_empty(dataset);
    LandmarkModel out;
    out.kind = kind;
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    switch (kind)
    {
    case LandmarkerKind::naive_bayes:
        out.model = std::make_shared<NaiveBayes>(NaiveBayes::train(dataset));
        break;
    case LandmarkerKind::one_nn:
        out.model = std::make_shared<NearestNeighbor>(NearestNeighbor::train(dataset));
        break;
    case LandmarkerKind::elite_one_nn:
    {
        out.attribute = extreme_gain_attribute(dataset, true);
        std::vector<std::size_t> attributes;
        if (out.attribute)
        {
            attributes.push_back(*out.attribute);
        }
        out.model = std::make_shared<NearestNeighbor>(NearestNeighbor::train(dataset, std::move(attributes)));
        break;
    }
    case LandmarkerKind::decision_node:
    case LandmarkerKind::worst_node:
        out.attribute = extreme_gain_attribute(dataset, kind == LandmarkerKind::decision_node);
        out.model = std::make_shared<DecisionTree>(DecisionTree::train_stump(dataset, out.attribute.value_or(none)));
        break;
    case LandmarkerKind::random_node:
        if (dataset.num_attributes() > 0)
        {
            Rng rng(seed);
            out.attribute = rng.index(dataset.num_attributes());
        }
        out.model = std::make_shared<DecisionTree>(DecisionTree::train_stump(dataset, out.attribute.value_or(none)));
        break;
    }
    return out;
}

std::unique_ptr<Classifier> train_learner(const LearnerSpec& spec, const TabularDataset& dataset)
{
    switch (spec.kind)
    {
    case LearnerKind::tree:
        return std::make_unique<DecisionTree>(DecisionTree::train(dataset, spec.tree));
    case LearnerKind::stump:
    {
        require_non_empty(dataset);
        const auto attribute = extreme_gain_attribute(dataset, true);
        return std::make_unique<DecisionTree>(
            DecisionTree::train_stump(dataset, attribute.value_or(std::numeric_limits<std::size_t>::max())));
    }
    case LearnerKind::naive_bayes:
        return std::make_unique<NaiveBayes>(NaiveBayes::train(dataset));
    case LearnerKind::one_nn:
        return std::make_unique<NearestNeighbor>(NearestNeighbor::train(dataset));
    case LearnerKind::majority:
        return std::make_unique<MajorityClass>(MajorityClass::train(dataset));
    }
    throw Error(ErrorKind::domain_error, "unknown learner kind");
}

std::vector<LearnerSpec> demo_candidates()
{
    return {
        {"GainRatioTree", LearnerKind::tree, TreeParams{2, std::nullopt}},
        {"DecisionStump", LearnerKind::stump, {}},
        {"NaiveBayes", LearnerKind::naive_bayes, {}},
        {"1NN", LearnerKind::one_nn, {}},
        {"Majority", LearnerKind::majority, {}},
    };
}

double accuracy(const Classifier& model, const TabularDataset& test)
{
    if (test.num_instances() == 0)
    {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < test.num_instances(); ++r)
    {
        if (model.predict(test.row(r)) == test.label(r))
        {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(test.num_instances());
}

} // namespace metarec
