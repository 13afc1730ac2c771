#include <metarec/error.hpp>
#include <metarec/random.hpp>
#include <metarec/synthetic.hpp>

#include <algorithm>
#include <cmath>

namespace metarec {

std::string_view to_string(Concept concept_kind)
{
    switch (concept_kind)
    {
    case Concept::gaussian: return "gaussian";
    case Concept::rules: return "rules";
    case Concept::categorical: return "categorical";
    case Concept::checkerboard: return "checkerboard";
    case Concept::noise: return "noise";
    }
    return "unknown";
}

SyntheticSpec random_spec(std::uint64_t seed)
{
    Rng rng(seed);
    SyntheticSpec spec;
    constexpr Concept concepts[] = {
        Concept::gaussian, Concept::rules, Concept::categorical, Concept::checkerboard, Concept::noise,
    };
    spec.concept_kind = concepts[rng.index(std::size(concepts))];
    spec.instances = 60 + rng.index(181);
    spec.classes = 2 + rng.index(3);
    spec.numeric = 1 + rng.index(8);
    spec.nominal = rng.index(5);
    if (spec.concept_kind == Concept::categorical)
    {
        spec.nominal = std::max<std::size_t>(spec.nominal, 2);
    }
    if (spec.concept_kind == Concept::checkerboard)
    {
        spec.numeric = std::max<std::size_t>(spec.numeric, 2);
    }
    spec.label_noise = rng.uniform(0.0, 0.3);
    spec.missing_rate = rng.bernoulli(0.3) ? rng.uniform(0.0, 0.05) : 0.0;
    spec.separation = rng.uniform(0.3, 3.0);
    return spec;
}

TabularDataset synthetic_problem(const SyntheticSpec& spec, std::uint64_t seed, std::string name)
{
    if (spec.instances < 2 || spec.classes < 2 || spec.numeric + spec.nominal == 0)
    {
        throw Error(ErrorKind::domain_error, "synthetic problem needs instances, classes and attributes");
    }
    Rng rng(seed);
    const auto n = spec.instances;
    const auto k = spec.classes;
    const auto p = spec.numeric;
    const auto q = spec.nominal;
    const auto width = p + q;

    std::vector<Attribute> attributes;
    for (std::size_t a = 0; a < p; ++a)
    {
        attributes.push_back(Attribute::make_numeric("x" + std::to_string(a + 1)));
    }
    std::vector<std::size_t> arity(q);
    for (std::size_t a = 0; a < q; ++a)
    {
        arity[a] = 2 + rng.index(4);
        std::vector<std::string> categories;
        for (std::size_t c = 0; c < arity[a]; ++c)
        {
            categories.push_back("v" + std::to_string(c));
        }
        attributes.push_back(Attribute::make_nominal("c" + std::to_string(a + 1), std::move(categories)));
    }
    std::vector<std::string> classes;
    for (std::size_t c = 0; c < k; ++c)
    {
        classes.push_back("class" + std::to_string(c));
    }

    // class prior, mildly skewed
    std::vector<double> prior(k);
    for (auto& w : prior)
    {
        w = 0.5 + rng.uniform();
    }
    const auto draw_class = [&]
    {
        double total = 0.0;
        for (const double w : prior)
        {
            total += w;
        }
        double u = rng.uniform() * total;
        for (std::size_t c = 0; c < k; ++c)
        {
            u -= prior[c];
            if (u < 0.0)
            {
                return static_cast<int>(c);
            }
        }
        return static_cast<int>(k - 1);
    };

    // concept parameters
    std::vector<std::vector<double>> centroids(k, std::vector<double>(p));
    for (auto& centroid : centroids)
    {
        for (auto& v : centroid)
        {
            v = rng.normal(0.0, spec.separation);
        }
    }
    std::vector<std::vector<std::vector<double>>> category_weights(q, std::vector<std::vector<double>>(k));
    for (std::size_t a = 0; a < q; ++a)
    {
        for (std::size_t c = 0; c < k; ++c)
        {
            for (std::size_t v = 0; v < arity[a]; ++v)
            {
                category_weights[a][c].push_back(std::exp(rng.normal(0.0, spec.separation)));
            }
        }
    }
    struct Rule
    {
        std::size_t attribute;
        double threshold;
    };
    std::vector<Rule> rules;
    for (std::size_t r = 0; r < 3; ++r)
    {
        rules.push_back({rng.index(std::max<std::size_t>(p, 1)), rng.uniform(0.25, 0.75)});
    }
    std::vector<int> rule_leaf(8);
    for (auto& leaf : rule_leaf)
    {
        leaf = static_cast<int>(rng.index(k));
    }
    const std::size_t cells_per_axis = 2 + rng.index(2);

    const auto draw_category = [&](std::size_t a, const std::vector<double>& weights)
    {
        double total = 0.0;
        for (const double w : weights)
        {
            total += w;
        }
        double u = rng.uniform() * total;
        for (std::size_t v = 0; v < arity[a]; ++v)
        {
            u -= weights[v];
            if (u < 0.0)
            {
                return static_cast<double>(v);
            }
        }
        return static_cast<double>(arity[a] - 1);
    };
    const std::vector<double> flat_weights(6, 1.0);

    std::vector<double> cells(n * width);
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r)
    {
        auto* row = cells.data() + r * width;
        int label = 0;
        switch (spec.concept_kind)
        {
        case Concept::gaussian:
            label = draw_class();
            for (std::size_t a = 0; a < p; ++a)
            {
                row[a] = centroids[static_cast<std::size_t>(label)][a] + rng.normal();
            }
            for (std::size_t a = 0; a < q; ++a)
            {
                row[p + a] = draw_category(a, flat_weights);
            }
            break;
        case Concept::categorical:
            label = draw_class();
            for (std::size_t a = 0; a < p; ++a)
            {
                row[a] = rng.normal();
            }
            for (std::size_t a = 0; a < q; ++a)
            {
                row[p + a] = draw_category(a, category_weights[a][static_cast<std::size_t>(label)]);
            }
            break;
        case Concept::rules:
        case Concept::checkerboard:
        case Concept::noise:
        {
            for (std::size_t a = 0; a < p; ++a)
            {
                row[a] = rng.uniform();
            }
            for (std::size_t a = 0; a < q; ++a)
            {
                row[p + a] = draw_category(a, flat_weights);
            }
            if (spec.concept_kind == Concept::rules)
            {
                std::size_t leaf = 0;
                for (const auto& rule : rules)
                {
                    leaf = 2 * leaf + (row[rule.attribute] <= rule.threshold ? 0 : 1);
                }
                label = rule_leaf[leaf];
            }
            else if (spec.concept_kind == Concept::checkerboard)
            {
                const auto bx = static_cast<std::size_t>(row[0] * static_cast<double>(cells_per_axis));
                const auto by = static_cast<std::size_t>(row[1] * static_cast<double>(cells_per_axis));
                label = static_cast<int>((bx + by) % k);
            }
            else
            {
                label = draw_class();
            }
            break;
        }
        }
        if (rng.uniform() < spec.label_noise)
        {
            label = static_cast<int>(rng.index(k));
        }
        labels[r] = label;
        if (spec.missing_rate > 0.0)
        {
            for (std::size_t a = 0; a < width; ++a)
            {
                if (rng.uniform() < spec.missing_rate)
                {
                    row[a] = missing_value;
                }
            }
        }
    }
    return TabularDataset(std::move(name), std::move(attributes), Attribute::make_nominal("class", std::move(classes)),
                          std::move(cells), std::move(labels));
}

MetaCorpus build_synthetic_corpus(std::size_t count, std::uint64_t seed, double alpha)
{
    MetaCorpus corpus;
    const auto candidates = demo_candidates();
    for (const auto& c : candidates)
    {
        corpus.targets.algorithms.push_back(c.name);
    }
    for (std::size_t i = 0; i < count; ++i)
    {
        const auto problem_seed = derive_seed(seed, i);
        const auto spec = random_spec(derive_seed(problem_seed, 0));
        auto dataset = synthetic_problem(spec, derive_seed(problem_seed, 1), "synthetic-" + std::to_string(i + 1));
        if (dataset.num_observed_classes() < 2)
        {
            continue;
        }
        auto features = extract_all(dataset, derive_seed(problem_seed, 2));
        auto accuracies = estimate_accuracy_matrix(dataset, candidates, derive_seed(problem_seed, 3));
        corpus.targets.problems.push_back(dataset.name());
        corpus.targets.targets.push_back(derive_meta_target(accuracies, alpha));
        corpus.problems.push_back(std::move(dataset));
        corpus.features.push_back(std::move(features));
        corpus.accuracies.push_back(std::move(accuracies));
    }
    return corpus;
}

} // namespace metarec
