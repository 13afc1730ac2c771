#include <metarec/csv.hpp>
#include <metarec/error.hpp>
#include <metarec/metafeatures.hpp>
#include <metarec/random.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace metarec {

std::string_view family_name(FamilyId family)
{
    switch (family)
    {
    case 1: return "statistical";
    case 2: return "model-structure";
    case 3: return "landmarking";
    case 4: return "complexity";
    case 5: return "structural";
    default: return "unknown";
    }
}

const std::vector<std::string>& measure_names(FamilyId family)
{
    static const std::vector<std::string> statistical = {
        "Ins.Num", "Attr.Num", "Target.Num", "Target.Min", "Target.Max",
        "Pro.Bin", "Pro.Nom", "Pro.Num", "Pro.MissIns", "Pro.MissValues",
        "Mean.Geo", "Mean.Harm", "Mean.Trim", "Mad", "Var", "Std", "Prcitile", "Int.Range",
        "Prop.AttrWithOutlier", "Skewness", "Kurtosis", "Max.eig", "Min.eig", "Can.corr",
        "Grav.cent", "MeanAbsCoef",
        "H.C", "H.X", "M.CX", "En.attr", "Ns.ratio",
    };
    static const std::vector<std::string> structure = {
        "Tree.Height", "Tree.Width", "Node.Num", "Leaf.Num",
        "Level.Max", "Level.Mean", "Level.Dev",
        "Branch.Long", "Branch.Short", "Branch.Mean", "Branch.Dev",
        "Attr.Min", "Attr.Max", "Attr.Mean", "Attr.Dev",
    };
    static const std::vector<std::string> landmarking = {
        "NaiveBayes", "1NN", "Elite1NN", "DecisionNode", "RandomNode", "WorstNode",
    };
    static const std::vector<std::string> complexity = {
        "Bound.Len", "Adherence.Prop", "IntraInter.Ratio", "NN.Nonlinearity",
        "Linear.Nonlinearity", "Fisher.Ratio", "InsAttr",
    };
    static const std::vector<std::string> structural = [] {
        std::vector<std::string> names;
        for (const auto* vector : {"OneItem", "TwoItem"})
        {
            names.push_back(std::string(vector) + ".Min");
            for (int q = 1; q <= 7; ++q)
            {
                names.push_back(std::string(vector) + ".Q" + std::to_string(q) + "of8");
            }
            names.push_back(std::string(vector) + ".Max");
        }
        return names;
    }();
    static const std::vector<std::string> none;

    switch (family)
    {
    case 1: return statistical;
    case 2: return structure;
    case 3: return landmarking;
    case 4: return complexity;
    case 5: return structural;
    default: return none;
    }
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

// Builds a vector of fixed arity; every slot starts imputed until set with a
// finite value.
class VectorBuilder
{
public:
    explicit VectorBuilder(FamilyId family)
    {
        m_out.family = family;
        m_out.names = measure_names(family);
        m_out.values.assign(m_out.names.size(), 0.0);
        m_out.imputed.assign(m_out.names.size(), true);
    }

    void set(std::size_t index, double value)
    {
        if (std::isfinite(value))
        {
            m_out.values[index] = value;
            m_out.imputed[index] = false;
        }
    }

    MetaFeatureVector finish() { return std::move(m_out); }

private:
    MetaFeatureVector m_out;
};

double mean_of(std::span<const double> values)
{
    if (values.empty())
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values)
{
    if (values.empty())
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double m = mean_of(values);
    double sum = 0.0;
    for (const double v : values)
    {
        sum += (v - m) * (v - m);
    }
    return std::sqrt(sum / static_cast<double>(values.size()));
}

double entropy_bits(std::span<const double> counts)
{
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
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

std::vector<double> observed_values(const TabularDataset& dataset, std::size_t attribute)
{
    std::vector<double> values;
    values.reserve(dataset.num_instances());
    for (std::size_t r = 0; r < dataset.num_instances(); ++r)
    {
        const double v = dataset.value(r, attribute);
        if (!is_missing(v))
        {
            values.push_back(v);
        }
    }
    return values;
}

// Running per-measure accumulators for the numeric-attribute statistics.
struct AttributeStatistics
{
    std::vector<double> geometric, harmonic, trimmed, mad, variance, stddev, p75, iqr, skewness, kurtosis;
    std::size_t with_outliers = 0;
    std::size_t considered = 0;

    void add(std::vector<double> x)
    {
        if (x.empty())
        {
            return;
        }
        ++considered;
        std::sort(x.begin(), x.end());
        const double n = static_cast<double>(x.size());
        const double mean = mean_of(x);

        const bool shift = x.front() <= 0.0;
        double log_sum = 0.0;
        double inverse_sum = 0.0;
        for (const double v : x)
        {
            const double y = shift ? std::abs(v) + 1.0 : v;
            log_sum += std::log(y);
            inverse_sum += 1.0 / y;
        }
        geometric.push_back(std::exp(log_sum / n));
        harmonic.push_back(n / inverse_sum);

        const auto cut = static_cast<std::size_t>(std::floor(0.05 * n));
        trimmed.push_back(mean_of(std::span<const double>(x).subspan(cut, x.size() - 2 * cut)));

        double abs_dev = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (const double v : x)
        {
            const double d = v - mean;
            abs_dev += std::abs(d);
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        mad.push_back(abs_dev / n);
        const double var = x.size() > 1 ? m2 / (n - 1.0) : 0.0;
        variance.push_back(var);
        stddev.push_back(std::sqrt(var));
        m2 /= n;
        m3 /= n;
        m4 /= n;
        if (m2 > 0.0)
        {
            skewness.push_back(m3 / std::pow(m2, 1.5));
            kurtosis.push_back(m4 / (m2 * m2) - 3.0);
        }

        const double q1 = quantile(x, 0.25);
        const double q3 = quantile(x, 0.75);
        const double median = quantile(x, 0.5);
        p75.push_back(q3);
        iqr.push_back(q3 - q1);
        const double reach = 3.0 * (q3 - q1);
        if (x.front() < median - reach || x.back() > median + reach)
        {
            ++with_outliers;
        }
    }
};

// Numeric block with missing cells replaced by the column mean.
Eigen::MatrixXd numeric_block(const TabularDataset& dataset, const std::vector<std::size_t>& columns)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.num_instances()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
        const auto values = observed_values(dataset, columns[c]);
        const double fill = values.empty() ? 0.0 : mean_of(values);
        for (std::size_t r = 0; r < dataset.num_instances(); ++r)
        {
            const double v = dataset.value(r, columns[c]);
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = is_missing(v) ? fill : v;
        }
    }
    return x;
}

// Orthonormal basis of the column space of a centered block.
Eigen::MatrixXd column_basis(const Eigen::MatrixXd& centered)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0)
    {
        return Eigen::MatrixXd(centered.rows(), 0);
    }
    const double tolerance = s(0) * 1e-10 * static_cast<double>(std::max(centered.rows(), centered.cols()));
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > tolerance)
    {
        ++rank;
    }
    return svd.matrixU().leftCols(rank);
}

} // namespace

MetaFeatureVector extract_statistical(const TabularDataset& dataset)
{
    if (dataset.num_instances() == 0)
    {
        throw Error(ErrorKind::empty_dataset, "cannot characterize an empty dataset");
    }
    VectorBuilder out(1);
    const auto n = dataset.num_instances();
    const auto m = dataset.num_attributes();
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    const auto counts = dataset.class_counts();
    const auto numeric = dataset.numeric_attributes();
    const auto nominal = dataset.nominal_attributes();

    std::size_t observed_classes = 0;
    std::size_t minority = n;
    std::size_t majority = 0;
    for (const auto c : counts)
    {
        if (c > 0)
        {
            ++observed_classes;
            minority = std::min(minority, c);
            majority = std::max(majority, c);
        }
    }
    out.set(0, nd);
    out.set(1, md);
    out.set(2, static_cast<double>(observed_classes));
    out.set(3, static_cast<double>(minority) / nd);
    out.set(4, static_cast<double>(majority) / nd);

    std::size_t binary = 0;
    std::size_t missing_cells = 0;
    std::size_t rows_with_missing = 0;
    for (std::size_t a = 0; a < m; ++a)
    {
        auto values = observed_values(dataset, a);
        missing_cells += n - values.size();
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (values.size() == 2)
        {
            ++binary;
        }
    }
    for (std::size_t r = 0; r < n; ++r)
    {
        const auto row = dataset.row(r);
        if (std::any_of(row.begin(), row.end(), [](double v) { return is_missing(v); }))
        {
            ++rows_with_missing;
        }
    }
    if (m > 0)
    {
        out.set(5, static_cast<double>(binary) / md);
        out.set(6, static_cast<double>(nominal.size()) / md);
        out.set(7, static_cast<double>(numeric.size()) / md);
        out.set(9, static_cast<double>(missing_cells) / (nd * md));
    }
    out.set(8, static_cast<double>(rows_with_missing) / nd);

    AttributeStatistics stats;
    for (const auto a : numeric)
    {
        stats.add(observed_values(dataset, a));
    }
    out.set(10, mean_of(stats.geometric));
    out.set(11, mean_of(stats.harmonic));
    out.set(12, mean_of(stats.trimmed));
    out.set(13, mean_of(stats.mad));
    out.set(14, mean_of(stats.variance));
    out.set(15, mean_of(stats.stddev));
    out.set(16, mean_of(stats.p75));
    out.set(17, mean_of(stats.iqr));
    if (stats.considered > 0)
    {
        out.set(18, static_cast<double>(stats.with_outliers) / static_cast<double>(stats.considered));
    }
    out.set(19, mean_of(stats.skewness));
    out.set(20, mean_of(stats.kurtosis));

    // correlation structure of the numeric block
    if (!numeric.empty())
    {
        Eigen::MatrixXd x = numeric_block(dataset, numeric);
        Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
        const auto p = centered.cols();
        Eigen::VectorXd scale(p);
        for (Eigen::Index c = 0; c < p; ++c)
        {
            scale(c) = centered.col(c).norm();
        }
        Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
        {
            for (Eigen::Index j = i + 1; j < p; ++j)
            {
                if (scale(i) > 0.0 && scale(j) > 0.0)
                {
                    corr(i, j) = corr(j, i) = centered.col(i).dot(centered.col(j)) / (scale(i) * scale(j));
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
        out.set(21, eig.eigenvalues().maxCoeff());
        out.set(22, eig.eigenvalues().minCoeff());
        if (p >= 2)
        {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < p; ++i)
            {
                for (Eigen::Index j = i + 1; j < p; ++j)
                {
                    sum += std::abs(corr(i, j));
                }
            }
            out.set(25, sum / (static_cast<double>(p) * static_cast<double>(p - 1) / 2.0));
        }

        if (observed_classes >= 2)
        {
            // first canonical correlation between the numeric block and the
            // one-hot target (one observed class dropped)
            std::vector<std::size_t> present;
            for (std::size_t c = 0; c < counts.size(); ++c)
            {
                if (counts[c] > 0)
                {
                    present.push_back(c);
                }
            }
            Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(present.size() - 1));
            for (std::size_t r = 0; r < n; ++r)
            {
                const auto it = std::find(present.begin(), present.end(), static_cast<std::size_t>(dataset.label(r)));
                const auto column = static_cast<Eigen::Index>(it - present.begin());
                if (column < y.cols())
                {
                    y(static_cast<Eigen::Index>(r), column) = 1.0;
                }
            }
            Eigen::MatrixXd y_centered = y.rowwise() - y.colwise().mean();
            const auto qx = column_basis(centered);
            const auto qy = column_basis(y_centered);
            if (qx.cols() > 0 && qy.cols() > 0)
            {
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(qx.transpose() * qy);
                out.set(23, std::clamp(svd.singularValues()(0), 0.0, 1.0));
            }

            // distance between the standardized centroids of the majority
            // and minority classes
            std::size_t major_class = 0, minor_class = 0;
            for (std::size_t c = 0; c < counts.size(); ++c)
            {
                if (counts[c] > counts[major_class])
                {
                    major_class = c;
                }
                if (counts[c] > 0 && (counts[minor_class] == 0 || counts[c] < counts[minor_class]))
                {
                    minor_class = c;
                }
            }
            if (major_class == minor_class)
            {
                for (std::size_t c = counts.size(); c-- > 0;)
                {
                    if (counts[c] > 0 && c != major_class)
                    {
                        minor_class = c;
                        break;
                    }
                }
            }
            Eigen::VectorXd major_centroid = Eigen::VectorXd::Zero(p);
            Eigen::VectorXd minor_centroid = Eigen::VectorXd::Zero(p);
            for (std::size_t r = 0; r < n; ++r)
            {
                const auto label = static_cast<std::size_t>(dataset.label(r));
                if (label == major_class)
                {
                    major_centroid += centered.row(static_cast<Eigen::Index>(r)).transpose();
                }
                else if (label == minor_class)
                {
                    minor_centroid += centered.row(static_cast<Eigen::Index>(r)).transpose();
                }
            }
            major_centroid /= static_cast<double>(counts[major_class]);
            minor_centroid /= static_cast<double>(counts[minor_class]);
            Eigen::VectorXd diff = major_centroid - minor_centroid;
            for (Eigen::Index c = 0; c < p; ++c)
            {
                const double sd = scale(c) / std::sqrt(nd);
                diff(c) = sd > 0.0 ? diff(c) / sd : 0.0;
            }
            out.set(24, diff.norm());
        }
    }

    // information-theoretic measures on nominal attributes
    std::vector<double> class_counts(counts.begin(), counts.end());
    const double class_entropy = entropy_bits(class_counts);
    out.set(26, class_entropy);
    if (!nominal.empty())
    {
        double attribute_entropy = 0.0;
        double mutual_information = 0.0;
        const auto k = dataset.num_classes();
        for (const auto a : nominal)
        {
            const auto categories = dataset.attribute(a).categories.size();
            std::vector<double> joint(categories * k, 0.0);
            std::vector<double> marginal_x(categories, 0.0);
            std::vector<double> marginal_c(k, 0.0);
            for (std::size_t r = 0; r < n; ++r)
            {
                const double v = dataset.value(r, a);
                if (is_missing(v))
                {
                    continue;
                }
                const auto x = static_cast<std::size_t>(v);
                const auto c = static_cast<std::size_t>(dataset.label(r));
                joint[x * k + c] += 1.0;
                marginal_x[x] += 1.0;
                marginal_c[c] += 1.0;
            }
            const double hx = entropy_bits(marginal_x);
            attribute_entropy += hx;
            mutual_information += entropy_bits(marginal_c) + hx - entropy_bits(joint);
        }
        const double mean_hx = attribute_entropy / static_cast<double>(nominal.size());
        const double mean_mi = std::max(0.0, mutual_information / static_cast<double>(nominal.size()));
        out.set(27, mean_hx);
        out.set(28, mean_mi);
        if (mean_mi > 1e-12)
        {
            out.set(29, class_entropy / mean_mi);
            out.set(30, mean_hx / mean_mi - 1.0);
        }
    }
    return out.finish();
}

MetaFeatureVector extract_model_structure(const TabularDataset& dataset, const TreeParams& params)
{
    const auto tree = train_tree(dataset, params);
    const auto& nodes = tree.nodes();
    VectorBuilder out(2);

    // breadth-first level sizes and root-to-leaf path lengths
    std::vector<double> level_sizes;
    std::vector<double> branch_lengths;
    std::vector<double> occurrences(dataset.num_attributes(), 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> frontier{{0, 1}};
    std::size_t leaves = 0;
    while (!frontier.empty())
    {
        level_sizes.push_back(static_cast<double>(frontier.size()));
        std::vector<std::pair<std::size_t, std::size_t>> next;
        for (const auto& [index, depth] : frontier)
        {
            const auto& node = nodes[index];
            if (node.leaf())
            {
                ++leaves;
                branch_lengths.push_back(static_cast<double>(depth));
                continue;
            }
            occurrences[static_cast<std::size_t>(node.attribute)] += 1.0;
            for (const int child : node.children)
            {
                next.emplace_back(static_cast<std::size_t>(child), depth + 1);
            }
        }
        frontier = std::move(next);
    }

    const double width = *std::max_element(level_sizes.begin(), level_sizes.end());
    out.set(0, static_cast<double>(level_sizes.size()));
    out.set(1, width);
    out.set(2, static_cast<double>(nodes.size()));
    out.set(3, static_cast<double>(leaves));
    out.set(4, width);
    out.set(5, mean_of(level_sizes));
    out.set(6, population_std(level_sizes));
    out.set(7, *std::max_element(branch_lengths.begin(), branch_lengths.end()));
    out.set(8, *std::min_element(branch_lengths.begin(), branch_lengths.end()));
    out.set(9, mean_of(branch_lengths));
    out.set(10, population_std(branch_lengths));
    if (!occurrences.empty())
    {
        out.set(11, *std::min_element(occurrences.begin(), occurrences.end()));
        out.set(12, *std::max_element(occurrences.begin(), occurrences.end()));
        out.set(13, mean_of(occurrences));
        out.set(14, population_std(occurrences));
    }
    return out.finish();
}

MetaFeatureVector extract_landmarking(const TabularDataset& dataset, std::uint64_t seed)
{
    constexpr int folds = 10;
    if (dataset.num_instances() < folds)
    {
        throw Error(ErrorKind::too_few_instances, "landmarking needs at least 10 instances");
    }
    if (dataset.num_observed_classes() < 2)
    {
        throw Error(ErrorKind::too_few_instances, "landmarking needs at least two observed classes");
    }
    const auto plan = stratified_folds(dataset, folds, derive_seed(seed, 0));
    std::vector<double> hits(std::size(all_landmarkers), 0.0);
    for (int fold = 0; fold < folds; ++fold)
    {
        const auto train = dataset.subset(plan.train_rows(fold));
        const auto test = dataset.subset(plan.test_rows(fold));
        for (std::size_t l = 0; l < std::size(all_landmarkers); ++l)
        {
            const auto model = train_landmarker(train, all_landmarkers[l], derive_seed(seed, 100 + static_cast<std::uint64_t>(fold)));
            hits[l] += accuracy(*model.model, test) * static_cast<double>(test.num_instances());
        }
    }
    VectorBuilder out(3);
    for (std::size_t l = 0; l < hits.size(); ++l)
    {
        out.set(l, hits[l] / static_cast<double>(dataset.num_instances()));
    }
    return out.finish();
}

namespace {

TabularDataset stratified_sample(const TabularDataset& dataset, std::size_t limit, std::uint64_t seed)
{
    if (dataset.num_instances() <= limit)
    {
        return dataset;
    }
    std::vector<std::size_t> order(dataset.num_instances());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    const auto counts = dataset.class_counts();
    std::vector<std::size_t> quota(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
    {
        quota[c] = counts[c] == 0 ? 0
            : std::max<std::size_t>(1, counts[c] * limit / dataset.num_instances());
    }
    std::vector<std::size_t> kept;
    for (const auto r : order)
    {
        auto& q = quota[static_cast<std::size_t>(dataset.label(r))];
        if (q > 0)
        {
            kept.push_back(r);
            --q;
        }
    }
    std::sort(kept.begin(), kept.end());
    return dataset.subset(kept);
}

// Least-squares one-vs-rest linear discriminant over standardized numeric
// attributes and one-hot nominal attributes.
class LinearDiscriminant
{
public:
    explicit LinearDiscriminant(const TabularDataset& train) : m_schema(train.attributes())
    {
        for (std::size_t a = 0; a < train.num_attributes(); ++a)
        {
            if (train.attribute(a).numeric())
            {
                const auto values = observed_values(train, a);
                const double mean = values.empty() ? 0.0 : mean_of(values);
                const double sd = values.empty() ? 0.0 : population_std(values);
                m_center.push_back(mean);
                m_scale.push_back(sd > 0.0 ? sd : 1.0);
                m_width += 1;
            }
            else
            {
                m_center.push_back(0.0);
                m_scale.push_back(1.0);
                m_width += train.attribute(a).categories.size();
            }
        }
        m_width += 1; // bias

        const auto n = static_cast<Eigen::Index>(train.num_instances());
        const auto k = static_cast<Eigen::Index>(train.num_classes());
        Eigen::MatrixXd x(n, static_cast<Eigen::Index>(m_width));
        Eigen::MatrixXd y = Eigen::MatrixXd::Constant(n, k, -1.0);
        for (Eigen::Index r = 0; r < n; ++r)
        {
            x.row(r) = encode(train.row(static_cast<std::size_t>(r))).transpose();
            y(r, train.label(static_cast<std::size_t>(r))) = 1.0;
        }
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += 1e-6 * std::max(1.0, static_cast<double>(n));
        m_weights = gram.ldlt().solve(x.transpose() * y);
    }

    int predict(std::span<const double> row) const
    {
        const Eigen::VectorXd scores = m_weights.transpose() * encode(row);
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < scores.size(); ++c)
        {
            if (scores(c) > scores(best))
            {
                best = c;
            }
        }
        return static_cast<int>(best);
    }

private:
    Eigen::VectorXd encode(std::span<const double> row) const
    {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_width));
        Eigen::Index offset = 0;
        for (std::size_t a = 0; a < m_schema.size(); ++a)
        {
            const double value = row[a];
            if (m_schema[a].numeric())
            {
                v(offset++) = is_missing(value) ? 0.0 : (value - m_center[a]) / m_scale[a];
            }
            else
            {
                if (!is_missing(value))
                {
                    v(offset + static_cast<Eigen::Index>(value)) = 1.0;
                }
                offset += static_cast<Eigen::Index>(m_schema[a].categories.size());
            }
        }
        v(offset) = 1.0;
        return v;
    }

    std::vector<Attribute> m_schema;
    std::vector<double> m_center;
    std::vector<double> m_scale;
    std::size_t m_width = 0;
    Eigen::MatrixXd m_weights;
};

} // namespace

MetaFeatureVector extract_complexity(const TabularDataset& full, std::uint64_t seed, const ComplexityOptions& options)
{
    if (full.num_observed_classes() < 2)
    {
        throw Error(ErrorKind::too_few_instances, "complexity measures need at least two observed classes");
    }
    VectorBuilder out(4);
    const auto data = stratified_sample(full, std::max<std::size_t>(options.max_instances, 2), derive_seed(seed, 1));
    const auto n = data.num_instances();
    const MixedDistance distance(data);

    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = i + 1; j < n; ++j)
        {
            dist[i * n + j] = dist[j * n + i] = distance(data.row(i), data.row(j));
        }
    }
    const auto d = [&](std::size_t i, std::size_t j) { return dist[i * n + j]; };
    const auto label = [&](std::size_t i) { return data.label(i); };

    // minimum spanning tree (Prim), fraction of edges across classes
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<bool> in_tree(n, false);
        std::vector<double> best(n, inf);
        std::vector<std::size_t> parent(n, 0);
        best[0] = 0.0;
        std::size_t crossing = 0;
        for (std::size_t step = 0; step < n; ++step)
        {
            std::size_t u = n;
            for (std::size_t v = 0; v < n; ++v)
            {
                if (!in_tree[v] && (u == n || best[v] < best[u]))
                {
                    u = v;
                }
            }
            in_tree[u] = true;
            if (step > 0 && label(u) != label(parent[u]))
            {
                ++crossing;
            }
            for (std::size_t v = 0; v < n; ++v)
            {
                if (!in_tree[v] && d(u, v) < best[v])
                {
                    best[v] = d(u, v);
                    parent[v] = u;
                }
            }
        }
        out.set(0, static_cast<double>(crossing) / static_cast<double>(n - 1));
    }

    // nearest same-class and other-class distances
    std::vector<double> intra(n, std::numeric_limits<double>::infinity());
    std::vector<double> inter(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            if (i == j)
            {
                continue;
            }
            auto& slot = label(i) == label(j) ? intra[i] : inter[i];
            slot = std::min(slot, d(i, j));
        }
    }

    // adherence subsets: ball of radius inter[i]; drop balls contained in a
    // same-class ball (identical balls keep the lowest index)
    {
        std::size_t retained = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            bool contained = false;
            for (std::size_t j = 0; j < n && !contained; ++j)
            {
                if (i == j || label(i) != label(j))
                {
                    continue;
                }
                const double reach = d(i, j) + inter[i];
                const bool identical = d(i, j) == 0.0 && inter[i] == inter[j];
                contained = identical ? j < i : reach <= inter[j];
            }
            if (!contained)
            {
                ++retained;
            }
        }
        out.set(1, static_cast<double>(retained) / static_cast<double>(n));
    }

    {
        double intra_sum = 0.0, inter_sum = 0.0;
        std::size_t intra_count = 0, inter_count = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (std::isfinite(intra[i]))
            {
                intra_sum += intra[i];
                ++intra_count;
            }
            if (std::isfinite(inter[i]))
            {
                inter_sum += inter[i];
                ++inter_count;
            }
        }
        if (intra_count > 0 && inter_count > 0 && inter_sum > 0.0)
        {
            out.set(2, (intra_sum / static_cast<double>(intra_count)) / (inter_sum / static_cast<double>(inter_count)));
        }
    }

    // interpolated test points from seeded same-class pairs
    {
        std::map<int, std::vector<std::size_t>> members;
        for (std::size_t i = 0; i < n; ++i)
        {
            members[label(i)].push_back(i);
        }
        Rng rng(derive_seed(seed, 2));
        const auto m = data.num_attributes();
        std::vector<double> cells;
        std::vector<int> labels;
        const std::size_t points = 2 * n;
        cells.reserve(points * m);
        for (std::size_t p = 0; p < points; ++p)
        {
            const auto first = rng.index(n);
            const auto& same = members[label(first)];
            const auto second = same[rng.index(same.size())];
            const double t = rng.uniform();
            for (std::size_t a = 0; a < m; ++a)
            {
                const double x = data.value(first, a);
                const double y = data.value(second, a);
                double v;
                if (is_missing(x) || is_missing(y))
                {
                    v = is_missing(x) ? y : x;
                }
                else if (data.attribute(a).nominal())
                {
                    v = t < 0.5 ? x : y;
                }
                else
                {
                    v = x + t * (y - x);
                }
                cells.push_back(v);
            }
            labels.push_back(label(first));
        }
        const TabularDataset synthetic(data.name(), data.attributes(), data.target(), std::move(cells), std::move(labels));

        const auto nn = NearestNeighbor::train(data);
        out.set(3, 1.0 - accuracy(nn, synthetic));

        const LinearDiscriminant linear(data);
        std::size_t errors = 0;
        for (std::size_t r = 0; r < synthetic.num_instances(); ++r)
        {
            if (linear.predict(synthetic.row(r)) != synthetic.label(r))
            {
                ++errors;
            }
        }
        out.set(4, static_cast<double>(errors) / static_cast<double>(synthetic.num_instances()));
    }

    // maximum Fisher discriminant ratio over numeric attributes and class pairs
    {
        double best = -1.0;
        const auto k = data.num_classes();
        for (const auto a : data.numeric_attributes())
        {
            std::vector<double> sum(k, 0.0), sum_sq(k, 0.0), count(k, 0.0);
            for (std::size_t r = 0; r < n; ++r)
            {
                const double v = data.value(r, a);
                if (!is_missing(v))
                {
                    const auto c = static_cast<std::size_t>(data.label(r));
                    sum[c] += v;
                    sum_sq[c] += v * v;
                    count[c] += 1.0;
                }
            }
            for (std::size_t c1 = 0; c1 < k; ++c1)
            {
                for (std::size_t c2 = c1 + 1; c2 < k; ++c2)
                {
                    if (count[c1] == 0.0 || count[c2] == 0.0)
                    {
                        continue;
                    }
                    const double mu1 = sum[c1] / count[c1];
                    const double mu2 = sum[c2] / count[c2];
                    const double var1 = std::max(0.0, sum_sq[c1] / count[c1] - mu1 * mu1);
                    const double var2 = std::max(0.0, sum_sq[c2] / count[c2] - mu2 * mu2);
                    const double spread = var1 + var2;
                    if (spread <= 0.0)
                    {
                        continue;
                    }
                    best = std::max(best, (mu1 - mu2) * (mu1 - mu2) / spread);
                }
            }
        }
        if (best >= 0.0)
        {
            out.set(5, best);
        }
    }

    if (full.num_attributes() > 0)
    {
        out.set(6, static_cast<double>(full.num_instances()) / static_cast<double>(full.num_attributes()));
    }
    return out.finish();
}

MetaFeatureVector extract_structural(const TabularDataset& dataset)
{
    if (dataset.num_instances() == 0)
    {
        throw Error(ErrorKind::empty_dataset, "cannot characterize an empty dataset");
    }
    const auto n = dataset.num_instances();
    const auto m = dataset.num_attributes();
    constexpr int bins = 10;

    // item code per cell (-1 when missing) and item count per attribute
    std::vector<std::vector<int>> codes(m, std::vector<int>(n, -1));
    std::vector<int> item_count(m, 0);
    for (std::size_t a = 0; a < m; ++a)
    {
        if (dataset.attribute(a).nominal())
        {
            item_count[a] = static_cast<int>(dataset.attribute(a).categories.size());
            for (std::size_t r = 0; r < n; ++r)
            {
                const double v = dataset.value(r, a);
                if (!is_missing(v))
                {
                    codes[a][r] = static_cast<int>(v);
                }
            }
            continue;
        }
        auto values = observed_values(dataset, a);
        std::sort(values.begin(), values.end());
        std::vector<double> cuts;
        for (int b = 1; b < bins; ++b)
        {
            cuts.push_back(quantile(values, static_cast<double>(b) / bins));
        }
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        item_count[a] = static_cast<int>(cuts.size()) + 1;
        for (std::size_t r = 0; r < n; ++r)
        {
            const double v = dataset.value(r, a);
            if (!is_missing(v))
            {
                codes[a][r] = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
            }
        }
    }

    const double nd = static_cast<double>(n);
    std::vector<double> one_item;
    std::vector<std::vector<bool>> observed(m);
    for (std::size_t a = 0; a < m; ++a)
    {
        std::vector<double> counts(static_cast<std::size_t>(item_count[a]), 0.0);
        for (const int code : codes[a])
        {
            if (code >= 0)
            {
                counts[static_cast<std::size_t>(code)] += 1.0;
            }
        }
        observed[a].assign(counts.size(), false);
        for (std::size_t i = 0; i < counts.size(); ++i)
        {
            if (counts[i] > 0.0)
            {
                observed[a][i] = true;
                one_item.push_back(counts[i] / nd);
            }
        }
    }

    std::vector<double> two_item;
    for (std::size_t a = 0; a < m; ++a)
    {
        for (std::size_t b = a + 1; b < m; ++b)
        {
            const auto wa = static_cast<std::size_t>(item_count[a]);
            const auto wb = static_cast<std::size_t>(item_count[b]);
            std::vector<double> joint(wa * wb, 0.0);
            for (std::size_t r = 0; r < n; ++r)
            {
                const int x = codes[a][r];
                const int y = codes[b][r];
                if (x >= 0 && y >= 0)
                {
                    joint[static_cast<std::size_t>(x) * wb + static_cast<std::size_t>(y)] += 1.0;
                }
            }
            for (std::size_t x = 0; x < wa; ++x)
            {
                if (!observed[a][x])
                {
                    continue;
                }
                for (std::size_t y = 0; y < wb; ++y)
                {
                    if (observed[b][y])
                    {
                        two_item.push_back(joint[x * wb + y] / nd);
                    }
                }
            }
        }
    }

    VectorBuilder out(5);
    const auto summarize = [&](std::vector<double>& values, std::size_t offset)
    {
        if (values.empty())
        {
            return;
        }
        std::sort(values.begin(), values.end());
        for (int q = 0; q <= 8; ++q)
        {
            out.set(offset + static_cast<std::size_t>(q), quantile(values, static_cast<double>(q) / 8.0));
        }
    };
    summarize(one_item, 0);
    summarize(two_item, 9);
    return out.finish();
}

MetaFeatureGroupSet extract_all(const TabularDataset& dataset, std::uint64_t seed)
{
    MetaFeatureGroupSet set;
    set.problem = dataset.name();
    set.families[0] = extract_statistical(dataset);
    set.families[1] = extract_model_structure(dataset);
    set.families[2] = extract_landmarking(dataset, derive_seed(seed, 3));
    set.families[3] = extract_complexity(dataset, derive_seed(seed, 4));
    set.families[4] = extract_structural(dataset);
    return set;
}

std::array<std::array<double, family_count>, family_count> family_correlation(
    const std::vector<MetaFeatureGroupSet>& features)
{
    if (features.size() < 3)
    {
        throw Error(ErrorKind::too_few_instances, "family correlation needs at least 3 problems");
    }
    const auto problems = features.size();
    // standardized columns per family; constant measures dropped
    std::array<std::vector<std::vector<double>>, family_count> columns;
    for (int f = 0; f < family_count; ++f)
    {
        const auto arity = features.front().families[static_cast<std::size_t>(f)].size();
        for (std::size_t j = 0; j < arity; ++j)
        {
            std::vector<double> column(problems);
            for (std::size_t p = 0; p < problems; ++p)
            {
                const auto& vector = features[p].families[static_cast<std::size_t>(f)];
                if (vector.size() != arity)
                {
                    throw Error(ErrorKind::arity_mismatch, "family arity differs across problems");
                }
                column[p] = vector.values[j];
            }
            const double mean = mean_of(column);
            double norm = 0.0;
            for (auto& v : column)
            {
                v -= mean;
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (norm <= 1e-12 * std::max(1.0, std::abs(mean)) * std::sqrt(static_cast<double>(problems)))
            {
                continue;
            }
            for (auto& v : column)
            {
                v /= norm;
            }
            columns[static_cast<std::size_t>(f)].push_back(std::move(column));
        }
    }

    std::array<std::array<double, family_count>, family_count> result{};
    for (std::size_t a = 0; a < family_count; ++a)
    {
        for (std::size_t b = a; b < family_count; ++b)
        {
            double sum = 0.0;
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < columns[a].size(); ++i)
            {
                for (std::size_t j = (a == b ? i + 1 : 0); j < columns[b].size(); ++j)
                {
                    double r = 0.0;
                    for (std::size_t p = 0; p < problems; ++p)
                    {
                        r += columns[a][i][p] * columns[b][j][p];
                    }
                    sum += std::min(1.0, std::abs(r));
                    ++pairs;
                }
            }
            result[a][b] = result[b][a] = pairs > 0 ? sum / static_cast<double>(pairs) : 0.0;
        }
    }
    return result;
}

namespace {

csv::Row feature_header()
{
    csv::Row header{"problem"};
    for (int f = 1; f <= family_count; ++f)
    {
        for (const auto& name : measure_names(f))
        {
            header.push_back(std::to_string(f) + "." + name);
        }
    }
    return header;
}

} // namespace

void write_feature_table(std::ostream& out, const std::vector<MetaFeatureGroupSet>& features)
{
    csv::write_row(out, feature_header());
    for (const auto& set : features)
    {
        csv::Row row{set.problem};
        for (const auto& vector : set.families)
        {
            for (const double v : vector.values)
            {
                row.push_back(csv::format_double(v));
            }
        }
        csv::write_row(out, row);
    }
}

void write_imputation_table(std::ostream& out, const std::vector<MetaFeatureGroupSet>& features)
{
    csv::write_row(out, feature_header());
    for (const auto& set : features)
    {
        csv::Row row{set.problem};
        for (const auto& vector : set.families)
        {
            for (const bool flag : vector.imputed)
            {
                row.push_back(flag ? "1" : "0");
            }
        }
        csv::write_row(out, row);
    }
}

std::vector<MetaFeatureGroupSet> parse_feature_table(std::string_view text)
{
    const auto rows = csv::parse(text);
    const auto header = feature_header();
    if (rows.empty() || rows.front() != header)
    {
        throw Error(ErrorKind::malformed_input, "meta-feature table header does not match the expected measure columns");
    }
    std::vector<MetaFeatureGroupSet> out;
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        const auto& row = rows[r];
        if (row.size() != header.size())
        {
            throw Error(ErrorKind::malformed_input, "meta-feature row " + std::to_string(r + 1) + " is ragged");
        }
        MetaFeatureGroupSet set;
        set.problem = row.front();
        std::size_t column = 1;
        for (int f = 1; f <= family_count; ++f)
        {
            auto& vector = set.families[static_cast<std::size_t>(f - 1)];
            vector.family = f;
            vector.names = measure_names(f);
            for (std::size_t j = 0; j < vector.names.size(); ++j, ++column)
            {
                double v = 0.0;
                if (!csv::parse_double(row[column], v))
                {
                    throw Error(ErrorKind::malformed_input, "meta-feature value '" + row[column] + "' is not a finite number");
                }
                vector.values.push_back(v);
                vector.imputed.push_back(false);
            }
        }
        out.push_back(std::move(set));
    }
    return out;
}

std::vector<MetaFeatureGroupSet> load_feature_table(const std::filesystem::path& path)
{
    return parse_feature_table(csv::read_text(path));
}

} // namespace metarec
