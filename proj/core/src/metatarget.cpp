#include <metarec/csv.hpp>
#include <metarec/error.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/random.hpp>

#include <numeric>
#include <ostream>

namespace metarec {

AccuracyMatrix::AccuracyMatrix(std::vector<std::string> names, std::size_t runs, std::vector<double> values) :
    m_names(std::move(names)),
    m_runs(runs),
    m_values(std::move(values))
{
    if (m_names.empty())
    {
        throw Error(ErrorKind::malformed_input, "accuracy matrix has no algorithms");
    }
    if (m_values.size() != m_names.size() * m_runs)
    {
        throw Error(ErrorKind::malformed_input, "accuracy matrix shape does not match its values");
    }
    for (const double v : m_values)
    {
        if (!(v >= 0.0 && v <= 1.0))
        {
            throw Error(ErrorKind::out_of_range_accuracy, "accuracy " + csv::format_double(v) + " outside [0, 1]");
        }
    }
}

double AccuracyMatrix::mean(std::size_t algorithm) const
{
    const auto values = runs_of(algorithm);
    return m_runs == 0 ? 0.0 : std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m_runs);
}

AccuracyMatrix AccuracyMatrix::permuted(std::span<const std::size_t> order) const
{
    std::vector<std::string> names;
    std::vector<double> values;
    for (const auto a : order)
    {
        names.push_back(m_names.at(a));
        const auto source = runs_of(a);
        values.insert(values.end(), source.begin(), source.end());
    }
    return AccuracyMatrix(std::move(names), m_runs, std::move(values));
}

AccuracyMatrix estimate_accuracy_matrix(
    const TabularDataset& dataset,
    const std::vector<LearnerSpec>& candidates,
    std::uint64_t seed,
    int repetitions,
    int folds)
{
    if (candidates.empty())
    {
        throw Error(ErrorKind::domain_error, "no candidate algorithms");
    }
    const auto runs = static_cast<std::size_t>(repetitions * folds);
    std::vector<double> values(candidates.size() * runs, 0.0);
    std::size_t run = 0;
    for (int rep = 0; rep < repetitions; ++rep)
    {
        const auto plan = stratified_folds(dataset, folds, derive_seed(seed, static_cast<std::uint64_t>(rep)));
        for (int fold = 0; fold < folds; ++fold, ++run)
        {
            const auto train_rows = plan.train_rows(fold);
            const auto test_rows = plan.test_rows(fold);
            const auto train = dataset.subset(train_rows);
            const auto test = dataset.subset(test_rows);
            for (std::size_t c = 0; c < candidates.size(); ++c)
            {
                const auto model = train_learner(candidates[c], train);
                values[c * runs + run] = accuracy(*model, test);
            }
        }
    }
    std::vector<std::string> names;
    for (const auto& c : candidates)
    {
        names.push_back(c.name);
    }
    return AccuracyMatrix(std::move(names), runs, std::move(values));
}

AccuracyMatrix parse_accuracy_matrix(std::string_view text)
{
    const auto rows = csv::parse(text);
    if (rows.size() < 2)
    {
        throw Error(ErrorKind::malformed_input, "accuracy matrix needs a header and at least one run");
    }
    const auto& names = rows.front();
    const auto k = names.size();
    const auto r = rows.size() - 1;
    std::vector<double> values(k * r);
    for (std::size_t run = 0; run < r; ++run)
    {
        const auto& row = rows[run + 1];
        if (row.size() != k)
        {
            throw Error(ErrorKind::malformed_input, "accuracy row " + std::to_string(run + 2) + " is ragged");
        }
        for (std::size_t a = 0; a < k; ++a)
        {
            double v = 0.0;
            if (!csv::parse_double(row[a], v))
            {
                throw Error(ErrorKind::malformed_input, "'" + row[a] + "' is not a number");
            }
            values[a * r + run] = v;
        }
    }
    return AccuracyMatrix(names, r, std::move(values));
}

AccuracyMatrix load_accuracy_matrix(const std::filesystem::path& path)
{
    return parse_accuracy_matrix(csv::read_text(path));
}

void write_accuracy_matrix(std::ostream& out, const AccuracyMatrix& matrix)
{
    csv::write_row(out, matrix.names());
    csv::Row row(matrix.algorithms());
    for (std::size_t run = 0; run < matrix.runs(); ++run)
    {
        for (std::size_t a = 0; a < matrix.algorithms(); ++a)
        {
            row[a] = csv::format_double(matrix.at(a, run));
        }
        csv::write_row(out, row);
    }
}

TargetDerivation derive_meta_target_detailed(const AccuracyMatrix& accuracies, double alpha)
{
    const auto k = accuracies.algorithms();
    if (k < 2 || accuracies.runs() < 2)
    {
        throw Error(ErrorKind::domain_error, "meta-target derivation needs k >= 2 and r >= 2");
    }
    if (!(alpha > 0.0 && alpha < 1.0))
    {
        throw Error(ErrorKind::domain_error, "alpha must lie in (0, 1)");
    }
    TargetDerivation out;
    out.reference = reference_algorithm(accuracies);
    if (k == 2)
    {
        out.test = TargetTest::wilcoxon;
        const auto result = wilcoxon_signed_rank(accuracies.runs_of(0), accuracies.runs_of(1), alpha);
        out.statistic = result.statistic;
        out.p_value = result.p_value;
        out.omnibus_rejected = result.reject;
        out.target.bits.assign(2, 1);
        if (result.reject)
        {
            out.target.bits[1 - out.reference] = 0;
        }
        return out;
    }

    const auto friedman = friedman_test(accuracies, alpha);
    out.statistic = friedman.statistic;
    out.p_value = friedman.p_value;
    out.omnibus_rejected = friedman.reject;
    out.target.bits = friedman.reject ? holm_procedure(accuracies, alpha) : std::vector<int>(k, 1);
    return out;
}

MetaTarget derive_meta_target(const AccuracyMatrix& accuracies, double alpha)
{
    return derive_meta_target_detailed(accuracies, alpha).target;
}

void write_target_table(std::ostream& out, const TargetTable& table)
{
    csv::Row header{"problem"};
    header.insert(header.end(), table.algorithms.begin(), table.algorithms.end());
    csv::write_row(out, header);
    for (std::size_t p = 0; p < table.problems.size(); ++p)
    {
        csv::Row row{table.problems[p]};
        for (const int bit : table.targets[p].bits)
        {
            row.push_back(bit ? "1" : "0");
        }
        csv::write_row(out, row);
    }
}

TargetTable parse_target_table(std::string_view text)
{
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().size() < 2)
    {
        throw Error(ErrorKind::malformed_input, "target table needs a header with problem and algorithm columns");
    }
    TargetTable table;
    table.algorithms.assign(rows.front().begin() + 1, rows.front().end());
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        const auto& row = rows[r];
        if (row.size() != rows.front().size())
        {
            throw Error(ErrorKind::malformed_input, "target row " + std::to_string(r + 1) + " is ragged");
        }
        MetaTarget target;
        for (std::size_t c = 1; c < row.size(); ++c)
        {
            if (row[c] != "0" && row[c] != "1")
            {
                throw Error(ErrorKind::malformed_input, "target bit '" + row[c] + "' is not 0 or 1");
            }
            target.bits.push_back(row[c] == "1" ? 1 : 0);
        }
        table.problems.push_back(row.front());
        table.targets.push_back(std::move(target));
    }
    return table;
}

TargetTable load_target_table(const std::filesystem::path& path)
{
    return parse_target_table(csv::read_text(path));
}

} // namespace metarec
