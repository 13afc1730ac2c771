#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace metarec {

class AccuracyMatrix;

/// K x K table of the labels two models assigned to the instances that at
/// least one of them got wrong.
class ContingencyTable
{
public:
    explicit ContingencyTable(std::size_t classes) : m_classes(classes), m_counts(classes * classes, 0) {}

    /// Counts must be row-major K x K.
    ContingencyTable(std::size_t classes, std::vector<std::size_t> counts);

    std::size_t classes() const { return m_classes; }
    std::size_t count(std::size_t i, std::size_t j) const { return m_counts[i * m_classes + j]; }
    void add(std::size_t i, std::size_t j) { ++m_counts[i * m_classes + j]; }

    std::size_t total() const;
    std::size_t row_total(std::size_t i) const;
    std::size_t column_total(std::size_t j) const;

private:
    std::size_t m_classes;
    std::vector<std::size_t> m_counts;
};

/// Cell (i, j) counts the instances where the first model predicted class i
/// and the second class j, restricted to instances where either prediction
/// differs from the truth.
ContingencyTable build_contingency(
    std::span<const int> first,
    std::span<const int> second,
    std::span<const int> truth,
    std::size_t classes);

/// (theta1 - theta2) / (1 - theta2) with theta1 the diagonal mass and theta2
/// the chance agreement of the marginals. Throws UndefinedKappa when the
/// table is empty or theta2 == 1.
double kappa(const ContingencyTable& table);

/// Student-t quantile, obtained by inverting the CDF written through the
/// regularized incomplete beta function.
double t_quantile(double df, double p);

/// Two-sided critical kappa for `n` error instances:
/// t_c / sqrt(n - 2 + t_c^2) with t_c the (1 - alpha/2) quantile on n - 2
/// degrees of freedom.
double diversity_threshold(std::size_t n, double alpha);

struct DiversityVerdict
{
    double kappa = 0.0;  ///< 0 when undefined
    double delta = 0.0;  ///< 0 when n <= 2
    bool diverse = false;
    std::size_t n = 0;
    bool defined = false;
};

/// Diverse iff |kappa| < delta. Fewer than three error instances, an
/// undefined kappa or |kappa| == 1 count as not diverse.
DiversityVerdict diversity_verdict(const ContingencyTable& table, double alpha);

struct ComparisonResult
{
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::vector<int> appropriate; ///< filled by the post-hoc step
};

/// Average ranks within one run, rank 1 for the largest value.
std::vector<double> average_ranks(std::span<const double> values);

/// Mean rank of every algorithm over all runs.
std::vector<double> mean_ranks(const AccuracyMatrix& accuracies);

/// Friedman chi-square over the per-run ranks; p from chi-square(k - 1).
ComparisonResult friedman_test(const AccuracyMatrix& accuracies, double alpha);

/// Index of the algorithm with the highest mean accuracy (lowest index on
/// ties).
std::size_t reference_algorithm(const AccuracyMatrix& accuracies);

/// Holm step-down against the highest-mean reference using rank-difference
/// z statistics with standard error sqrt(k (k + 1) / (6 r)). Returns 1 for
/// the reference and for every algorithm not significantly different from it.
std::vector<int> holm_procedure(const AccuracyMatrix& accuracies, double alpha);

/// Two-sided paired Wilcoxon signed-rank test (normal approximation with tie
/// and continuity correction). Zero differences are dropped.
ComparisonResult wilcoxon_signed_rank(std::span<const double> first, std::span<const double> second, double alpha);

// Distribution helpers.
double regularized_incomplete_beta(double a, double b, double x);
double regularized_upper_gamma(double a, double x);
double student_t_cdf(double t, double df);
double chi_square_survival(double x, double df);
double normal_survival(double z);

} // namespace metarec
