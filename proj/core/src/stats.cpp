#include <metarec/error.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/stats.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace metarec {

ContingencyTable::ContingencyTable(std::size_t classes, std::vector<std::size_t> counts) :
    m_classes(classes),
    m_counts(std::move(counts))
{
    if (m_counts.size() != classes * classes)
    {
        throw Error(ErrorKind::length_mismatch, "contingency counts must be K x K");
    }
}

std::size_t ContingencyTable::total() const
{
    return std::accumulate(m_counts.begin(), m_counts.end(), std::size_t{0});
}

std::size_t ContingencyTable::row_total(std::size_t i) const
{
    std::size_t sum = 0;
    for (std::size_t j = 0; j < m_classes; ++j)
    {
        sum += count(i, j);
    }
    return sum;
}

std::size_t ContingencyTable::column_total(std::size_t j) const
{
    std::size_t sum = 0;
    for (std::size_t i = 0; i < m_classes; ++i)
    {
        sum += count(i, j);
    }
    return sum;
}

ContingencyTable build_contingency(
    std::span<const int> first,
    std::span<const int> second,
    std::span<const int> truth,
    std::size_t classes)
{
    if (first.size() != second.size() || first.size() != truth.size())
    {
        throw Error(ErrorKind::length_mismatch, "prediction and truth sequences differ in length");
    }
    ContingencyTable table(classes);
    const auto in_range = [classes](int label) { return label >= 0 && static_cast<std::size_t>(label) < classes; };
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        if (!in_range(first[i]) || !in_range(second[i]) || !in_range(truth[i]))
        {
            throw Error(ErrorKind::domain_error, "label outside [0, K)");
        }
        if (first[i] != truth[i] || second[i] != truth[i])
        {
            table.add(static_cast<std::size_t>(first[i]), static_cast<std::size_t>(second[i]));
        }
    }
    return table;
}

double kappa(const ContingencyTable& table)
{
    const auto n = static_cast<double>(table.total());
    if (n == 0.0)
    {
        throw Error(ErrorKind::undefined_kappa, "no error instances");
    }
    double theta1 = 0.0;
    double theta2 = 0.0;
    for (std::size_t i = 0; i < table.classes(); ++i)
    {
        theta1 += static_cast<double>(table.count(i, i)) / n;
        theta2 += (static_cast<double>(table.row_total(i)) / n) * (static_cast<double>(table.column_total(i)) / n);
    }
    if (std::abs(1.0 - theta2) < 1e-15)
    {
        throw Error(ErrorKind::undefined_kappa, "chance agreement equals 1");
    }
    return std::clamp((theta1 - theta2) / (1.0 - theta2), -1.0, 1.0);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int max_iterations = 1000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny)
    {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m)
    {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny)
        {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny)
        {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny)
        {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny)
        {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps)
        {
            break;
        }
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
    if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0)
    {
        throw Error(ErrorKind::domain_error, "incomplete beta arguments out of range");
    }
    if (x == 0.0 || x == 1.0)
    {
        return x;
    }
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
    {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double regularized_upper_gamma(double a, double x)
{
    if (a <= 0.0 || x < 0.0)
    {
        throw Error(ErrorKind::domain_error, "incomplete gamma arguments out of range");
    }
    if (x == 0.0)
    {
        return 1.0;
    }
    const double log_front = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0)
    {
        // series for the lower function
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 10000; ++n)
        {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17)
            {
                break;
            }
        }
        return std::max(0.0, 1.0 - sum * std::exp(log_front));
    }
    // continued fraction for the upper function (Lentz)
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i)
    {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
        {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny)
        {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16)
        {
            break;
        }
    }
    return std::exp(log_front) * h;
}

double student_t_cdf(double t, double df)
{
    if (df <= 0.0)
    {
        throw Error(ErrorKind::domain_error, "degrees of freedom must be positive");
    }
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double df, double p)
{
    if (!(df >= 1.0) || !(p > 0.0 && p < 1.0))
    {
        throw Error(ErrorKind::domain_error, "t_quantile needs df >= 1 and 0 < p < 1");
    }
    if (p == 0.5)
    {
        return 0.0;
    }
    if (p < 0.5)
    {
        return -t_quantile(df, 1.0 - p);
    }
    // bracket, then bisect on the CDF; the CDF is monotone so this converges
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_cdf(hi, df) < p)
    {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
        {
            break;
        }
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i)
    {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p)
        {
            lo = mid;
        }
        else
        {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double chi_square_survival(double x, double df)
{
    if (df <= 0.0)
    {
        throw Error(ErrorKind::domain_error, "degrees of freedom must be positive");
    }
    if (x <= 0.0)
    {
        return 1.0;
    }
    return regularized_upper_gamma(0.5 * df, 0.5 * x);
}

double normal_survival(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double diversity_threshold(std::size_t n, double alpha)
{
    if (n <= 2)
    {
        throw Error(ErrorKind::domain_error, "diversity threshold needs more than two error instances");
    }
    if (!(alpha > 0.0 && alpha < 1.0))
    {
        throw Error(ErrorKind::domain_error, "alpha must lie in (0, 1)");
    }
    // the filter asks for the same few (n, alpha) pairs over and over
    thread_local std::map<std::pair<std::size_t, double>, double> cache;
    const auto key = std::make_pair(n, alpha);
    if (const auto it = cache.find(key); it != cache.end())
    {
        return it->second;
    }
    const double df = static_cast<double>(n) - 2.0;
    const double tc = t_quantile(df, 1.0 - alpha / 2.0);
    const double delta = tc / std::sqrt(df + tc * tc);
    cache.emplace(key, delta);
    return delta;
}

DiversityVerdict diversity_verdict(const ContingencyTable& table, double alpha)
{
    DiversityVerdict verdict;
    verdict.n = table.total();
    if (verdict.n <= 2)
    {
        return verdict;
    }
    try
    {
        verdict.kappa = kappa(table);
        verdict.defined = true;
    }
    catch (const Error& e)
    {
        if (e.kind() != ErrorKind::undefined_kappa)
        {
            throw;
        }
        return verdict;
    }
    verdict.delta = diversity_threshold(verdict.n, alpha);
    verdict.diverse = std::abs(verdict.kappa) < 1.0 && std::abs(verdict.kappa) < verdict.delta;
    return verdict;
}

std::vector<double> average_ranks(std::span<const double> values)
{
    const auto k = values.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(k);
    std::size_t i = 0;
    while (i < k)
    {
        std::size_t j = i;
        while (j + 1 < k && values[order[j + 1]] == values[order[i]])
        {
            ++j;
        }
        // positions i..j (0-based) share the mean of ranks i+1..j+1
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m)
        {
            ranks[order[m]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

std::vector<double> mean_ranks(const AccuracyMatrix& accuracies)
{
    const auto k = accuracies.algorithms();
    const auto r = accuracies.runs();
    std::vector<double> sums(k, 0.0);
    std::vector<double> column(k);
    for (std::size_t run = 0; run < r; ++run)
    {
        for (std::size_t a = 0; a < k; ++a)
        {
            column[a] = accuracies.at(a, run);
        }
        const auto ranks = average_ranks(column);
        for (std::size_t a = 0; a < k; ++a)
        {
            sums[a] += ranks[a];
        }
    }
    for (auto& s : sums)
    {
        s /= static_cast<double>(r);
    }
    return sums;
}

ComparisonResult friedman_test(const AccuracyMatrix& accuracies, double alpha)
{
    const auto k = accuracies.algorithms();
    const auto r = accuracies.runs();
    if (k < 3 || r < 2)
    {
        throw Error(ErrorKind::domain_error, "Friedman test needs k >= 3 algorithms and r >= 2 runs");
    }
    const auto ranks = mean_ranks(accuracies);
    const double kd = static_cast<double>(k);
    const double rd = static_cast<double>(r);
    double sum_sq = 0.0;
    for (const double rank : ranks)
    {
        sum_sq += rank * rank;
    }
    ComparisonResult result;
    result.statistic = std::max(0.0, 12.0 * rd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0));
    result.p_value = std::clamp(chi_square_survival(result.statistic, kd - 1.0), 0.0, 1.0);
    result.reject = result.p_value < alpha;
    return result;
}

std::size_t reference_algorithm(const AccuracyMatrix& accuracies)
{
    std::size_t best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < accuracies.algorithms(); ++a)
    {
        const double mean = accuracies.mean(a);
        if (mean > best_mean)
        {
            best_mean = mean;
            best = a;
        }
    }
    return best;
}

std::vector<int> holm_procedure(const AccuracyMatrix& accuracies, double alpha)
{
    const auto k = accuracies.algorithms();
    const auto r = accuracies.runs();
    if (k < 2 || r < 2)
    {
        throw Error(ErrorKind::domain_error, "Holm procedure needs k >= 2 algorithms and r >= 2 runs");
    }
    const auto ranks = mean_ranks(accuracies);
    const auto reference = reference_algorithm(accuracies);
    const double kd = static_cast<double>(k);
    const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(r)));

    std::vector<std::pair<double, std::size_t>> tests;
    for (std::size_t a = 0; a < k; ++a)
    {
        if (a == reference)
        {
            continue;
        }
        const double z = (ranks[a] - ranks[reference]) / se;
        tests.emplace_back(std::min(1.0, 2.0 * normal_survival(std::abs(z))), a);
    }
    std::stable_sort(tests.begin(), tests.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

    std::vector<int> appropriate(k, 1);
    const auto m = tests.size();
    for (std::size_t step = 0; step < m; ++step)
    {
        const double adjusted_alpha = alpha / static_cast<double>(m - step);
        if (!(tests[step].first < adjusted_alpha))
        {
            break;
        }
        appropriate[tests[step].second] = 0;
    }
    return appropriate;
}

ComparisonResult wilcoxon_signed_rank(std::span<const double> first, std::span<const double> second, double alpha)
{
    if (first.size() != second.size())
    {
        throw Error(ErrorKind::length_mismatch, "paired samples differ in length");
    }
    std::vector<double> differences;
    for (std::size_t i = 0; i < first.size(); ++i)
    {
        const double d = first[i] - second[i];
        if (d != 0.0)
        {
            differences.push_back(d);
        }
    }
    ComparisonResult result;
    const auto n = differences.size();
    if (n == 0)
    {
        return result;
    }
    std::vector<double> magnitudes(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        magnitudes[i] = -std::abs(differences[i]); // average_ranks ranks the largest first
    }
    const auto ranks = average_ranks(magnitudes);

    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (differences[i] > 0.0)
        {
            w_plus += ranks[i];
        }
    }
    // tie correction: sum over tie groups of (t^3 - t)
    std::vector<double> sorted(magnitudes);
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;)
    {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i])
        {
            ++j;
        }
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (variance <= 0.0)
    {
        return result;
    }
    const double deviation = std::max(0.0, std::abs(w_plus - mean) - 0.5);
    const double z = deviation / std::sqrt(variance);
    result.statistic = w_plus;
    result.p_value = std::min(1.0, 2.0 * normal_survival(z));
    result.reject = result.p_value < alpha;
    return result;
}

} // namespace metarec
