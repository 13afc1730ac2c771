#include "fixtures.hpp"

#include <metarec/error.hpp>
#include <metarec/metatarget.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace metarec;
using namespace metarec::testing;

namespace {

// Friedman + Holm written from the textbook definitions, p-values from Boost.
std::vector<int> oracle_target(const AccuracyMatrix& m, double alpha)
{
    const auto k = m.algorithms();
    const auto r = m.runs();
    std::vector<double> rank_sum(k, 0.0);
    for (std::size_t run = 0; run < r; ++run)
    {
        for (std::size_t a = 0; a < k; ++a)
        {
            double greater = 0.0, equal = 0.0;
            for (std::size_t b = 0; b < k; ++b)
            {
                greater += m.at(b, run) > m.at(a, run) ? 1.0 : 0.0;
                equal += m.at(b, run) == m.at(a, run) ? 1.0 : 0.0;
            }
            rank_sum[a] += 1.0 + greater + (equal - 1.0) / 2.0;
        }
    }
    const double kd = static_cast<double>(k);
    const double rd = static_cast<double>(r);
    std::vector<double> mean_rank(k);
    double sum_sq = 0.0;
    for (std::size_t a = 0; a < k; ++a)
    {
        mean_rank[a] = rank_sum[a] / rd;
        sum_sq += mean_rank[a] * mean_rank[a];
    }
    const double chi2 = 12.0 * rd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(kd - 1.0), chi2));
    if (!(p < alpha))
    {
        return std::vector<int>(k, 1);
    }
    std::size_t reference = 0;
    for (std::size_t a = 1; a < k; ++a)
    {
        if (m.mean(a) > m.mean(reference))
        {
            reference = a;
        }
    }
    const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * rd));
    std::vector<std::pair<double, std::size_t>> tests;
    for (std::size_t a = 0; a < k; ++a)
    {
        if (a != reference)
        {
            const double z = std::abs(mean_rank[a] - mean_rank[reference]) / se;
            tests.emplace_back(2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), z)), a);
        }
    }
    std::stable_sort(tests.begin(), tests.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<int> bits(k, 1);
    for (std::size_t step = 0; step < tests.size(); ++step)
    {
        if (!(tests[step].first < alpha / static_cast<double>(tests.size() - step)))
        {
            break;
        }
        bits[tests[step].second] = 0;
    }
    return bits;
}

AccuracyMatrix random_matrix(Rng& rng, std::size_t k, std::size_t r)
{
    std::vector<std::string> names;
    std::vector<double> values;
    for (std::size_t a = 0; a < k; ++a)
    {
        names.push_back("a" + std::to_string(a));
        const double level = rng.uniform(0.6, 0.9);
        for (std::size_t run = 0; run < r; ++run)
        {
            values.push_back(std::clamp(level + rng.normal(0.0, 0.05), 0.0, 1.0));
        }
    }
    return AccuracyMatrix(names, r, values);
}

} // namespace

TEST(AccuracyMatrix, ValidatesShapeAndRange)
{
    EXPECT_THROW(AccuracyMatrix({}, 1, {}), Error);
    EXPECT_THROW(AccuracyMatrix({"a"}, 2, {0.5}), Error);
    try
    {
        AccuracyMatrix({"a"}, 1, {1.2});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::out_of_range_accuracy);
    }
}

TEST(AccuracyMatrix, CsvRoundTripAndErrors)
{
    Rng rng(1);
    const auto m = random_matrix(rng, 3, 7);
    std::ostringstream out;
    write_accuracy_matrix(out, m);
    const auto back = parse_accuracy_matrix(out.str());
    EXPECT_EQ(back.names(), m.names());
    ASSERT_EQ(back.runs(), 7u);
    for (std::size_t a = 0; a < 3; ++a)
    {
        for (std::size_t r = 0; r < 7; ++r)
        {
            EXPECT_EQ(back.at(a, r), m.at(a, r));
        }
    }
    EXPECT_THROW(parse_accuracy_matrix("a,b\n"), Error);
    EXPECT_THROW(parse_accuracy_matrix("a,b\n0.5\n"), Error);
    EXPECT_THROW(parse_accuracy_matrix("a,b\n0.5,x\n"), Error);
    EXPECT_THROW(parse_accuracy_matrix("a,b\n0.5,1.5\n"), Error);
}

TEST(AccuracyMatrix, PermutedReordersColumns)
{
    const AccuracyMatrix m({"a", "b", "c"}, 1, {0.1, 0.2, 0.3});
    const std::vector<std::size_t> order{2, 0, 1};
    const auto p = m.permuted(order);
    EXPECT_EQ(p.names(), (std::vector<std::string>{"c", "a", "b"}));
    EXPECT_DOUBLE_EQ(p.at(0, 0), 0.3);
}

TEST(MetaTarget, MatchesIndependentOracle)
{
    Rng rng(7);
    int rejected = 0;
    for (int trial = 0; trial < 300; ++trial)
    {
        const auto k = 3 + rng.index(6);
        const auto r = 5 + rng.index(50);
        const auto m = random_matrix(rng, k, r);
        const auto detail = derive_meta_target_detailed(m, 0.05);
        EXPECT_EQ(detail.target.bits, oracle_target(m, 0.05)) << "trial " << trial;
        rejected += detail.omnibus_rejected ? 1 : 0;
    }
    // both branches are exercised
    EXPECT_GT(rejected, 10);
    EXPECT_LT(rejected, 300);
}

TEST(MetaTarget, ReferenceIsAlwaysAppropriate)
{
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto m = random_matrix(rng, 2 + rng.index(7), 10 + rng.index(40));
        const auto detail = derive_meta_target_detailed(m, 0.05);
        EXPECT_EQ(detail.target.bits[detail.reference], 1);
        EXPECT_EQ(detail.target.bits.size(), m.algorithms());
    }
}

TEST(MetaTarget, PermutationEquivariant)
{
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto k = 3 + rng.index(5);
        const auto m = random_matrix(rng, k, 30);
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
        const auto base = derive_meta_target(m, 0.05).bits;
        const auto permuted = derive_meta_target(m.permuted(order), 0.05).bits;
        for (std::size_t i = 0; i < k; ++i)
        {
            EXPECT_EQ(permuted[i], base[order[i]]);
        }
    }
}

TEST(MetaTarget, EqualAlgorithmsAreAllAppropriate)
{
    const AccuracyMatrix m({"a", "b", "c"}, 4, {0.7, 0.8, 0.9, 0.6, 0.7, 0.8, 0.9, 0.6, 0.7, 0.8, 0.9, 0.6});
    const auto detail = derive_meta_target_detailed(m, 0.05);
    EXPECT_FALSE(detail.omnibus_rejected);
    EXPECT_EQ(detail.target.bits, (std::vector<int>{1, 1, 1}));
}

TEST(MetaTarget, TwoCandidatesUseWilcoxon)
{
    std::vector<double> values;
    for (int i = 0; i < 20; ++i) values.push_back(0.9 - 0.001 * i);
    for (int i = 0; i < 20; ++i) values.push_back(0.6 + 0.001 * i);
    const auto detail = derive_meta_target_detailed(AccuracyMatrix({"a", "b"}, 20, values), 0.05);
    EXPECT_EQ(detail.test, TargetTest::wilcoxon);
    EXPECT_EQ(detail.target.bits, (std::vector<int>{1, 0}));
}

TEST(MetaTarget, DomainErrors)
{
    EXPECT_THROW(derive_meta_target(AccuracyMatrix({"a"}, 3, {0.1, 0.2, 0.3}), 0.05), Error);
    EXPECT_THROW(derive_meta_target(AccuracyMatrix({"a", "b"}, 1, {0.1, 0.2}), 0.05), Error);
    EXPECT_THROW(derive_meta_target(AccuracyMatrix({"a", "b"}, 2, {0.1, 0.2, 0.3, 0.4}), 1.0), Error);
}

TEST(EstimateAccuracy, FiftyRunsPerCandidate)
{
    const auto d = blobs(60, 2, 2.0, 3);
    const auto m = estimate_accuracy_matrix(d, demo_candidates(), 5);
    EXPECT_EQ(m.runs(), 50u);
    EXPECT_EQ(m.algorithms(), demo_candidates().size());
    const auto again = estimate_accuracy_matrix(d, demo_candidates(), 5);
    for (std::size_t a = 0; a < m.algorithms(); ++a)
    {
        for (std::size_t r = 0; r < m.runs(); ++r)
        {
            EXPECT_EQ(m.at(a, r), again.at(a, r));
            EXPECT_GE(m.at(a, r), 0.0);
            EXPECT_LE(m.at(a, r), 1.0);
        }
    }
    EXPECT_THROW(estimate_accuracy_matrix(d, {}, 5), Error);
}

TEST(TargetTable, RoundTripAndValidation)
{
    TargetTable t{{"x", "y"}, {"p1", "p2"}, {MetaTarget{{1, 0}}, MetaTarget{{1, 1}}}};
    std::ostringstream out;
    write_target_table(out, t);
    EXPECT_EQ(out.str(), "problem,x,y\np1,1,0\np2,1,1\n");
    const auto back = parse_target_table(out.str());
    EXPECT_EQ(back.algorithms, t.algorithms);
    EXPECT_EQ(back.problems, t.problems);
    EXPECT_EQ(back.targets, t.targets);
    EXPECT_THROW(parse_target_table("problem\n"), Error);
    EXPECT_THROW(parse_target_table("problem,x\np,2\n"), Error);
    EXPECT_THROW(parse_target_table("problem,x\np\n"), Error);
}
