#pragma once

#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/random.hpp>
#include <metarec/tabular.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <unistd.h>
#include <string>
#include <vector>

namespace metarec::testing {

inline Attribute num(const std::string& name)
{
    return Attribute::make_numeric(name);
}

inline Attribute nom(const std::string& name, std::vector<std::string> categories)
{
    return Attribute::make_nominal(name, std::move(categories));
}

inline Attribute binary_class()
{
    return nom("class", {"a", "b"});
}

/// Numeric dataset from rows of values and labels.
inline TabularDataset numeric_dataset(
    const std::vector<std::vector<double>>& rows,
    const std::vector<int>& labels,
    std::size_t classes = 2)
{
    std::vector<Attribute> attributes;
    for (std::size_t a = 0; a < (rows.empty() ? 0 : rows.front().size()); ++a)
    {
        attributes.push_back(num("x" + std::to_string(a + 1)));
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < classes; ++c)
    {
        names.push_back("c" + std::to_string(c));
    }
    std::vector<double> cells;
    for (const auto& row : rows)
    {
        cells.insert(cells.end(), row.begin(), row.end());
    }
    return TabularDataset("fixture", attributes, nom("class", names), cells, labels);
}

/// Two Gaussian blobs in `dims` dimensions, `n` rows, separated by `gap`.
inline TabularDataset blobs(std::size_t n, std::size_t dims, double gap, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i)
    {
        const int label = static_cast<int>(i % 2);
        std::vector<double> row;
        for (std::size_t d = 0; d < dims; ++d)
        {
            row.push_back(rng.normal(label * gap, 1.0));
        }
        rows.push_back(row);
        labels.push_back(label);
    }
    return numeric_dataset(rows, labels);
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        m_path = std::filesystem::temp_directory_path() /
            ("metarec-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(m_path);
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return m_path; }
    std::filesystem::path operator/(const std::string& name) const { return m_path / name; }

private:
    std::filesystem::path m_path;
};

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Meta-level corpus without any base-level work: random meta-features where
/// algorithm j is appropriate when measure j of family 1 (or family 3 for odd
/// j) is positive, with a little label noise.
struct FakeMetaCorpus
{
    std::vector<MetaFeatureGroupSet> features;
    TargetTable targets;
};

inline FakeMetaCorpus fake_meta_corpus(std::size_t problems, std::size_t algorithms, std::uint64_t seed, double noise = 0.05)
{
    Rng rng(seed);
    FakeMetaCorpus corpus;
    for (std::size_t j = 0; j < algorithms; ++j)
    {
        corpus.targets.algorithms.push_back("alg" + std::to_string(j + 1));
    }
    for (std::size_t p = 0; p < problems; ++p)
    {
        MetaFeatureGroupSet set;
        set.problem = "problem-" + std::to_string(p + 1);
        for (FamilyId f = 1; f <= family_count; ++f)
        {
            auto& v = set.families[static_cast<std::size_t>(f - 1)];
            v.family = f;
            v.names = measure_names(f);
            for (std::size_t m = 0; m < v.names.size(); ++m)
            {
                v.values.push_back(rng.normal());
                v.imputed.push_back(false);
            }
        }
        MetaTarget target;
        for (std::size_t j = 0; j < algorithms; ++j)
        {
            const auto& source = set.families[j % 2 == 0 ? 0 : 2];
            int bit = source.values[j % source.size()] > 0.0 ? 1 : 0;
            if (rng.bernoulli(noise))
            {
                bit = 1 - bit;
            }
            target.bits.push_back(bit);
        }
        corpus.targets.problems.push_back(set.problem);
        corpus.targets.targets.push_back(std::move(target));
        corpus.features.push_back(std::move(set));
    }
    return corpus;
}

} // namespace metarec::testing
