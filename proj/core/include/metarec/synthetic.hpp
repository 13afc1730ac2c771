#pragma once

#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/tabular.hpp>

#include <cstdint>
#include <string_view>
#include <vector>

namespace metarec {

/// Generating mechanism of a synthetic classification problem. Each one
/// favours a different kind of learner.
enum class Concept
{
    gaussian,    ///< class-conditional Gaussian clouds
    rules,       ///< axis-aligned threshold rules
    categorical, ///< independent nominal evidence per class
    checkerboard,///< parity of binned attributes
    noise,       ///< labels independent of the attributes
};

std::string_view to_string(Concept concept_kind);

struct SyntheticSpec
{
    Concept concept_kind = Concept::gaussian;
    std::size_t instances = 120;
    std::size_t classes = 2;
    std::size_t numeric = 4;
    std::size_t nominal = 1;
    double label_noise = 0.05;
    double missing_rate = 0.0;
    double separation = 1.5;
};

/// Draws a spec with every property varied from the seed.
SyntheticSpec random_spec(std::uint64_t seed);

TabularDataset synthetic_problem(const SyntheticSpec& spec, std::uint64_t seed, std::string name = "synthetic");

struct MetaCorpus
{
    std::vector<TabularDataset> problems;
    std::vector<MetaFeatureGroupSet> features;
    std::vector<AccuracyMatrix> accuracies;
    TargetTable targets;
};

/// Generates `count` problems, extracts every meta-feature family, estimates
/// the demo candidates by 5 x 10-fold cross-validation and derives the
/// meta-targets at `alpha`.
MetaCorpus build_synthetic_corpus(std::size_t count, std::uint64_t seed, double alpha = 0.05);

} // namespace metarec
