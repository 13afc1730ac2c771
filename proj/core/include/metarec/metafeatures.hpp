#pragma once

#include <metarec/learners.hpp>
#include <metarec/tabular.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace metarec {

/// Meta-feature families:
///   1 statistical and information-theoretic
///   2 model structure (induced decision tree)
///   3 landmarking
///   4 problem complexity
///   5 structural information (item-set supports)
using FamilyId = int;

inline constexpr int family_count = 5;
inline constexpr std::array<std::size_t, family_count> family_arity = {31, 15, 6, 7, 18};

std::string_view family_name(FamilyId family);
const std::vector<std::string>& measure_names(FamilyId family);

struct MetaFeatureVector
{
    FamilyId family = 1;
    std::vector<std::string> names;
    std::vector<double> values;
    /// Set where the measure was undefined and the 0 sentinel was emitted.
    std::vector<bool> imputed;

    std::size_t size() const { return values.size(); }
};

struct MetaFeatureGroupSet
{
    std::string problem;
    std::array<MetaFeatureVector, family_count> families;

    const MetaFeatureVector& family(FamilyId id) const { return families[static_cast<std::size_t>(id - 1)]; }
};

MetaFeatureVector extract_statistical(const TabularDataset& dataset);
MetaFeatureVector extract_model_structure(const TabularDataset& dataset, const TreeParams& params = {});
/// Requires at least 10 instances and two observed classes.
MetaFeatureVector extract_landmarking(const TabularDataset& dataset, std::uint64_t seed);

struct ComplexityOptions
{
    /// Larger problems are reduced to a seeded stratified sample of this size
    /// before the quadratic-cost measures run.
    std::size_t max_instances = 1000;
};

/// Requires two observed classes. `seed` drives the interpolation pairs and
/// the optional subsample.
MetaFeatureVector extract_complexity(const TabularDataset& dataset, std::uint64_t seed, const ComplexityOptions& options = {});
MetaFeatureVector extract_structural(const TabularDataset& dataset);

MetaFeatureGroupSet extract_all(const TabularDataset& dataset, std::uint64_t seed);

/// Mean absolute Pearson correlation between every (measure of family a,
/// measure of family b) pair across problems; constant measures skipped.
/// Needs at least 3 problems.
std::array<std::array<double, family_count>, family_count> family_correlation(
    const std::vector<MetaFeatureGroupSet>& features);

/// Meta-feature table: one row per problem, "problem" then columns named
/// "<family>.<measure>". The sidecar has the same layout with 0/1 imputation
/// flags.
void write_feature_table(std::ostream& out, const std::vector<MetaFeatureGroupSet>& features);
void write_imputation_table(std::ostream& out, const std::vector<MetaFeatureGroupSet>& features);
std::vector<MetaFeatureGroupSet> parse_feature_table(std::string_view text);
std::vector<MetaFeatureGroupSet> load_feature_table(const std::filesystem::path& path);

/// Type-7 sample quantile (linear interpolation) of an unsorted sample.
double quantile(std::vector<double> values, double p);

} // namespace metarec
