#pragma once

#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace metarec {

struct FamilyCombo
{
    std::vector<FamilyId> members; ///< ascending
    int id = 0;                    ///< 1-based position in feature_combinations()

    std::string label() const; ///< e.g. "{1,3,5}"
    friend bool operator==(const FamilyCombo&, const FamilyCombo&) = default;
};

/// All 2^q - 1 non-empty subsets of {1..q}, by size and then
/// lexicographically. Combo ids follow that order.
std::vector<FamilyCombo> feature_combinations(int q);

struct MetaDataset
{
    FamilyCombo combo;
    std::vector<std::string> feature_names;
    std::vector<std::string> algorithms;
    std::vector<std::string> problems;
    std::vector<std::vector<double>> features;
    std::vector<std::vector<int>> targets;

    std::size_t rows() const { return features.size(); }
};

struct BinaryMetaDataset
{
    std::size_t algorithm = 0;
    std::vector<std::vector<double>> features;
    std::vector<int> bits;
};

/// Feature vector of one problem under a combo: the member families
/// concatenated in ascending order.
std::vector<double> combo_features(const MetaFeatureGroupSet& features, const FamilyCombo& combo);
std::vector<std::string> combo_feature_names(const FamilyCombo& combo);

MetaDataset assemble_meta_dataset(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const FamilyCombo& combo);

std::vector<BinaryMetaDataset> br_transform(const MetaDataset& meta);

/// "problem", the feature columns, then one 0/1 column per algorithm.
void write_meta_dataset(std::ostream& out, const MetaDataset& meta);

} // namespace metarec
