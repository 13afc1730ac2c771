#include <metarec/csv.hpp>
#include <metarec/error.hpp>
#include <metarec/metadata.hpp>

#include <algorithm>
#include <ostream>

namespace metarec {

std::string FamilyCombo::label() const
{
    std::string out = "{";
    for (std::size_t i = 0; i < members.size(); ++i)
    {
        out += (i ? "," : "") + std::to_string(members[i]);
    }
    return out + "}";
}

std::vector<FamilyCombo> feature_combinations(int q)
{
    if (q < 1 || q > 20)
    {
        throw Error(ErrorKind::domain_error, "family count must lie in [1, 20]");
    }
    std::vector<FamilyCombo> combos;
    for (int size = 1; size <= q; ++size)
    {
        // lexicographic enumeration of size-subsets via a selection mask
        std::vector<bool> pick(static_cast<std::size_t>(q), false);
        std::fill(pick.begin(), pick.begin() + size, true);
        do
        {
            FamilyCombo combo;
            for (int f = 0; f < q; ++f)
            {
                if (pick[static_cast<std::size_t>(f)])
                {
                    combo.members.push_back(f + 1);
                }
            }
            combo.id = static_cast<int>(combos.size()) + 1;
            combos.push_back(std::move(combo));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return combos;
}

std::vector<double> combo_features(const MetaFeatureGroupSet& features, const FamilyCombo& combo)
{
    std::vector<double> out;
    for (const auto f : combo.members)
    {
        if (f < 1 || f > family_count)
        {
            throw Error(ErrorKind::schema_mismatch, "combo references unknown family " + std::to_string(f));
        }
        const auto& vector = features.family(f);
        if (vector.size() != family_arity[static_cast<std::size_t>(f - 1)])
        {
            throw Error(ErrorKind::arity_mismatch, "family " + std::to_string(f) + " of '" + features.problem + "' has the wrong arity");
        }
        out.insert(out.end(), vector.values.begin(), vector.values.end());
    }
    return out;
}

std::vector<std::string> combo_feature_names(const FamilyCombo& combo)
{
    std::vector<std::string> out;
    for (const auto f : combo.members)
    {
        for (const auto& name : measure_names(f))
        {
            out.push_back(std::to_string(f) + "." + name);
        }
    }
    return out;
}

MetaDataset assemble_meta_dataset(
    const std::vector<MetaFeatureGroupSet>& features,
    const TargetTable& targets,
    const FamilyCombo& combo)
{
    if (features.size() != targets.targets.size())
    {
        throw Error(ErrorKind::length_mismatch, "meta-features and meta-targets cover different numbers of problems");
    }
    MetaDataset meta;
    meta.combo = combo;
    meta.feature_names = combo_feature_names(combo);
    meta.algorithms = targets.algorithms;
    for (std::size_t p = 0; p < features.size(); ++p)
    {
        if (targets.targets[p].bits.size() != targets.algorithms.size())
        {
            throw Error(ErrorKind::arity_mismatch, "meta-target of problem " + std::to_string(p) + " has the wrong number of bits");
        }
        meta.problems.push_back(features[p].problem);
        meta.features.push_back(combo_features(features[p], combo));
        meta.targets.push_back(targets.targets[p].bits);
    }
    return meta;
}

std::vector<BinaryMetaDataset> br_transform(const MetaDataset& meta)
{
    std::vector<BinaryMetaDataset> out(meta.algorithms.size());
    for (std::size_t j = 0; j < out.size(); ++j)
    {
        out[j].algorithm = j;
        out[j].features = meta.features;
        out[j].bits.reserve(meta.rows());
        for (const auto& row : meta.targets)
        {
            out[j].bits.push_back(row[j]);
        }
    }
    return out;
}

void write_meta_dataset(std::ostream& out, const MetaDataset& meta)
{
    csv::Row header{"problem"};
    header.insert(header.end(), meta.feature_names.begin(), meta.feature_names.end());
    header.insert(header.end(), meta.algorithms.begin(), meta.algorithms.end());
    csv::write_row(out, header);
    for (std::size_t r = 0; r < meta.rows(); ++r)
    {
        csv::Row row{meta.problems[r]};
        for (const double v : meta.features[r])
        {
            row.push_back(csv::format_double(v));
        }
        for (const int bit : meta.targets[r])
        {
            row.push_back(bit ? "1" : "0");
        }
        csv::write_row(out, row);
    }
}

} // namespace metarec
