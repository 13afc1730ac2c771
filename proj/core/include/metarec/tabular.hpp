#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metarec {

enum class AttributeKind
{
    numeric,
    nominal,
};

struct Attribute
{
    std::string name;
    AttributeKind kind = AttributeKind::numeric;
    std::vector<std::string> categories; ///< nominal only, ordered

    bool nominal() const { return kind == AttributeKind::nominal; }
    bool numeric() const { return kind == AttributeKind::numeric; }

    static Attribute make_numeric(std::string name);
    static Attribute make_nominal(std::string name, std::vector<std::string> categories);

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Missing cells are stored as quiet NaN; nominal cells hold the category
/// index as a double.
inline constexpr double missing_value = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double value) { return std::isnan(value); }

/// Immutable base-level classification problem. Attribute values are kept
/// row-major; the target is a separate vector of class indices.
class TabularDataset
{
public:
    TabularDataset() = default;

    /// Validates the schema invariants: unique names, nominal attributes and
    /// target with at least one category, rows of the right width, category
    /// indices in range, targets observed.
    TabularDataset(
        std::string name,
        std::vector<Attribute> attributes,
        Attribute target,
        std::vector<double> cells,
        std::vector<int> labels);

    const std::string& name() const { return m_name; }
    const std::vector<Attribute>& attributes() const { return m_attributes; }
    const Attribute& attribute(std::size_t a) const { return m_attributes[a]; }
    const Attribute& target() const { return m_target; }

    std::size_t num_instances() const { return m_labels.size(); }
    std::size_t num_attributes() const { return m_attributes.size(); }
    /// Declared target categories.
    std::size_t num_classes() const { return m_target.categories.size(); }
    /// Categories that actually occur among the instances.
    std::size_t num_observed_classes() const;

    double value(std::size_t row, std::size_t attribute) const
    {
        return m_cells[row * m_attributes.size() + attribute];
    }
    std::span<const double> row(std::size_t row) const
    {
        return {m_cells.data() + row * m_attributes.size(), m_attributes.size()};
    }
    int label(std::size_t row) const { return m_labels[row]; }
    const std::vector<int>& labels() const { return m_labels; }
    const std::vector<double>& cells() const { return m_cells; }

    std::vector<std::size_t> class_counts() const;
    std::vector<std::size_t> numeric_attributes() const;
    std::vector<std::size_t> nominal_attributes() const;

    /// Same schema, the listed rows in the listed order.
    TabularDataset subset(std::span<const std::size_t> rows) const;
    TabularDataset renamed(std::string name) const;

private:
    std::string m_name;
    std::vector<Attribute> m_attributes;
    Attribute m_target;
    std::vector<double> m_cells;
    std::vector<int> m_labels;
};

enum class FileFormat
{
    csv,
    arff,
};

struct LoadOptions
{
    /// Column used as target; the last column when unset.
    std::optional<std::string> target_column;
};

/// Loads a CSV (header row required) or ARFF file. "?" and empty fields are
/// missing. CSV columns are numeric when every non-missing value parses as a
/// number and nominal otherwise; the CSV target column is always nominal.
/// Instances whose target is missing are dropped.
TabularDataset load_dataset(const std::filesystem::path& path, FileFormat format, const LoadOptions& options = {});
/// Format chosen from the file extension (.arff, anything else is CSV).
TabularDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

TabularDataset parse_csv_dataset(std::string_view text, std::string name, const LoadOptions& options = {});
TabularDataset parse_arff_dataset(std::string_view text, std::string name, const LoadOptions& options = {});

/// CSV with a header row; the target is written as the last column.
void write_csv(std::ostream& out, const TabularDataset& dataset);

/// One derived problem per nominal attribute, with that attribute and the
/// target exchanging roles. Rows whose new target is missing are dropped.
std::vector<TabularDataset> generate_datasetoids(const TabularDataset& dataset);

struct FoldPlan
{
    std::vector<int> fold_of;
    int k = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_rows(int fold) const;
    std::vector<std::size_t> train_rows(int fold) const;
};

/// Seeded shuffle, then per-class round-robin assignment. The round-robin
/// cursor carries over between classes so fold sizes also differ by at most
/// one.
FoldPlan stratified_folds(const TabularDataset& dataset, int k, std::uint64_t seed);

/// The same procedure on a bare label vector.
FoldPlan stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

} // namespace metarec
