#include <metarec/csv.hpp>
#include <metarec/error.hpp>
#include <metarec/random.hpp>
#include <metarec/tabular.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace metarec {

Attribute Attribute::make_numeric(std::string name)
{
    return Attribute{std::move(name), AttributeKind::numeric, {}};
}

Attribute Attribute::make_nominal(std::string name, std::vector<std::string> categories)
{
    return Attribute{std::move(name), AttributeKind::nominal, std::move(categories)};
}

TabularDataset::TabularDataset(
    std::string name,
    std::vector<Attribute> attributes,
    Attribute target,
    std::vector<double> cells,
    std::vector<int> labels) :
    m_name(std::move(name)),
    m_attributes(std::move(attributes)),
    m_target(std::move(target)),
    m_cells(std::move(cells)),
    m_labels(std::move(labels))
{
    if (!m_target.nominal())
    {
        throw Error(ErrorKind::non_nominal_target, "target '" + m_target.name + "' is not nominal");
    }
    if (m_target.categories.empty())
    {
        throw Error(ErrorKind::malformed_input, "target '" + m_target.name + "' has no categories");
    }

    std::set<std::string> names{m_target.name};
    for (const auto& attribute : m_attributes)
    {
        if (!names.insert(attribute.name).second)
        {
            throw Error(ErrorKind::malformed_input, "duplicate attribute name '" + attribute.name + "'");
        }
        if (attribute.nominal() && attribute.categories.empty())
        {
            throw Error(ErrorKind::malformed_input, "nominal attribute '" + attribute.name + "' has no categories");
        }
    }

    const auto width = m_attributes.size();
    if (m_cells.size() != width * m_labels.size())
    {
        throw Error(ErrorKind::malformed_input, "cell count does not match rows x attributes");
    }
    for (const int label : m_labels)
    {
        if (label < 0 || static_cast<std::size_t>(label) >= m_target.categories.size())
        {
            throw Error(ErrorKind::malformed_input, "target index out of range");
        }
    }
    for (std::size_t a = 0; a < width; ++a)
    {
        if (!m_attributes[a].nominal())
        {
            continue;
        }
        const auto count = static_cast<double>(m_attributes[a].categories.size());
        for (std::size_t r = 0; r < m_labels.size(); ++r)
        {
            const double v = m_cells[r * width + a];
            if (!is_missing(v) && (v < 0.0 || v >= count || v != std::floor(v)))
            {
                throw Error(ErrorKind::malformed_input,
                    "category index out of range in attribute '" + m_attributes[a].name + "'");
            }
        }
    }
}

std::size_t TabularDataset::num_observed_classes() const
{
    const auto counts = class_counts();
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

std::vector<std::size_t> TabularDataset::class_counts() const
{
    std::vector<std::size_t> counts(num_classes(), 0);
    for (const int label : m_labels)
    {
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

std::vector<std::size_t> TabularDataset::numeric_attributes() const
{
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < m_attributes.size(); ++a)
    {
        if (m_attributes[a].numeric())
        {
            out.push_back(a);
        }
    }
    return out;
}

std::vector<std::size_t> TabularDataset::nominal_attributes() const
{
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < m_attributes.size(); ++a)
    {
        if (m_attributes[a].nominal())
        {
            out.push_back(a);
        }
    }
    return out;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> rows) const
{
    const auto width = m_attributes.size();
    std::vector<double> cells;
    cells.reserve(rows.size() * width);
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (const auto r : rows)
    {
        const auto source = row(r);
        cells.insert(cells.end(), source.begin(), source.end());
        labels.push_back(m_labels[r]);
    }
    TabularDataset out;
    out.m_name = m_name;
    out.m_attributes = m_attributes;
    out.m_target = m_target;
    out.m_cells = std::move(cells);
    out.m_labels = std::move(labels);
    return out;
}

TabularDataset TabularDataset::renamed(std::string name) const
{
    TabularDataset out = *this;
    out.m_name = std::move(name);
    return out;
}

namespace {

bool is_missing_token(std::string_view token)
{
    const auto first = token.find_first_not_of(" \t");
    if (first == std::string_view::npos)
    {
        return true;
    }
    const auto last = token.find_last_not_of(" \t");
    return token.substr(first, last - first + 1) == "?";
}

std::string trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

std::string lower(std::string text)
{
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::size_t resolve_target(const std::vector<std::string>& names, const LoadOptions& options)
{
    if (!options.target_column)
    {
        return names.size() - 1;
    }
    const auto it = std::find(names.begin(), names.end(), *options.target_column);
    if (it == names.end())
    {
        throw Error(ErrorKind::malformed_input, "target column '" + *options.target_column + "' not found");
    }
    return static_cast<std::size_t>(it - names.begin());
}

// Column-wise typed values before assembling a dataset.
struct ParsedColumn
{
    Attribute attribute;
    std::vector<double> values;
};

TabularDataset assemble(std::string name, std::vector<ParsedColumn> columns, std::size_t target_index)
{
    if (columns[target_index].attribute.numeric())
    {
        throw Error(ErrorKind::non_nominal_target, "target '" + columns[target_index].attribute.name + "' is numeric");
    }
    const auto rows = columns.front().values.size();
    std::vector<Attribute> attributes;
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
        if (c != target_index)
        {
            attributes.push_back(columns[c].attribute);
        }
    }

    std::vector<double> cells;
    std::vector<int> labels;
    cells.reserve(rows * attributes.size());
    labels.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r)
    {
        const double target = columns[target_index].values[r];
        if (is_missing(target))
        {
            continue;
        }
        for (std::size_t c = 0; c < columns.size(); ++c)
        {
            if (c != target_index)
            {
                cells.push_back(columns[c].values[r]);
            }
        }
        labels.push_back(static_cast<int>(target));
    }
    if (labels.empty())
    {
        throw Error(ErrorKind::empty_dataset, "'" + name + "' has no instances with an observed target");
    }
    return TabularDataset(std::move(name), std::move(attributes), std::move(columns[target_index].attribute),
        std::move(cells), std::move(labels));
}

// Splits one ARFF data line on commas, honoring single and double quotes.
std::vector<std::string> split_arff_values(std::string_view line)
{
    std::vector<std::string> out;
    std::string field;
    char quote = 0;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        const char c = line[i];
        if (quote != 0)
        {
            if (c == '\\' && i + 1 < line.size())
            {
                field.push_back(line[++i]);
            }
            else if (c == quote)
            {
                quote = 0;
            }
            else
            {
                field.push_back(c);
            }
        }
        else if (c == '\'' || c == '"')
        {
            quote = c;
            was_quoted = true;
        }
        else if (c == ',')
        {
            out.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        }
        else
        {
            field.push_back(c);
        }
    }
    if (quote != 0)
    {
        throw Error(ErrorKind::malformed_input, "unterminated quote in ARFF data line");
    }
    out.push_back(was_quoted ? field : trim(field));
    return out;
}

// Reads an ARFF token that may be quoted; advances `pos`.
std::string next_arff_token(std::string_view line, std::size_t& pos)
{
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
    {
        ++pos;
    }
    if (pos >= line.size())
    {
        return {};
    }
    if (line[pos] == '\'' || line[pos] == '"')
    {
        const char quote = line[pos++];
        const auto end = line.find(quote, pos);
        if (end == std::string_view::npos)
        {
            throw Error(ErrorKind::malformed_input, "unterminated quoted ARFF name");
        }
        auto token = std::string(line.substr(pos, end - pos));
        pos = end + 1;
        return token;
    }
    const auto start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])) && line[pos] != '{')
    {
        ++pos;
    }
    return std::string(line.substr(start, pos - start));
}

} // namespace

TabularDataset parse_csv_dataset(std::string_view text, std::string name, const LoadOptions& options)
{
    const auto rows = csv::parse(text);
    if (rows.empty())
    {
        throw Error(ErrorKind::malformed_input, "'" + name + "' is empty (header row required)");
    }
    const auto& header = rows.front();
    const auto width = header.size();
    std::vector<std::string> names;
    for (const auto& h : header)
    {
        names.push_back(trim(h));
    }
    if (rows.size() == 1)
    {
        throw Error(ErrorKind::empty_dataset, "'" + name + "' has a header but no instances");
    }
    if (width < 1)
    {
        throw Error(ErrorKind::malformed_input, "'" + name + "' header has no columns");
    }
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        if (rows[r].size() != width)
        {
            throw Error(ErrorKind::malformed_input,
                "'" + name + "' row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                    " fields, expected " + std::to_string(width));
        }
    }
    const auto target_index = resolve_target(names, options);

    std::vector<ParsedColumn> columns;
    columns.reserve(width);
    for (std::size_t c = 0; c < width; ++c)
    {
        ParsedColumn column;
        column.values.reserve(rows.size() - 1);

        bool numeric = c != target_index;
        bool any_observed = false;
        if (numeric)
        {
            for (std::size_t r = 1; r < rows.size() && numeric; ++r)
            {
                const auto& field = rows[r][c];
                if (is_missing_token(field))
                {
                    continue;
                }
                any_observed = true;
                double v = 0.0;
                numeric = csv::parse_double(field, v);
            }
            numeric = numeric && any_observed;
        }

        if (numeric)
        {
            column.attribute = Attribute::make_numeric(names[c]);
            for (std::size_t r = 1; r < rows.size(); ++r)
            {
                double v = missing_value;
                if (!is_missing_token(rows[r][c]))
                {
                    csv::parse_double(rows[r][c], v);
                }
                column.values.push_back(v);
            }
        }
        else
        {
            std::vector<std::string> categories;
            std::unordered_map<std::string, int> index;
            for (std::size_t r = 1; r < rows.size(); ++r)
            {
                if (is_missing_token(rows[r][c]))
                {
                    column.values.push_back(missing_value);
                    continue;
                }
                auto token = trim(rows[r][c]);
                auto [it, inserted] = index.emplace(token, static_cast<int>(categories.size()));
                if (inserted)
                {
                    categories.push_back(token);
                }
                column.values.push_back(it->second);
            }
            if (categories.empty())
            {
                if (c == target_index)
                {
                    throw Error(ErrorKind::empty_dataset, "'" + name + "' target column has no observed values");
                }
                // all-missing column: nominal with a placeholder category
                categories.push_back("?");
            }
            column.attribute = Attribute::make_nominal(names[c], std::move(categories));
        }
        columns.push_back(std::move(column));
    }
    return assemble(std::move(name), std::move(columns), target_index);
}

TabularDataset parse_arff_dataset(std::string_view text, std::string name, const LoadOptions& options)
{
    std::vector<ParsedColumn> columns;
    bool in_data = false;
    std::size_t line_number = 0;
    std::size_t start = 0;
    while (start <= text.size())
    {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
        {
            end = text.size();
        }
        const auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_number;
        if (line.empty() || line.front() == '%')
        {
            if (end == text.size())
            {
                break;
            }
            continue;
        }

        if (!in_data)
        {
            const auto keyword = lower(line.substr(0, line.find_first_of(" \t")));
            if (keyword == "@relation")
            {
                std::size_t pos = keyword.size();
                const auto relation = next_arff_token(line, pos);
                if (!relation.empty() && name.empty())
                {
                    name = relation;
                }
            }
            else if (keyword == "@attribute")
            {
                std::size_t pos = keyword.size();
                const auto attribute_name = next_arff_token(line, pos);
                while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
                {
                    ++pos;
                }
                if (attribute_name.empty() || pos >= line.size())
                {
                    throw Error(ErrorKind::malformed_input, "line " + std::to_string(line_number) + ": incomplete @attribute");
                }
                ParsedColumn column;
                if (line[pos] == '{')
                {
                    const auto close = line.find('}', pos);
                    if (close == std::string::npos)
                    {
                        throw Error(ErrorKind::malformed_input, "line " + std::to_string(line_number) + ": unterminated category list");
                    }
                    auto categories = split_arff_values(std::string_view(line).substr(pos + 1, close - pos - 1));
                    if (categories.size() == 1 && categories.front().empty())
                    {
                        categories.clear();
                    }
                    column.attribute = Attribute::make_nominal(attribute_name, std::move(categories));
                }
                else
                {
                    const auto type = lower(next_arff_token(line, pos));
                    if (type != "numeric" && type != "real" && type != "integer")
                    {
                        throw Error(ErrorKind::malformed_input,
                            "line " + std::to_string(line_number) + ": unsupported attribute type '" + type + "'");
                    }
                    column.attribute = Attribute::make_numeric(attribute_name);
                }
                columns.push_back(std::move(column));
            }
            else if (keyword == "@data")
            {
                if (columns.empty())
                {
                    throw Error(ErrorKind::malformed_input, "@data before any @attribute");
                }
                in_data = true;
            }
            else
            {
                throw Error(ErrorKind::malformed_input, "line " + std::to_string(line_number) + ": unexpected '" + line + "'");
            }
        }
        else
        {
            if (line.front() == '{')
            {
                throw Error(ErrorKind::malformed_input, "sparse ARFF rows are not supported");
            }
            const auto values = split_arff_values(line);
            if (values.size() != columns.size())
            {
                throw Error(ErrorKind::malformed_input,
                    "line " + std::to_string(line_number) + " has " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(columns.size()));
            }
            for (std::size_t c = 0; c < columns.size(); ++c)
            {
                auto& column = columns[c];
                if (values[c].empty() || values[c] == "?")
                {
                    column.values.push_back(missing_value);
                }
                else if (column.attribute.numeric())
                {
                    double v = 0.0;
                    if (!csv::parse_double(values[c], v))
                    {
                        throw Error(ErrorKind::malformed_input,
                            "line " + std::to_string(line_number) + ": '" + values[c] + "' is not numeric");
                    }
                    column.values.push_back(v);
                }
                else
                {
                    const auto& categories = column.attribute.categories;
                    const auto it = std::find(categories.begin(), categories.end(), values[c]);
                    if (it == categories.end())
                    {
                        throw Error(ErrorKind::malformed_input,
                            "line " + std::to_string(line_number) + ": undeclared category '" + values[c] + "'");
                    }
                    column.values.push_back(static_cast<double>(it - categories.begin()));
                }
            }
        }
        if (end == text.size())
        {
            break;
        }
    }

    if (!in_data)
    {
        throw Error(ErrorKind::malformed_input, "'" + name + "' has no @data section");
    }
    if (columns.front().values.empty())
    {
        throw Error(ErrorKind::empty_dataset, "'" + name + "' has no instances");
    }
    std::vector<std::string> names;
    for (const auto& c : columns)
    {
        names.push_back(c.attribute.name);
    }
    const auto target_index = resolve_target(names, options);
    return assemble(std::move(name), std::move(columns), target_index);
}

TabularDataset load_dataset(const std::filesystem::path& path, FileFormat format, const LoadOptions& options)
{
    const auto text = csv::read_text(path);
    auto name = path.stem().string();
    return format == FileFormat::arff ? parse_arff_dataset(text, std::move(name), options)
                                      : parse_csv_dataset(text, std::move(name), options);
}

TabularDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options)
{
    const auto extension = lower(path.extension().string());
    return load_dataset(path, extension == ".arff" ? FileFormat::arff : FileFormat::csv, options);
}

void write_csv(std::ostream& out, const TabularDataset& dataset)
{
    csv::Row header;
    for (const auto& attribute : dataset.attributes())
    {
        header.push_back(attribute.name);
    }
    header.push_back(dataset.target().name);
    csv::write_row(out, header);

    csv::Row row(header.size());
    for (std::size_t r = 0; r < dataset.num_instances(); ++r)
    {
        for (std::size_t a = 0; a < dataset.num_attributes(); ++a)
        {
            const double v = dataset.value(r, a);
            const auto& attribute = dataset.attribute(a);
            if (is_missing(v))
            {
                row[a] = "?";
            }
            else if (attribute.nominal())
            {
                row[a] = attribute.categories[static_cast<std::size_t>(v)];
            }
            else
            {
                row[a] = csv::format_double(v);
            }
        }
        row.back() = dataset.target().categories[static_cast<std::size_t>(dataset.label(r))];
        csv::write_row(out, row);
    }
}

std::vector<TabularDataset> generate_datasetoids(const TabularDataset& dataset)
{
    std::vector<TabularDataset> out;
    for (const auto swapped : dataset.nominal_attributes())
    {
        auto attributes = dataset.attributes();
        const Attribute new_target = attributes[swapped];
        attributes[swapped] = dataset.target();

        std::vector<double> cells;
        std::vector<int> labels;
        for (std::size_t r = 0; r < dataset.num_instances(); ++r)
        {
            const double target_value = dataset.value(r, swapped);
            if (is_missing(target_value))
            {
                continue;
            }
            const auto source = dataset.row(r);
            for (std::size_t a = 0; a < source.size(); ++a)
            {
                cells.push_back(a == swapped ? static_cast<double>(dataset.label(r)) : source[a]);
            }
            labels.push_back(static_cast<int>(target_value));
        }
        out.emplace_back(dataset.name() + "@" + new_target.name, std::move(attributes), new_target,
            std::move(cells), std::move(labels));
    }
    return out;
}

std::vector<std::size_t> FoldPlan::test_rows(int fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
    {
        if (fold_of[i] == fold)
        {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_rows(int fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
    {
        if (fold_of[i] != fold)
        {
            out.push_back(i);
        }
    }
    return out;
}

FoldPlan stratified_folds(std::span<const int> labels, int k, std::uint64_t seed)
{
    if (k < 2)
    {
        throw Error(ErrorKind::domain_error, "fold count must be at least 2");
    }
    if (labels.size() < static_cast<std::size_t>(k))
    {
        throw Error(ErrorKind::too_few_instances,
            std::to_string(labels.size()) + " instances cannot fill " + std::to_string(k) + " folds");
    }

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    // group in shuffled order, classes visited in ascending label order
    std::map<int, std::vector<std::size_t>> by_class;
    for (const auto i : order)
    {
        by_class[labels[i]].push_back(i);
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(labels.size(), -1);
    int cursor = 0;
    for (const auto& [label, members] : by_class)
    {
        for (const auto i : members)
        {
            plan.fold_of[i] = cursor;
            cursor = (cursor + 1) % k;
        }
    }
    return plan;
}

FoldPlan stratified_folds(const TabularDataset& dataset, int k, std::uint64_t seed)
{
    return stratified_folds(std::span<const int>(dataset.labels()), k, seed);
}

} // namespace metarec
