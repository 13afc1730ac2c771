#include <metarec/csv.hpp>
#include <metarec/error.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace metarec::csv {

std::vector<Row> parse(std::string_view text)
{
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    bool row_has_content = false;

    const auto end_field = [&]()
    {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&]()
    {
        if (row_has_content || !row.empty() || field_started)
        {
            end_field();
            rows.push_back(std::move(row));
        }
        row.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const char c = text[i];
        if (quoted)
        {
            if (c == '"')
            {
                if (i + 1 < text.size() && text[i + 1] == '"')
                {
                    field.push_back('"');
                    ++i;
                }
                else
                {
                    quoted = false;
                }
            }
            else
            {
                field.push_back(c);
            }
            continue;
        }

        switch (c)
        {
        case '"':
            quoted = true;
            field_started = true;
            row_has_content = true;
            break;
        case ',':
            end_field();
            row_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(c);
            field_started = true;
            if (c != ' ' && c != '\t')
            {
                row_has_content = true;
            }
            break;
        }
    }
    if (quoted)
    {
        throw Error(ErrorKind::malformed_input, "unterminated quoted field");
    }
    end_row();

    // whitespace-only lines are not rows
    std::erase_if(rows, [](const Row& r)
    {
        return r.size() == 1 && r.front().find_first_not_of(" \t") == std::string::npos;
    });
    return rows;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<Row> read_file(const std::filesystem::path& path)
{
    return parse(read_text(path));
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos)
    {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field)
    {
        if (c == '"')
        {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row)
{
    for (std::size_t i = 0; i < row.size(); ++i)
    {
        if (i > 0)
        {
            out << ',';
        }
        out << escape(row[i]);
    }
    out << '\n';
}

std::string format_double(double value)
{
    if (std::isnan(value))
    {
        return "nan";
    }
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

bool parse_double(std::string_view text, double& value)
{
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos)
    {
        return false;
    }
    const auto last = text.find_last_not_of(" \t");
    text = text.substr(first, last - first + 1);
    if (!text.empty() && text.front() == '+')
    {
        text.remove_prefix(1);
    }
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    return result.ec == std::errc{} && result.ptr == text.data() + text.size() && std::isfinite(value);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto temporary = path;
    temporary += ".tmp";
    {
        std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw Error(ErrorKind::io_error, "cannot write " + temporary.string());
        }
        out << content;
        if (!out)
        {
            throw Error(ErrorKind::io_error, "write failed for " + temporary.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(temporary, path, ec);
    if (ec)
    {
        throw Error(ErrorKind::io_error, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

} // namespace metarec::csv
