#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metarec {

enum class ErrorKind
{
    malformed_input,
    empty_dataset,
    non_nominal_target,
    too_few_instances,
    schema_mismatch,
    length_mismatch,
    arity_mismatch,
    undefined_kappa,
    domain_error,
    out_of_range_accuracy,
    degenerate_target,
    io_error,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map them onto exit codes.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message) :
        std::runtime_error(std::string(to_string(kind)) + ": " + message),
        m_kind(kind)
    {
    }

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::malformed_input: return "MalformedInput";
    case ErrorKind::empty_dataset: return "EmptyDataset";
    case ErrorKind::non_nominal_target: return "NonNominalTarget";
    case ErrorKind::too_few_instances: return "TooFewInstances";
    case ErrorKind::schema_mismatch: return "SchemaMismatch";
    case ErrorKind::length_mismatch: return "LengthMismatch";
    case ErrorKind::arity_mismatch: return "ArityMismatch";
    case ErrorKind::undefined_kappa: return "UndefinedKappa";
    case ErrorKind::domain_error: return "DomainError";
    case ErrorKind::out_of_range_accuracy: return "OutOfRangeAccuracy";
    case ErrorKind::degenerate_target: return "DegenerateTarget";
    case ErrorKind::io_error: return "IoError";
    }
    return "Unknown";
}

} // namespace metarec
