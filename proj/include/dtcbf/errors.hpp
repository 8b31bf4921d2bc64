#pragma once

#include <stdexcept>
#include <string>

namespace dtcbf {

// Modeling errors. These indicate a bug in the caller, not a numerical
// condition, so they are exceptions rather than statuses.
struct BilinearProduct : std::logic_error {
    explicit BilinearProduct(const std::string& what) : std::logic_error(what) {}
};

struct ArityMismatch : std::invalid_argument {
    explicit ArityMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct NotSymmetric : std::invalid_argument {
    explicit NotSymmetric(const std::string& what) : std::invalid_argument(what) {}
};

struct EmptyBasis : std::runtime_error {
    explicit EmptyBasis(const std::string& what) : std::runtime_error(what) {}
};

struct CertificateResidual : std::runtime_error {
    explicit CertificateResidual(const std::string& what) : std::runtime_error(what) {}
};

struct BackendUnavailable : std::runtime_error {
    explicit BackendUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct UnboundedInputSet : std::runtime_error {
    explicit UnboundedInputSet(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleInput : std::runtime_error {
    explicit InfeasibleInput(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateBounds : std::invalid_argument {
    explicit DegenerateBounds(const std::string& what) : std::invalid_argument(what) {}
};

struct UnknownPlane : std::invalid_argument {
    explicit UnknownPlane(const std::string& what) : std::invalid_argument(what) {}
};

// Parse errors carry a line/column anchor into the offending file.
struct ParseError : std::runtime_error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& what, int line_, int column_ = 0)
        : std::runtime_error(what + " (line " + std::to_string(line_) +
                             (column_ > 0 ? ", column " + std::to_string(column_) : "") + ")"),
          line(line_),
          column(column_) {}
};

struct SemanticError : std::runtime_error {
    explicit SemanticError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dtcbf
