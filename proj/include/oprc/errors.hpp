#pragma once

#include <stdexcept>
#include <string>

namespace oprc {

/// Base of every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define OPRC_DEFINE_ERROR(name)                 \
    class name : public error {                 \
    public:                                     \
        using error::error;                     \
    };

OPRC_DEFINE_ERROR(parse_error)
OPRC_DEFINE_ERROR(integrity_error)
OPRC_DEFINE_ERROR(length_error)
OPRC_DEFINE_ERROR(coverage_error)
OPRC_DEFINE_ERROR(degenerate_error)
OPRC_DEFINE_ERROR(capacity_error)
OPRC_DEFINE_ERROR(numeric_error)
OPRC_DEFINE_ERROR(config_error)
OPRC_DEFINE_ERROR(shape_error)
OPRC_DEFINE_ERROR(singular_error)
OPRC_DEFINE_ERROR(domain_error)
OPRC_DEFINE_ERROR(io_error)

#undef OPRC_DEFINE_ERROR

} // namespace oprc
