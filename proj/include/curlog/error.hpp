#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curlog {

/// Fatal error raised by any stage of the pipeline. The message is a single
/// line suitable for machine parsing by the CLI.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-fatal, per-record problem collected during parsing.
struct RecordError {
    std::size_t line = 0;
    std::string message;
};

}  // namespace curlog
