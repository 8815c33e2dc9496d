#pragma once

#include <stdexcept>
#include <string>

namespace subtraj {

/// Bad call arguments (out-of-range indices, empty inputs, k > N, ...).
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent configuration values, unknown scorer names.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed external data: CSV parse failures, store/index file problems.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Index/store file carries an unsupported format version.
struct version_error : data_error {
    using data_error::data_error;
};

/// Index/store file ends before the declared payload does.
struct truncation_error : data_error {
    using data_error::data_error;
};

/// Index/store file trailing checksum does not match its contents.
struct checksum_error : data_error {
    using data_error::data_error;
};

/// Internal invariant breach or use of an object in an invalid state.
struct state_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace subtraj
