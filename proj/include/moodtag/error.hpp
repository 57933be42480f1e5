#pragma once

#include <stdexcept>
#include <string>

namespace moodtag {

// Data or processing failure: bad audio, degenerate input, I/O trouble.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

// Input does not follow the expected file layout (header, columns, labels).
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace moodtag
