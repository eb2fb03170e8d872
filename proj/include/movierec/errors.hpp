#pragma once

#include <stdexcept>
#include <string>

namespace movierec {

/// Fatal problem in an input file (missing, malformed row, bad value).
/// `row` is the 1-based line number when known, 0 otherwise.
class DataError : public std::runtime_error {
public:
    DataError(std::string message, std::size_t row = 0)
        : std::runtime_error(row ? message + " (row " + std::to_string(row) + ")"
                                 : message),
          row_(row) {}

    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

}  // namespace movierec
