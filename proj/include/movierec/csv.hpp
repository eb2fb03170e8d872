#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "movierec/errors.hpp"

namespace movierec {
namespace csv {

/// One record plus the 1-based line number it started on.
struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

// RFC 4180 reader: comma separators, optional "..." quoting, "" as an
// escaped quote inside quoted fields, quoted fields may span newlines.
// Accepts both LF and CRLF endings.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads the next record. Returns false at end of input.
    bool next(Row& row) {
        row.fields.clear();
        int c = in_.get();
        while (c == '\r') c = in_.get();  // stray blank CR
        if (c == std::istream::traits_type::eof()) return false;
        if (c == '\n') {
            ++line_;
            return next(row);  // skip blank line
        }
        row.line = line_;
        std::string field;
        bool quoted = false;
        for (;;) {
            if (c == std::istream::traits_type::eof()) {
                if (quoted) throw DataError("unterminated quoted field", row.line);
                row.fields.push_back(std::move(field));
                return true;
            }
            char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    int peek = in_.peek();
                    if (peek == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty()) {
                quoted = true;
            } else if (ch == ',') {
                row.fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n') {
                ++line_;
                row.fields.push_back(std::move(field));
                return true;
            } else if (ch == '\r' && in_.peek() == '\n') {
                // consumed with the upcoming \n
            } else {
                field.push_back(ch);
            }
            c = in_.get();
        }
    }

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

inline std::string quote_field(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << quote_field(fields[i]);
    }
    out.put('\n');
}

/// Loads a whole CSV file. Throws DataError if the file cannot be opened
/// or the header does not match `expected_header` (when non-empty).
inline std::vector<Row> read_file(const std::string& path,
                                  const std::vector<std::string>& expected_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    Reader reader(in);
    Row header;
    if (!reader.next(header)) throw DataError("empty file: " + path);
    if (!expected_header.empty() && header.fields != expected_header) {
        std::string want;
        for (std::size_t i = 0; i < expected_header.size(); ++i) {
            if (i) want.push_back(',');
            want += expected_header[i];
        }
        throw DataError("unexpected header in " + path + " (want " + want + ")", header.line);
    }
    std::vector<Row> rows;
    Row row;
    while (reader.next(row)) rows.push_back(row);
    return rows;
}

}  // namespace csv
}  // namespace movierec
