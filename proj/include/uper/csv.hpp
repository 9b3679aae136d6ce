#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace uper {

// Shortest round-trip formatting; output is a pure function of the value,
// which the byte-identical-rerun contract depends on.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::string format_int(std::int64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// RFC-4180-style: comma-delimited, '.' decimal, one header row.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
        write_strings(header);
    }

    CsvWriter& field(double v) {
        row_.push_back(format_double(v));
        return *this;
    }
    CsvWriter& field(std::int64_t v) {
        row_.push_back(format_int(v));
        return *this;
    }
    CsvWriter& field(std::uint64_t v) {
        row_.push_back(format_int(static_cast<std::int64_t>(v)));
        return *this;
    }
    CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }
    CsvWriter& field(std::string_view v) {
        row_.emplace_back(v);
        return *this;
    }

    void end_row() {
        write_strings(row_);
        row_.clear();
    }

private:
    void write_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ostream& out_;
    std::vector<std::string> row_;
};

// Minimal reader for round-trip tests and diagnostics. No quoting: none of
// the emitted schemas contain commas or newlines in values.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

}  // namespace uper
