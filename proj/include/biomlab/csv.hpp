#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biomlab {

// Minimal strict CSV support for the pipeline's file formats: UTF-8,
// comma-delimited, header row, no quoting or embedded separators.

// Shortest round-trip decimal representation of a double ("" for missing).
std::string format_double(double v);
std::string format_int(std::int64_t v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

// Iterates rows of an in-memory CSV document without copying fields.
class CsvReader {
public:
    // Loads the whole file; throws ValidationError when unreadable.
    static CsvReader open(const std::string& path);
    explicit CsvReader(std::string content);

    const std::vector<std::string>& header() const { return header_; }

    // Fills `fields` with the next data row; returns false at end of input.
    // Blank lines are skipped. Rows with a field count different from the
    // header are returned as-is; callers decide how to reject them.
    bool next_row(std::vector<std::string_view>& fields);

    // 1-based line number of the row most recently returned.
    std::size_t line_number() const { return line_number_; }

private:
    void split_line(std::string_view line, std::vector<std::string_view>& out) const;
    std::optional<std::string_view> next_line();

    std::string content_;
    std::size_t pos_ = 0;
    std::size_t line_counter_ = 0;
    std::size_t line_number_ = 0;
    std::vector<std::string> header_;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void write_row(const std::vector<std::string>& fields);
    void close();

private:
    std::string path_;
    std::string buffer_;
    std::size_t arity_;
    bool closed_ = false;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace biomlab
