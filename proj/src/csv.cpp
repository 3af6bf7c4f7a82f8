#include "biomlab/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "biomlab/common.hpp"

namespace biomlab {

std::string format_double(double v) {
    if (is_missing(v)) return "";
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string format_int(std::int64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read file: " + path);
    std::string content;
    in.seekg(0, std::ios::end);
    content.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(content.data(), static_cast<std::streamsize>(content.size()));
    return content;
}

void write_text_file(const std::string& path, std::string_view content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("write failed: " + path);
}

CsvReader CsvReader::open(const std::string& path) {
    return CsvReader(read_text_file(path));
}

CsvReader::CsvReader(std::string content) : content_(std::move(content)) {
    auto line = next_line();
    if (!line) throw ValidationError("CSV input is empty (missing header row)");
    std::vector<std::string_view> fields;
    split_line(*line, fields);
    header_.reserve(fields.size());
    for (auto f : fields) header_.emplace_back(f);
}

std::optional<std::string_view> CsvReader::next_line() {
    while (pos_ < content_.size()) {
        std::size_t end = content_.find('\n', pos_);
        if (end == std::string::npos) end = content_.size();
        std::string_view line(content_.data() + pos_, end - pos_);
        pos_ = end + 1;
        ++line_counter_;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            line_number_ = line_counter_;
            return line;
        }
    }
    return std::nullopt;
}

bool CsvReader::next_row(std::vector<std::string_view>& fields) {
    auto line = next_line();
    if (!line) return false;
    split_line(*line, fields);
    return true;
}

void CsvReader::split_line(std::string_view line, std::vector<std::string_view>& out) const {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), arity_(header.size()) {
    buffer_.reserve(1 << 20);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    if (fields.size() != arity_) {
        throw std::logic_error("CSV row arity mismatch for " + path_);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += fields[i];
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    write_text_file(path_, buffer_);
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
        // destructor must not throw; close() explicitly to observe errors
    }
}

}  // namespace biomlab
