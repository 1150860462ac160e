#include "instascope/csv.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace instascope {

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    return fmt::format("{}", value);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) {
            out_ << ',';
        }
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::separator() {
    if (in_row_ > 0) {
        out_ << ',';
    }
    ++in_row_;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    separator();
    out_ << text;
    return *this;
}

CsvWriter& CsvWriter::cell(double value) {
    separator();
    out_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::cell(std::optional<double> value) {
    separator();
    if (value) {
        out_ << format_double(*value);
    }
    return *this;
}

CsvWriter& CsvWriter::cell(int value) { return cell(static_cast<long long>(value)); }
CsvWriter& CsvWriter::cell(long value) { return cell(static_cast<long long>(value)); }
CsvWriter& CsvWriter::cell(unsigned long value) { return cell(static_cast<unsigned long long>(value)); }

CsvWriter& CsvWriter::cell(long long value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(unsigned long long value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(bool value) {
    separator();
    out_ << (value ? '1' : '0');
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw std::logic_error("CsvWriter: row has " + std::to_string(in_row_) + " cells, header has " +
                               std::to_string(columns_));
    }
    out_ << '\n';
    in_row_ = 0;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw std::out_of_range("CSV column not found: " + std::string(name));
}

namespace {
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    cells.push_back(std::move(current));
    return cells;
}
}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty CSV: " + path.string());
    }
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw std::runtime_error("ragged CSV row in " + path.string());
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << content;
        if (!out) {
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace instascope
