#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace instascope {

// Comma-separated, LF-terminated rows with a fixed header. Doubles are
// written in shortest round-trip form so re-reading is bit-exact.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(const char* text) { return cell(std::string_view(text)); }
    CsvWriter& cell(const std::string& text) { return cell(std::string_view(text)); }
    CsvWriter& cell(double value);
    CsvWriter& cell(std::optional<double> value);  // empty cell when missing
    CsvWriter& cell(int value);
    CsvWriter& cell(long value);
    CsvWriter& cell(long long value);
    CsvWriter& cell(unsigned long value);
    CsvWriter& cell(unsigned long long value);
    CsvWriter& cell(bool value);
    void end_row();

    std::size_t columns() const { return columns_; }

private:
    void separator();

    std::ostream& out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; throws when absent.
    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Writes to a temporary sibling and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

}  // namespace instascope
