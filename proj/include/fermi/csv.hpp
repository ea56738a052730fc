#pragma once

#include <string>
#include <vector>

namespace fermi {

// CSV table with '#'-prefixed comment header lines; doubles printed with
// 17 significant digits. write() goes through a temp file + rename.
class CsvWriter {
public:
    void comment(const std::string& line) { comments_.push_back(line); }
    void columns(std::vector<std::string> names) { columns_ = std::move(names); }

    void cell(double x);
    void cell(const std::string& s);
    void cell(long long n);
    void end_row();

    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> comments_;
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
    std::string current_;
};

std::string format_double(double x);

// temp file in the target directory, then atomic rename
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace fermi
