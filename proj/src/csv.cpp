#include "fermi/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fermi {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void CsvWriter::cell(double x) {
    if (!current_.empty()) current_ += ',';
    current_ += format_double(x);
}

void CsvWriter::cell(const std::string& s) {
    if (!current_.empty()) current_ += ',';
    current_ += s;
}

void CsvWriter::cell(long long n) {
    if (!current_.empty()) current_ += ',';
    current_ += std::to_string(n);
}

void CsvWriter::end_row() {
    rows_.push_back(current_);
    current_.clear();
}

std::string CsvWriter::str() const {
    std::string out;
    for (const std::string& c : comments_) out += "# " + c + "\n";
    if (!columns_.empty()) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) out += ',';
            out += columns_[i];
        }
        out += '\n';
    }
    for (const std::string& r : rows_) out += r + "\n";
    return out;
}

void CsvWriter::write(const std::string& path) const { atomic_write_file(path, str()); }

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        if (!f.good()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace fermi
