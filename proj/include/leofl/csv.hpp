#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace leofl {

// Minimal CSV emitter with fixed numeric formatting (%.12g) so that
// identical runs produce byte-identical files.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("csv: cannot open " + path);
    }

    void header(const std::string& line) { out_ << line << '\n'; }

    CsvWriter& field(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        sep();
        row_ += buf;
        return *this;
    }
    CsvWriter& field(long long v) {
        sep();
        row_ += std::to_string(v);
        return *this;
    }
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(unsigned long long v) {
        sep();
        row_ += std::to_string(v);
        return *this;
    }
    CsvWriter& field(const std::string& v) {
        sep();
        row_ += v;
        return *this;
    }

    void end_row() {
        out_ << row_ << '\n';
        row_.clear();
        first_ = true;
    }

  private:
    void sep() {
        if (!first_) row_ += ',';
        first_ = false;
    }
    std::ofstream out_;
    std::string row_;
    bool first_ = true;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace leofl
