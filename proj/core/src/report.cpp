#include "spotlight/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "spotlight/error.hpp"

namespace spotlight {

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void check_shape(const Table& t) {
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) {
            throw InvalidArgument("table row width differs from the header");
        }
    }
}

}  // namespace

void Table::write_csv(std::ostream& out) const {
    check_shape(*this);
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "," : "") << csv_escape(cells[i]);
        }
        out << '\n';
    };
    line(header);
    for (const auto& row : rows) {
        line(row);
    }
}

void Table::write_markdown(std::ostream& out) const {
    check_shape(*this);
    auto line = [&](const std::vector<std::string>& cells) {
        out << '|';
        for (const auto& c : cells) {
            out << ' ' << c << " |";
        }
        out << '\n';
    };
    line(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << " --- |";
    }
    out << '\n';
    for (const auto& row : rows) {
        line(row);
    }
}

void Table::write_console(std::ostream& out) const {
    check_shape(*this);
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
        width[i] = header[i].size();
        for (const auto& row : rows) {
            width[i] = std::max(width[i], row[i].size());
        }
    }
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) {
                out << "  ";
            }
            // First column left-aligned, numbers right-aligned.
            const std::string pad(width[i] - cells[i].size(), ' ');
            out << (i == 0 ? cells[i] + pad : pad + cells[i]);
        }
        out << '\n';
    };
    line(header);
    for (const auto& row : rows) {
        line(row);
    }
}

std::string format_fixed(double v, int digits) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace spotlight
