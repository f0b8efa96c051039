#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spotlight {

/// Plain text table with string cells, rendered as CSV, Markdown or an
/// aligned console listing.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& out) const;
    void write_markdown(std::ostream& out) const;
    void write_console(std::ostream& out) const;
};

// Fixed-point formatting with `digits` decimals ("nan"/"inf" pass through).
std::string format_fixed(double v, int digits);

}  // namespace spotlight
