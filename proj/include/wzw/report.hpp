#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wzw {

// shortest round-trip formatting; CSV output is byte-stable across reruns
std::string fmt_g(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    void write(std::ostream& os) const;
    void save(const std::string& path) const;
    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void save_text(const std::string& path, const std::string& content);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// minimal log-log polyline plot, decade ticks, one color per series
void svg_loglog(const std::string& path, const std::string& title,
                const std::string& xlabel, const std::string& ylabel,
                const std::vector<PlotSeries>& series);

} // namespace wzw
