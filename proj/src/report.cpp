#include "wzw/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wzw {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvTable: empty header");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
    for (size_t i = 0; i < header_.size(); ++i)
        os << header_[i] << (i + 1 < header_.size() ? ',' : '\n');
    for (const auto& row : rows_)
        for (size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? ',' : '\n');
}

void CsvTable::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write(os);
}

void save_text(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << content;
}

namespace {

double nice_log(double v) { return std::log10(std::max(v, 1e-300)); }

} // namespace

void svg_loglog(const std::string& path, const std::string& title,
                const std::string& xlabel, const std::string& ylabel,
                const std::vector<PlotSeries>& series) {
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
            lx0 = std::min(lx0, nice_log(s.x[i]));
            lx1 = std::max(lx1, nice_log(s.x[i]));
            ly0 = std::min(ly0, nice_log(s.y[i]));
            ly1 = std::max(ly1, nice_log(s.y[i]));
        }
    if (lx0 > lx1) { lx0 = 0.0; lx1 = 1.0; }
    if (ly0 > ly1) { ly0 = 0.0; ly1 = 1.0; }
    if (lx1 - lx0 < 1e-9) { lx0 -= 0.5; lx1 += 0.5; }
    if (ly1 - ly0 < 1e-9) { ly0 -= 0.5; ly1 += 0.5; }
    const double padx = 0.05 * (lx1 - lx0), pady = 0.08 * (ly1 - ly0);
    lx0 -= padx; lx1 += padx; ly0 -= pady; ly1 += pady;

    auto px = [&](double v) {
        return ML + (nice_log(v) - lx0) / (lx1 - lx0) * (W - ML - MR);
    };
    auto py = [&](double v) {
        return H - MB - (nice_log(v) - ly0) / (ly1 - ly0) * (H - MT - MB);
    };
    const char* colors[] = {"#1f6fb5", "#c23b22", "#2e8b57", "#8a2be2", "#b8860b", "#444444"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">"
       << title << "</text>\n";
    // frame
    os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR
       << "\" height=\"" << H - MT - MB
       << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    // decade ticks
    for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
        const double X = ML + (e - lx0) / (lx1 - lx0) * (W - ML - MR);
        os << "<line x1=\"" << X << "\" y1=\"" << MT << "\" x2=\"" << X << "\" y2=\""
           << H - MB << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << X << "\" y=\"" << H - MB + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
        const double Y = H - MB - (e - ly0) / (ly1 - ly0) * (H - MT - MB);
        os << "<line x1=\"" << ML << "\" y1=\"" << Y << "\" x2=\"" << W - MR << "\" y2=\""
           << Y << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << ML - 6 << "\" y=\"" << Y + 4
           << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
       << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << (MT + H - MB) / 2
       << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (MT + H - MB) / 2 << ")\">" << ylabel << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* col = colors[s % 6];
        std::ostringstream pts;
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            if (!(series[s].x[i] > 0.0) || !(series[s].y[i] > 0.0)) continue;
            pts << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
        }
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << col
           << "\" stroke-width=\"1.8\"/>\n";
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            if (!(series[s].x[i] > 0.0) || !(series[s].y[i] > 0.0)) continue;
            os << "<circle cx=\"" << px(series[s].x[i]) << "\" cy=\"" << py(series[s].y[i])
               << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        }
        os << "<text x=\"" << W - MR - 8 << "\" y=\"" << MT + 16 + 16 * s
           << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << col << "\">"
           << series[s].label << "</text>\n";
    }
    os << "</svg>\n";
    save_text(path, os.str());
}

} // namespace wzw
