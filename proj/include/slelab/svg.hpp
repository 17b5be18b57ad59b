#pragma once

// Minimal SVG line-plot writer; no external plotting dependency.

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "slelab/errors.hpp"
#include "slelab/io.hpp"

namespace slelab {

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_series(std::string name, std::vector<double> xs, std::vector<double> ys) {
        series_.push_back({std::move(name), std::move(xs), std::move(ys)});
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw io_error("svg: cannot open " + path);
        const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
        double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
        bool first = true;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (first) {
                    xlo = xhi = s.xs[i];
                    ylo = yhi = s.ys[i];
                    first = false;
                }
                xlo = std::min(xlo, s.xs[i]);
                xhi = std::max(xhi, s.xs[i]);
                ylo = std::min(ylo, s.ys[i]);
                yhi = std::max(yhi, s.ys[i]);
            }
        }
        if (xhi <= xlo) xhi = xlo + 1;
        if (yhi <= ylo) yhi = ylo + 1;
        auto px = [&](double x) { return L + (x - xlo) / (xhi - xlo) * (W - L - R); };
        auto py = [&](double y) { return H - B - (y - ylo) / (yhi - ylo) * (H - T - B); };
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                       "#ff7f0e", "#8c564b"};
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
            << H << "\">\n";
        out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
            << "\" height=\"" << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
        out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title_
            << "</text>\n";
        out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
            << xlabel_ << "</text>\n";
        out << "<text x=\"15\" y=\"" << H / 2
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << H / 2 << ")\">"
            << ylabel_ << "</text>\n";
        // axis extremes
        out << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\">" << format_double(xlo)
            << "</text>\n";
        out << "<text x=\"" << W - R << "\" y=\"" << H - B + 16
            << "\" text-anchor=\"end\">" << format_double(xhi) << "</text>\n";
        out << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\">"
            << format_double(ylo) << "</text>\n";
        out << "<text x=\"" << L - 4 << "\" y=\"" << T + 10 << "\" text-anchor=\"end\">"
            << format_double(yhi) << "</text>\n";
        for (std::size_t k = 0; k < series_.size(); ++k) {
            const auto& s = series_[k];
            out << "<polyline fill=\"none\" stroke=\"" << colors[k % 6]
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.xs.size(); ++i)
                out << format_double(px(s.xs[i])) << "," << format_double(py(s.ys[i]))
                    << " ";
            out << "\"/>\n";
            out << "<text x=\"" << W - R - 5 << "\" y=\"" << T + 16 + 16 * k
                << "\" text-anchor=\"end\" fill=\"" << colors[k % 6] << "\">" << s.name
                << "</text>\n";
        }
        out << "</svg>\n";
    }

  private:
    struct Series {
        std::string name;
        std::vector<double> xs, ys;
    };
    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
};

} // namespace slelab
