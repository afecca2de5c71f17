// SPDX-License-Identifier: Apache-2.0
//
// irs-ambc: IRS-assisted ambient backscatter link simulator and DDPG lab
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Result rows, median aggregation, CSV files and SVG figures.
//
// raw.csv     one row per (IRS size, realization, method, L_t, T_1)
// summary.csv one row per (IRS size, method, L_t, T_1) with medians
//
// Both start with a '#' line naming the schema version and units. Numbers are
// printed with 17 significant digits, so a summary is byte-identical across
// runs with the same configuration.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ambc/errors.hpp"
#include "ambc/signal_model.hpp"

namespace ambc {

inline constexpr const char* kRawSchema = "# ambc-raw v1; grcd: energy ratio >= 1; ber: probability at L_d; wall_ms: milliseconds";
inline constexpr const char* kSummarySchema = "# ambc-summary v1; medians over realizations; grcd: energy ratio; ber: probability at L_d";

struct RawRow {
    int reflectors = 0;
    int realization = 0;
    std::uint64_t seed = 0;  // channel seed of the realization
    std::string method;
    int training_samples = 0;
    int random_steps = 0;
    double grcd_true = 1.0;
    double grcd_sample = std::numeric_limits<double>::quiet_NaN();  // DRL only
    double ber = 0.5;
    std::string status = "ok";
    int failed_steps = 0;
    double wall_ms = 0.0;

    auto key() const { return std::tie(reflectors, training_samples, random_steps, method, realization); }
};

struct SummaryRow {
    int reflectors = 0;
    std::string method;
    int training_samples = 0;
    int random_steps = 0;
    int count = 0;
    int failures = 0;
    double median_grcd = 1.0;
    double median_sample_grcd = std::numeric_limits<double>::quiet_NaN();
    double median_ber = 0.5;
    double ber_of_median_grcd = 0.5;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

// Failed rows keep their GRCD of 1 and BER of 0.5 in the medians; that is
// what a reader would get from a configuration it could not compute.
inline std::vector<SummaryRow> summarize(const std::vector<RawRow>& rows, int data_samples) {
    std::map<std::tuple<int, int, int, std::string>, std::vector<const RawRow*>> groups;
    for (const auto& r : rows) groups[{r.reflectors, r.training_samples, r.random_steps, r.method}].push_back(&r);
    std::vector<SummaryRow> out;
    for (const auto& [key, members] : groups) {
        SummaryRow s;
        std::tie(s.reflectors, s.training_samples, s.random_steps, s.method) = key;
        std::vector<double> g, gs, b;
        for (const RawRow* r : members) {
            ++s.count;
            if (r->status != "ok") ++s.failures;
            g.push_back(r->grcd_true);
            if (!std::isnan(r->grcd_sample)) gs.push_back(r->grcd_sample);
            b.push_back(r->ber);
        }
        s.median_grcd = median(g);
        s.median_sample_grcd = median(gs);
        s.median_ber = median(b);
        s.ber_of_median_grcd = ber_from_grcd(s.median_grcd, data_samples);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace detail

inline void write_raw_csv(const std::filesystem::path& path, std::vector<RawRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.key() < b.key(); });
    auto out = detail::open_for_write(path);
    out << kRawSchema << '\n'
        << "reflectors,realization,seed,method,training_samples,random_steps,grcd_true,grcd_sample,ber,status,"
           "failed_steps,wall_ms\n";
    for (const auto& r : rows) {
        out << r.reflectors << ',' << r.realization << ',' << r.seed << ',' << r.method << ',' << r.training_samples
            << ',' << r.random_steps << ',' << format_number(r.grcd_true) << ',' << format_number(r.grcd_sample)
            << ',' << format_number(r.ber) << ',' << r.status << ',' << r.failed_steps << ','
            << format_fixed(r.wall_ms, 3) << '\n';
    }
    detail::finish_write(out, path);
}

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    auto out = detail::open_for_write(path);
    out << kSummarySchema << '\n'
        << "reflectors,method,training_samples,random_steps,count,failures,median_grcd,median_sample_grcd,"
           "median_ber,ber_of_median_grcd\n";
    for (const auto& s : rows) {
        out << s.reflectors << ',' << s.method << ',' << s.training_samples << ',' << s.random_steps << ','
            << s.count << ',' << s.failures << ',' << format_number(s.median_grcd) << ','
            << format_number(s.median_sample_grcd) << ',' << format_number(s.median_ber) << ','
            << format_number(s.ber_of_median_grcd) << '\n';
    }
    detail::finish_write(out, path);
}

// A CSV file as named columns of strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto cells = detail::split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw SchemaError("'" + path.string() + "': row with " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw SchemaError("'" + path.string() + "' has no header row");
    return t;
}

inline std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto cn = t.column("reflectors"), cm = t.column("method"), clt = t.column("training_samples"),
               ct1 = t.column("random_steps"), cc = t.column("count"), cf = t.column("failures"),
               cg = t.column("median_grcd"), cs = t.column("median_sample_grcd"), cb = t.column("median_ber"),
               cbm = t.column("ber_of_median_grcd");
    std::vector<SummaryRow> out;
    for (const auto& r : t.rows) {
        SummaryRow s;
        s.reflectors = std::stoi(r[cn]);
        s.method = r[cm];
        s.training_samples = std::stoi(r[clt]);
        s.random_steps = std::stoi(r[ct1]);
        s.count = std::stoi(r[cc]);
        s.failures = std::stoi(r[cf]);
        s.median_grcd = std::stod(r[cg]);
        s.median_sample_grcd = std::stod(r[cs]);
        s.median_ber = std::stod(r[cb]);
        s.ber_of_median_grcd = std::stod(r[cbm]);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG figures

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

// Writes a line chart with markers. Log-scaled axes draw one tick per decade.
inline void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec) {
    if (spec.series.empty()) throw InvalidInput("plot '" + path.string() + "': no series");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : spec.series) {
        for (double x : s.x) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        for (double y : s.y) {
            if (spec.log_y && !(y > 0.0)) throw InvalidInput("plot '" + path.string() + "': non-positive value on log axis");
            ymin = std::min(ymin, y), ymax = std::max(ymax, y);
        }
    }
    if (!std::isfinite(xmin) || !std::isfinite(ymin)) throw InvalidInput("plot '" + path.string() + "': no points");
    if (xmax == xmin) xmin -= 1.0, xmax += 1.0;
    double lo, hi;
    if (spec.log_y) {
        lo = std::floor(std::log10(ymin));
        hi = std::ceil(std::log10(ymax));
        if (hi == lo) hi += 1.0;
    } else {
        const double pad = ymax > ymin ? 0.05 * (ymax - ymin) : std::max(1.0, 0.05 * std::abs(ymax));
        lo = ymin - pad;
        hi = ymax + pad;
    }

    const double w = 640, h = 440, left = 80, right = 170, top = 40, bottom = 60;
    const double pw = w - left - right, ph = h - top - bottom;
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) {
        const double v = spec.log_y ? std::log10(y) : y;
        return top + (1.0 - (v - lo) / (hi - lo)) * ph;
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

    auto out = detail::open_for_write(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::svg_escape(spec.title) << "</text>\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    std::set<double> xticks;
    for (const auto& s : spec.series) xticks.insert(s.x.begin(), s.x.end());
    for (double x : xticks)
        out << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << detail::fmt_tick(x)
            << "</text>\n";
    if (spec.log_y) {
        for (double d = lo; d <= hi + 1e-9; d += 1.0) {
            const double y = top + (1.0 - (d - lo) / (hi - lo)) * ph;
            out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y << "\" y2=\"" << y
                << "\" stroke=\"#ddd\"/>\n"
                << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(d)
                << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            const double v = lo + (hi - lo) * i / 5.0;
            const double y = py(v);
            out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y << "\" y2=\"" << y
                << "\" stroke=\"#ddd\"/>\n"
                << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << detail::fmt_tick(v)
                << "</text>\n";
        }
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 18 << "\" text-anchor=\"middle\">"
        << detail::svg_escape(spec.x_label) << "</text>\n"
        << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << detail::svg_escape(spec.y_label) << (spec.log_y ? " (log scale)" : "") << "</text>\n";

    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const char* color = colors[i % std::size(colors)];
        out << "<g class=\"series\" data-name=\"" << detail::svg_escape(s.name) << "\">\n<polyline fill=\"none\" stroke=\""
            << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) out << (k ? " " : "") << px(s.x[k]) << ',' << py(s.y[k]);
        out << "\"/>\n";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            out << "<circle cx=\"" << px(s.x[k]) << "\" cy=\"" << py(s.y[k]) << "\" r=\"3.5\" fill=\"" << color
                << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << detail::svg_escape(s.name)
            << "</text>\n</g>\n";
    }
    out << "</svg>\n";
    detail::finish_write(out, path);
}

// Which summary column goes on the x axis.
enum class PlotAxis { reflectors, training_samples, random_steps };

inline const char* axis_column(PlotAxis a) {
    switch (a) {
        case PlotAxis::training_samples: return "training_samples";
        case PlotAxis::random_steps: return "random_steps";
        default: return "reflectors";
    }
}

// Median GRCD (linear axis) and BER of the median GRCD (log axis) against the
// chosen column, one series per method. Returns the files written.
inline std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& summaries,
                                                     const std::filesystem::path& out_dir,
                                                     PlotAxis axis = PlotAxis::reflectors) {
    const std::string xcol = axis_column(axis);
    std::map<std::string, std::map<double, std::pair<double, double>>> by_method;
    for (const auto& file : summaries) {
        const CsvTable t = read_csv(file);
        const auto cx = t.column(xcol), cm = t.column("method"), cg = t.column("median_grcd"),
                   cb = t.column("ber_of_median_grcd");
        for (const auto& r : t.rows) by_method[r[cm]][std::stod(r[cx])] = {std::stod(r[cg]), std::stod(r[cb])};
    }
    if (by_method.empty()) throw InvalidInput("emit_plots: no methods in the summaries");

    PlotSpec grcd_plot{"Median GRCD", xcol, "median GRCD", false, {}};
    PlotSpec ber_plot{"BER at the median GRCD", xcol, "BER", true, {}};
    for (const auto& [method, points] : by_method) {
        PlotSeries g{method, {}, {}}, b{method, {}, {}};
        for (const auto& [x, v] : points) {
            g.x.push_back(x), g.y.push_back(v.first);
            b.x.push_back(x), b.y.push_back(v.second);
        }
        grcd_plot.series.push_back(std::move(g));
        ber_plot.series.push_back(std::move(b));
    }
    const std::string stem = std::string("_vs_") + (axis == PlotAxis::reflectors ? "n" : xcol);
    const auto gpath = out_dir / ("grcd" + stem + ".svg");
    const auto bpath = out_dir / ("ber" + stem + ".svg");
    write_svg_plot(gpath, grcd_plot);
    write_svg_plot(bpath, ber_plot);
    return {gpath, bpath};
}

}  // namespace ambc
