// Copyright 2026 The sqbsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SQBSM_EMIT_HPP
#define SQBSM_EMIT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "sqbsm/format.hpp"
#include "sqbsm/sweep.hpp"

namespace sqbsm {

inline constexpr std::string_view kPointCsvHeader = "r,n_max,eta,pe_max,p_s,p_e,alpha,erasure,n_selected,deficit";
inline constexpr std::string_view kEnvelopeCsvHeader = "alpha_center,alpha,p_s,p_e,r,pe_max,n_max,eta,count";

// Absent confidence is written as an empty field.
inline void write_points_csv(std::ostream &os, std::span<const SweepPoint> points) {
    os << kPointCsvHeader << '\n';
    for (const auto &p : points) {
        os << format_double(p.r) << ',' << n_max_text(p.n_max) << ',' << format_double(p.eta) << ','
           << format_double(p.pe_max) << ',' << format_double(p.p_s) << ',' << format_double(p.p_e) << ','
           << (p.alpha ? format_double(*p.alpha) : std::string()) << ',' << format_double(p.erasure) << ','
           << p.n_selected << ',' << format_double(p.deficit) << '\n';
    }
}

inline std::vector<SweepPoint> read_points_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != kPointCsvHeader) {
        throw std::invalid_argument("missing sweep CSV header");
    }
    std::vector<SweepPoint> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 10) throw std::invalid_argument("malformed sweep CSV row: " + line);
        SweepPoint p;
        p.r = parse_double(f[0]);
        p.n_max = parse_n_max(f[1]);
        p.eta = parse_double(f[2]);
        p.pe_max = parse_double(f[3]);
        p.p_s = parse_double(f[4]);
        p.p_e = parse_double(f[5]);
        if (!f[6].empty()) p.alpha = parse_double(f[6]);
        p.erasure = parse_double(f[7]);
        p.n_selected = static_cast<std::size_t>(parse_int(f[8]));
        p.deficit = parse_double(f[9]);
        out.push_back(p);
    }
    return out;
}

namespace detail {
inline nlohmann::json json_number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return nullptr;
    return x;
}
}  // namespace detail

inline nlohmann::json points_to_json(std::span<const SweepPoint> points) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &p : points) {
        arr.push_back({{"r", p.r},
                       {"n_max", n_max_text(p.n_max)},
                       {"eta", p.eta},
                       {"pe_max", detail::json_number(p.pe_max)},
                       {"p_s", p.p_s},
                       {"p_e", p.p_e},
                       {"alpha", p.alpha ? nlohmann::json(*p.alpha) : nlohmann::json(nullptr)},
                       {"erasure", p.erasure},
                       {"n_selected", p.n_selected},
                       {"deficit", p.deficit}});
    }
    return arr;
}

inline void write_envelope_csv(std::ostream &os, std::span<const EnvelopePoint> env) {
    os << kEnvelopeCsvHeader << '\n';
    for (const auto &e : env) {
        os << format_double(e.alpha_center) << ',' << format_double(e.alpha) << ',' << format_double(e.p_s) << ','
           << format_double(e.p_e) << ',' << format_double(e.r) << ',' << format_double(e.pe_max) << ','
           << n_max_text(e.n_max) << ',' << format_double(e.eta) << ',' << e.count << '\n';
    }
}

inline nlohmann::json envelope_to_json(std::span<const EnvelopePoint> env) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &e : env) {
        arr.push_back({{"alpha_center", e.alpha_center},
                       {"alpha", e.alpha},
                       {"p_s", e.p_s},
                       {"p_e", e.p_e},
                       {"r", e.r},
                       {"pe_max", detail::json_number(e.pe_max)},
                       {"n_max", n_max_text(e.n_max)},
                       {"eta", e.eta},
                       {"count", e.count}});
    }
    return arr;
}

// ---------------------------------------------------------------------------
// SVG line plots

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> xy;
    bool markers = false;  ///< dots instead of a polyline
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

namespace detail {

inline std::string fixed2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline constexpr std::array<std::string_view, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace detail

/// Writes a self-contained SVG. Output depends only on the plot contents.
inline void write_svg(std::ostream &os, const Plot &plot) {
    constexpr double W = 720, H = 480, L = 70, R = 170, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto &s : plot.series)
        for (auto [x, y] : s.xy) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    using detail::fixed2;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::xml_escape(plot.title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0;
        const double yv = y0 + (y1 - y0) * i / 5.0;
        os << "<text x=\"" << fixed2(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
           << format_double(std::round(xv * 1000) / 1000) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << fixed2(py(yv) + 4) << "\" text-anchor=\"end\">"
           << format_double(std::round(yv * 1000) / 1000) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
       << detail::xml_escape(plot.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (T + H - B) / 2 << ")\">" << detail::xml_escape(plot.y_label) << "</text>\n";

    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const auto &s = plot.series[si];
        const auto colour = detail::kPalette[si % detail::kPalette.size()];
        if (s.markers) {
            for (auto [x, y] : s.xy) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                os << "<circle cx=\"" << fixed2(px(x)) << "\" cy=\"" << fixed2(py(y)) << "\" r=\"1.5\" fill=\""
                   << colour << "\"/>\n";
            }
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
            bool first = true;
            for (auto [x, y] : s.xy) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                os << (first ? "" : " ") << fixed2(px(x)) << ',' << fixed2(py(y));
                first = false;
            }
            os << "\"/>\n";
        }
        const double ly = T + 14 + 16 * static_cast<double>(si);
        os << "<rect x=\"" << W - R + 12 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << colour
           << "\"/>\n";
        os << "<text x=\"" << W - R + 28 << "\" y=\"" << ly << "\">" << detail::xml_escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
}

/// p_s against r, one series per (n_max, eta, pe_max).
inline Plot curve_plot(std::span<const SweepPoint> points, std::string title) {
    Plot plot{std::move(title), "squeezing intensity r", "success probability p_s", {}};
    std::map<std::tuple<int, double, double>, PlotSeries> groups;
    for (const auto &p : points) {
        auto &s = groups[{p.n_max, p.eta, p.pe_max}];
        if (s.name.empty()) {
            s.name = "n_max=" + n_max_text(p.n_max);
            if (p.eta < 1.0) s.name += " eta=" + format_double(p.eta);
            if (p.pe_max > 0.0) s.name += " pe<=" + format_double(p.pe_max);
        }
        s.xy.emplace_back(p.r, p.p_s);
    }
    for (auto &[k, s] : groups) plot.series.push_back(std::move(s));
    return plot;
}

inline void write_file(const std::filesystem::path &path, const std::string &contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << contents;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace sqbsm

#endif  // SQBSM_EMIT_HPP
