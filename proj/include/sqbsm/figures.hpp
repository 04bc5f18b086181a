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

#ifndef SQBSM_FIGURES_HPP
#define SQBSM_FIGURES_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqbsm/emit.hpp"
#include "sqbsm/sweep.hpp"

namespace sqbsm {

// Canned sweeps that regenerate the published plots:
//   fig3   zero-error p_s vs r, unlimited resolution
//   fig4   zero-error p_s vs r, n_max = 1..12 and unlimited
//   fig5   p_s vs r at n_max = 7 for error budgets up to 1e-4 .. 1e-1
//   fig6   p_s vs confidence scatter at n_max = 7, with its envelope
//   fig7   envelopes for n_max = 1..12 and unlimited
//   fig8   lossy envelopes at n_max = 7, eta = 0.90 .. 1.00
//   fig9   lossy envelopes for n_max = 1..9, eta in {0.90, 0.95, 0.98, 1.00}
//   fig10  as fig9 for n_max = 7..9, restricted to confidence >= 0.9925
inline constexpr std::array<std::string_view, 8> kFigureNames = {"fig3", "fig4", "fig5", "fig6",
                                                                 "fig7", "fig8", "fig9", "fig10"};

inline constexpr double kHighConfidenceFloor = 0.9925;

struct FigureOptions {
    std::optional<RGrid> r_grid;
    unsigned threads = 0;
    bool include_singular = true;
    bool allow_coinflip = false;
    double bin_width = 0.002;
    LossRoute loss_route = LossRoute::kBinomialThinning;
    ProgressFn progress;
};

struct FigureOutput {
    std::vector<SweepPoint> points;      ///< curve figures only
    std::vector<EnvelopePoint> envelope;  ///< envelope figures, all groups concatenated
    std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::vector<int> range_n_max(int lo, int hi, bool with_infinite) {
    std::vector<int> v;
    for (int n = lo; n <= hi; ++n) v.push_back(n);
    if (with_infinite) v.push_back(kInfiniteNmax);
    return v;
}

inline SweepSpec base_spec(const FigureOptions &o) {
    SweepSpec s;
    if (o.r_grid) s.r_grid = *o.r_grid;
    s.threads = o.threads;
    s.include_singular = o.include_singular;
    s.allow_coinflip = o.allow_coinflip;
    s.loss_route = o.loss_route;
    s.progress = o.progress;
    return s;
}

/// Budgets for the four error ranges [0, 1e-4] .. [0, 1e-1].
inline std::vector<double> panel_budgets() {
    std::vector<double> b{0.0};
    for (double lo : {1e-5, 1e-4, 1e-3, 1e-2}) {
        for (double x : decade_budgets(lo)) b.push_back(x);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

inline std::string name_for(int n_max, double eta) {
    std::string s = "n_max=" + n_max_text(n_max);
    if (eta < 1.0) s += " eta=" + format_double(eta);
    return s;
}

/// One envelope per (n_max, eta) group, sweeping the groups one at a time.
inline FigureOutput envelope_family(const FigureOptions &o, const std::vector<int> &n_list,
                                    const std::vector<double> &eta_list, double alpha_floor, Plot &plot) {
    FigureOutput out;
    for (int n : n_list) {
        for (double eta : eta_list) {
            SweepSpec s = base_spec(o);
            s.n_max = {n};
            s.eta = {eta};
            auto pts = psd_sweep(s);
            auto env = envelope(pts, o.bin_width);
            PlotSeries series{name_for(n, eta), {}, false};
            for (const auto &e : env) {
                if (e.alpha < alpha_floor) continue;
                series.xy.emplace_back(e.alpha, e.p_s);
                out.envelope.push_back(e);
            }
            plot.series.push_back(std::move(series));
        }
    }
    return out;
}

}  // namespace detail

/// Runs one recipe and writes <name>.csv (points or envelope) and <name>.svg
/// under `dir`; fig6 also writes <name>_envelope.csv.
inline FigureOutput run_figure(std::string_view name, const std::filesystem::path &dir,
                               const FigureOptions &opts = {}) {
    const std::string base(name);
    FigureOutput out;
    Plot plot;
    bool curve = false;

    if (name == "fig3" || name == "fig4") {
        SweepSpec s = detail::base_spec(opts);
        s.n_max = name == "fig3" ? std::vector<int>{kInfiniteNmax} : detail::range_n_max(1, 12, true);
        out.points = usd_sweep(s);
        plot = curve_plot(out.points, "zero-error success probability");
        curve = true;
    } else if (name == "fig5") {
        SweepSpec s = detail::base_spec(opts);
        s.n_max = {7};
        s.pe_max = detail::panel_budgets();
        out.points = psd_sweep(s);
        std::vector<SweepPoint> shown;
        for (const auto &p : out.points) {
            if (p.pe_max == 0.0 || p.pe_max == 1e-4 || p.pe_max == 1e-3 || p.pe_max == 1e-2 || p.pe_max == 1e-1)
                shown.push_back(p);
        }
        plot = curve_plot(shown, "p_s vs r at n_max=7 for error budgets");
        curve = true;
    } else if (name == "fig6") {
        SweepSpec s = detail::base_spec(opts);
        s.n_max = {7};
        out.points = psd_sweep(s);
        out.envelope = envelope(out.points, opts.bin_width);
        plot = Plot{"p_s vs confidence at n_max=7", "confidence alpha", "success probability p_s", {}};
        PlotSeries scatter{"sweep points", {}, true};
        for (const auto &p : out.points)
            if (p.alpha) scatter.xy.emplace_back(*p.alpha, p.p_s);
        PlotSeries env{"envelope", {}, false};
        for (const auto &e : out.envelope) env.xy.emplace_back(e.alpha, e.p_s);
        plot.series = {std::move(scatter), std::move(env)};
        curve = true;
        std::ostringstream es;
        write_envelope_csv(es, out.envelope);
        write_file(dir / (base + "_envelope.csv"), es.str());
        out.files.push_back(dir / (base + "_envelope.csv"));
    } else if (name == "fig7" || name == "fig8" || name == "fig9" || name == "fig10") {
        std::vector<int> n_list;
        std::vector<double> eta_list;
        double floor = kAlphaFloor;
        if (name == "fig7") {
            n_list = detail::range_n_max(1, 12, true);
            eta_list = {1.0};
        } else if (name == "fig8") {
            n_list = {7};
            eta_list = {0.90, 0.92, 0.94, 0.96, 0.98, 1.00};
        } else if (name == "fig9") {
            n_list = detail::range_n_max(1, 9, false);
            eta_list = {0.90, 0.95, 0.98, 1.00};
        } else {
            n_list = {7, 8, 9};
            eta_list = {0.90, 0.95, 0.98, 1.00};
            floor = kHighConfidenceFloor;
        }
        plot = Plot{"maximum p_s vs confidence", "confidence alpha", "success probability p_s", {}};
        auto fam = detail::envelope_family(opts, n_list, eta_list, floor, plot);
        out.envelope = std::move(fam.envelope);
    } else {
        throw std::invalid_argument("unknown figure '" + base + "'");
    }

    std::ostringstream csv;
    if (curve) {
        write_points_csv(csv, out.points);
    } else {
        write_envelope_csv(csv, out.envelope);
    }
    write_file(dir / (base + ".csv"), csv.str());
    out.files.push_back(dir / (base + ".csv"));
    std::ostringstream svg;
    write_svg(svg, plot);
    write_file(dir / (base + ".svg"), svg.str());
    out.files.push_back(dir / (base + ".svg"));
    return out;
}

}  // namespace sqbsm

#endif  // SQBSM_FIGURES_HPP
