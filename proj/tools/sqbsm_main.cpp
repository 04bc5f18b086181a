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

// sqbsm: command-line front end for detection tables, discrimination and
// parameter sweeps of the squeezed Bell measurement circuit.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqbsm/sqbsm.hpp"

namespace {

using namespace sqbsm;

constexpr int kExitInvalidSpec = 2;
constexpr int kExitFailure = 1;

struct Options {
    // circuit
    double r = 0.0;
    std::vector<double> per_mode_r;
    std::string nmax = "inf";
    double eta = 1.0;
    std::string loss_route = "thinning";
    // sweeps
    std::string r_grid = "0:0.9:0.005";
    std::vector<std::string> nmax_list{"inf"};
    std::vector<double> eta_list{1.0};
    std::vector<std::string> pe_max;
    bool include_singular = true;
    bool allow_coinflip = false;
    double bin_width = 0.002;
    double alpha_min = kAlphaFloor;
    // discriminate
    bool oracle = false;
    std::string table_path;
    // scan
    std::vector<double> scan_values{0.0, 0.15, 0.30, 0.45, 0.60, 0.6585, 0.75};
    // figures
    std::vector<std::string> figures;
    // output
    std::string out;
    std::string format = "csv";
    unsigned threads = 0;
    bool quiet = false;
};

/// Prints "done/total, percent, ETA" to stderr, at most once per second.
class ProgressReporter {
  public:
    explicit ProgressReporter(bool enabled, std::string what) : enabled_(enabled), what_(std::move(what)) {}

    ProgressFn fn() {
        if (!enabled_) return {};
        start_ = std::chrono::steady_clock::now();
        last_ = start_;
        return [this](std::size_t done, std::size_t total) { report(done, total); };
    }

  private:
    void report(std::size_t done, std::size_t total) {
        std::lock_guard lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        if (done != total && now - last_ < std::chrono::seconds(1)) return;
        last_ = now;
        const double elapsed = std::chrono::duration<double>(now - start_).count();
        const double eta = done ? elapsed * static_cast<double>(total - done) / static_cast<double>(done) : 0.0;
        std::fprintf(stderr, "\r%s: %zu/%zu (%.1f%%) elapsed %.0fs eta %.0fs", what_.c_str(), done, total,
                     100.0 * static_cast<double>(done) / static_cast<double>(total), elapsed, eta);
        if (done == total) std::fputc('\n', stderr);
        std::fflush(stderr);
    }

    bool enabled_;
    std::string what_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point start_, last_;
};

LossRoute parse_route(const std::string &s) {
    if (s == "thinning") return LossRoute::kBinomialThinning;
    if (s == "explicit") return LossRoute::kExplicitModes;
    throw std::invalid_argument("--loss-route must be 'thinning' or 'explicit'");
}

std::vector<double> parse_budgets(const std::vector<std::string> &text) {
    if (text.empty()) return default_pe_budgets();
    std::vector<double> out;
    for (const auto &t : text) out.push_back(parse_double(t));
    return out;
}

CircuitParams circuit_from(const Options &o) {
    const int n_max = parse_n_max(o.nmax);
    CircuitParams p;
    if (!o.per_mode_r.empty()) {
        if (o.per_mode_r.size() != 4) throw std::invalid_argument("--per-mode-r needs exactly four values");
        p = CircuitParams::per_mode({o.per_mode_r[0], o.per_mode_r[1], o.per_mode_r[2], o.per_mode_r[3]}, o.eta,
                                    n_max);
    } else {
        p = CircuitParams::uniform(o.r, o.eta, n_max);
    }
    p.loss_route = parse_route(o.loss_route);
    return p;
}

SweepSpec sweep_from(const Options &o) {
    SweepSpec s;
    s.r_grid = RGrid::parse(o.r_grid);
    s.n_max.clear();
    for (const auto &n : o.nmax_list) s.n_max.push_back(parse_n_max(n));
    s.eta = o.eta_list;
    s.pe_max = parse_budgets(o.pe_max);
    s.include_singular = o.include_singular;
    s.allow_coinflip = o.allow_coinflip;
    s.loss_route = parse_route(o.loss_route);
    s.threads = o.threads;
    s.validate();
    return s;
}

void require_format(const Options &o, std::initializer_list<std::string_view> allowed) {
    for (auto f : allowed)
        if (o.format == f) return;
    throw std::invalid_argument("format '" + o.format + "' is not supported by this command");
}

void emit(const Options &o, const std::string &contents) {
    if (o.out.empty() || o.out == "-") {
        std::cout << contents;
    } else {
        write_file(o.out, contents);
    }
}

std::string dump(const nlohmann::json &j) { return j.dump(2) + "\n"; }

int run_table(const Options &o) {
    require_format(o, {"csv", "json"});
    const auto table = build_detection_table(circuit_from(o));
    if (o.format == "json") {
        emit(o, dump(table_to_json(table)));
    } else {
        std::ostringstream os;
        write_table_csv(os, table);
        emit(o, os.str());
    }
    return 0;
}

/// Reads a table written by `table`, JSON or CSV by content.
DetectionTable load_table(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open table file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return table_from_json(nlohmann::json::parse(text));
    std::istringstream is(text);
    return read_table_csv(is);
}

int run_discriminate(const Options &o) {
    require_format(o, {"csv", "json"});
    const auto table = o.table_path.empty() ? build_detection_table(circuit_from(o)) : load_table(o.table_path);
    const auto &params = table.params;
    const auto classes = classify(table);
    std::vector<double> budgets;
    for (const auto &t : o.pe_max) budgets.push_back(parse_double(t));
    if (budgets.empty()) budgets.push_back(0.0);

    const PsdOptions opts{o.allow_coinflip};
    PsdSelector selector(classes, opts);
    double deficit = 0.0;
    for (const auto &lt : table.labels) deficit += kBellPrior * lt.deficit;

    nlohmann::json results = nlohmann::json::array();
    std::vector<SweepPoint> points;
    const SweepCell cell{params.max_r(), params.truncation.n_max, params.loss.eta, deficit, {}};
    for (double b : budgets) {
        const auto res = o.oracle ? psd_oracle(classes, ErrorBudget{b}, opts) : selector.select(ErrorBudget{b});
        auto j = result_to_json(res);
        j["pe_max"] = detail::json_number(b);
        results.push_back(std::move(j));
        points.push_back(make_point(cell, b, res));
    }
    if (o.format == "json") {
        std::size_t unique = 0, duplicate = 0, excluded = 0;
        for (const auto &c : classes) {
            unique += c.kind == PatternKind::kUnique;
            duplicate += c.kind == PatternKind::kDuplicate;
            excluded += c.kind == PatternKind::kExcluded;
        }
        emit(o, dump({{"params", params_to_json(params)},
                      {"deficit", deficit},
                      {"patterns", {{"unique", unique}, {"duplicate", duplicate}, {"excluded", excluded}}},
                      {"solver", o.oracle ? "oracle" : "greedy"},
                      {"results", std::move(results)}}));
    } else {
        std::ostringstream os;
        write_points_csv(os, points);
        emit(o, os.str());
    }
    return 0;
}

int emit_points(const Options &o, const std::vector<SweepPoint> &pts, const std::string &title) {
    if (o.format == "json") {
        emit(o, dump(points_to_json(pts)));
    } else if (o.format == "svg") {
        std::ostringstream os;
        write_svg(os, curve_plot(pts, title));
        emit(o, os.str());
    } else {
        std::ostringstream os;
        write_points_csv(os, pts);
        emit(o, os.str());
    }
    return 0;
}

int run_usd_sweep(const Options &o) {
    require_format(o, {"csv", "json", "svg"});
    SweepSpec s = sweep_from(o);
    s.pe_max = {0.0};
    ProgressReporter pr(!o.quiet, "usd-sweep");
    s.progress = pr.fn();
    return emit_points(o, usd_sweep(s), "zero-error success probability");
}

int run_psd_sweep(const Options &o) {
    require_format(o, {"csv", "json", "svg"});
    SweepSpec s = sweep_from(o);
    ProgressReporter pr(!o.quiet, "psd-sweep");
    s.progress = pr.fn();
    return emit_points(o, psd_sweep(s), "success probability under error budgets");
}

int run_envelope(const Options &o) {
    require_format(o, {"csv", "json", "svg"});
    SweepSpec s = sweep_from(o);
    ProgressReporter pr(!o.quiet, "envelope");
    s.progress = pr.fn();
    const auto pts = psd_sweep(s);

    // one envelope per (n_max, eta) group
    Plot plot{"maximum p_s vs confidence", "confidence alpha", "success probability p_s", {}};
    std::vector<EnvelopePoint> all;
    for (int n : s.n_max) {
        for (double e : s.eta) {
            std::vector<SweepPoint> group;
            for (const auto &p : pts)
                if (p.n_max == n && p.eta == e) group.push_back(p);
            PlotSeries series{detail::name_for(n, e), {}, false};
            for (const auto &ep : envelope(group, o.bin_width)) {
                if (ep.alpha < o.alpha_min) continue;
                series.xy.emplace_back(ep.alpha, ep.p_s);
                all.push_back(ep);
            }
            plot.series.push_back(std::move(series));
        }
    }
    std::ostringstream os;
    if (o.format == "json") {
        os << dump(envelope_to_json(all));
    } else if (o.format == "svg") {
        write_svg(os, plot);
    } else {
        write_envelope_csv(os, all);
    }
    emit(o, os.str());
    return 0;
}

int run_scan(const Options &o) {
    require_format(o, {"csv", "json"});
    ProgressReporter pr(!o.quiet, "nonuniform-scan");
    const auto rep = nonuniform_scan(o.scan_values, parse_n_max(o.nmax), o.threads, pr.fn());
    std::ostringstream os;
    if (o.format == "json") {
        auto entry = [](const ScanEntry &e) { return nlohmann::json{{"r", e.r}, {"p_s", e.p_s}}; };
        nlohmann::json entries = nlohmann::json::array();
        for (const auto &e : rep.entries) entries.push_back(entry(e));
        os << dump({{"n_max", o.nmax},
                    {"points", rep.entries.size()},
                    {"best_uniform", entry(rep.best_uniform)},
                    {"best_nonuniform", rep.best_nonuniform ? entry(*rep.best_nonuniform) : nlohmann::json(nullptr)},
                    {"beating_count", rep.beating_count},
                    {"nonuniform_beats_uniform", rep.nonuniform_beats_uniform()},
                    {"entries", std::move(entries)}});
    } else {
        os << "# best_uniform=" << format_double(rep.best_uniform.p_s) << '\n'
           << "# beating_count=" << rep.beating_count << '\n'
           << "r1,r2,r3,r4,p_s,uniform\n";
        for (const auto &e : rep.entries) {
            os << format_double(e.r[0]) << ',' << format_double(e.r[1]) << ',' << format_double(e.r[2]) << ','
               << format_double(e.r[3]) << ',' << format_double(e.p_s) << ',' << (e.uniform() ? 1 : 0) << '\n';
        }
    }
    emit(o, os.str());
    std::cerr << "best uniform p_s " << format_double(rep.best_uniform.p_s) << ", non-uniform tuples beating it: "
              << rep.beating_count << '\n';
    return 0;
}

int run_figures(const Options &o) {
    std::vector<std::string> names = o.figures;
    if (names.empty() || (names.size() == 1 && names[0] == "all")) {
        names.assign(kFigureNames.begin(), kFigureNames.end());
    }
    for (const auto &n : names) {
        if (std::find(kFigureNames.begin(), kFigureNames.end(), n) == kFigureNames.end()) {
            throw std::invalid_argument("unknown figure '" + n + "'");
        }
    }
    const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("figures") : std::filesystem::path(o.out);
    FigureOptions fo;
    if (o.r_grid != "0:0.9:0.005") fo.r_grid = RGrid::parse(o.r_grid);
    fo.threads = o.threads;
    fo.include_singular = o.include_singular;
    fo.allow_coinflip = o.allow_coinflip;
    fo.bin_width = o.bin_width;
    fo.loss_route = parse_route(o.loss_route);
    for (const auto &n : names) {
        ProgressReporter pr(!o.quiet, n);
        fo.progress = pr.fn();
        const auto res = run_figure(n, dir, fo);
        for (const auto &f : res.files) std::cerr << "wrote " << f.string() << '\n';
    }
    return 0;
}

void add_circuit_flags(CLI::App *c, Options &o) {
    c->add_option("--r", o.r, "Squeezing intensity on all four modes")->check(CLI::Range(0.0, kMaxValidatedR));
    c->add_option("--per-mode-r", o.per_mode_r, "Four per-mode intensities, comma separated")->delimiter(',');
    c->add_option("--nmax", o.nmax, "Detector photon-number ceiling, or 'inf'");
    c->add_option("--eta", o.eta, "Channel transmissivity in [0, 1]");
    c->add_option("--loss-route", o.loss_route, "Loss model: thinning or explicit");
}

void add_sweep_flags(CLI::App *c, Options &o, bool budgets) {
    c->add_option("--r-grid", o.r_grid, "r grid as start:stop:step");
    c->add_option("--nmax", o.nmax_list, "Photon-number ceilings (comma separated, 'inf' allowed)")->delimiter(',');
    c->add_option("--eta", o.eta_list, "Transmissivities (comma separated)")->delimiter(',');
    if (budgets) {
        c->add_option("--pe-max", o.pe_max, "Error budgets (comma separated, 'inf' allowed)")->delimiter(',');
        c->add_flag("--allow-coinflip", o.allow_coinflip, "Also admit exactly tied patterns");
    }
    c->add_flag("--include-singular,!--no-include-singular", o.include_singular,
                "Add r = acosh(2)/2 to the grid (default on)");
    c->add_option("--loss-route", o.loss_route, "Loss model: thinning or explicit");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Squeezed-light Bell measurement simulator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key = value config file");
    Options o;
    app.add_option("--out,-o", o.out, "Output file (directory for 'figures'); stdout if omitted");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json", "svg"}));
    app.add_option("--threads", o.threads, "Worker threads, 0 = all cores");
    app.add_flag("--quiet,-q", o.quiet, "No progress report on stderr");

    auto *table = app.add_subcommand("table", "Detection-pattern probabilities for the four Bell inputs");
    add_circuit_flags(table, o);

    auto *disc = app.add_subcommand("discriminate", "Zero-error and error-budgeted discrimination at one point");
    add_circuit_flags(disc, o);
    disc->add_option("--table", o.table_path, "Detection table file from 'table' (overrides the circuit flags)");
    disc->add_option("--pe-max", o.pe_max, "Error budgets (comma separated, default 0)")->delimiter(',');
    disc->add_flag("--allow-coinflip", o.allow_coinflip, "Also admit exactly tied patterns");
    disc->add_flag("--oracle", o.oracle, "Use the exact subset search instead of the greedy selection");

    auto *usd = app.add_subcommand("usd-sweep", "Zero-error success probability over an r grid");
    add_sweep_flags(usd, o, false);

    auto *psd = app.add_subcommand("psd-sweep", "Error-budgeted success probability over r and budgets");
    add_sweep_flags(psd, o, true);

    auto *env = app.add_subcommand("envelope", "Best success probability per confidence bin");
    add_sweep_flags(env, o, true);
    env->add_option("--bin-width", o.bin_width, "Confidence bin width")->check(CLI::PositiveNumber);
    env->add_option("--alpha-min", o.alpha_min, "Drop envelope points below this confidence");

    auto *scan = app.add_subcommand("nonuniform-scan", "Zero-error success over per-mode intensity tuples");
    scan->add_option("--values", o.scan_values, "Per-mode r values (comma separated)")->delimiter(',');
    scan->add_option("--nmax", o.nmax, "Detector photon-number ceiling, or 'inf'");

    auto *figs = app.add_subcommand("figures", "Regenerate the canned figure data and plots");
    figs->add_option("names", o.figures, "fig3 fig4 fig5 fig6 fig7 fig8 fig9 fig10, or all");
    figs->add_option("--r-grid", o.r_grid, "r grid as start:stop:step");
    figs->add_flag("--include-singular,!--no-include-singular", o.include_singular, "Add r = acosh(2)/2");
    figs->add_flag("--allow-coinflip", o.allow_coinflip, "Also admit exactly tied patterns");
    figs->add_option("--bin-width", o.bin_width, "Confidence bin width")->check(CLI::PositiveNumber);
    figs->add_option("--loss-route", o.loss_route, "Loss model: thinning or explicit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitInvalidSpec;
    }

    try {
        if (*table) return run_table(o);
        if (*disc) return run_discriminate(o);
        if (*usd) return run_usd_sweep(o);
        if (*psd) return run_psd_sweep(o);
        if (*env) return run_envelope(o);
        if (*scan) return run_scan(o);
        if (*figs) return run_figures(o);
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid specification: " << e.what() << '\n';
        return kExitInvalidSpec;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
