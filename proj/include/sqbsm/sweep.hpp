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

#ifndef SQBSM_SWEEP_HPP
#define SQBSM_SWEEP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sqbsm/bsm.hpp"
#include "sqbsm/discrimination.hpp"
#include "sqbsm/format.hpp"
#include "sqbsm/parallel.hpp"

namespace sqbsm {

/// Evenly spaced r values, start..stop inclusive.
struct RGrid {
    double start = 0.0;
    double stop = kMaxValidatedR;
    double step = 0.005;

    void validate() const {
        if (!(step > 0.0)) throw std::invalid_argument("r grid step must be positive");
        if (!(start >= 0.0) || !(stop >= start)) throw std::invalid_argument("r grid needs 0 <= start <= stop");
        if (stop > kMaxValidatedR + 1e-12) throw std::invalid_argument("r grid stop must be <= 0.9");
    }

    /// Grid values, snapped to 1e-12 so that e.g. 0.3 prints as 0.3, plus the
    /// singular r when requested and inside the range.
    std::vector<double> points(bool include_singular) const {
        validate();
        std::vector<double> out;
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
        }
        const double rs = singular_r();
        if (include_singular && rs >= start && rs <= stop) out.push_back(rs);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Parses "start:stop:step".
    static RGrid parse(std::string_view text) {
        auto f = split(text, ':');
        if (f.size() != 3) throw std::invalid_argument("r grid must look like start:stop:step");
        RGrid g{parse_double(f[0]), parse_double(f[1]), parse_double(f[2])};
        g.validate();
        return g;
    }
};

/// Error budgets used by default: zero, 40 log-spaced values per decade
/// from 1e-5 through 1, and an unlimited budget.
inline std::vector<double> default_pe_budgets() {
    std::vector<double> out{0.0};
    for (int k = 0; k <= 200; ++k) out.push_back(std::pow(10.0, -5.0 + k / 40.0));
    out.push_back(std::numeric_limits<double>::infinity());
    return out;
}

/// Budgets within one decade [lo, 10 lo], 40 log-spaced values plus the top.
inline std::vector<double> decade_budgets(double lo) {
    std::vector<double> out;
    for (int k = 0; k <= 40; ++k) out.push_back(lo * std::pow(10.0, k / 40.0));
    return out;
}

struct SweepSpec {
    RGrid r_grid{};
    std::vector<int> n_max{kInfiniteNmax};
    std::vector<double> eta{1.0};
    std::vector<double> pe_max = default_pe_budgets();
    bool include_singular = true;
    bool allow_coinflip = false;
    LossRoute loss_route = LossRoute::kBinomialThinning;
    unsigned threads = 0;  ///< 0 = hardware concurrency
    ProgressFn progress;

    void validate() const {
        r_grid.validate();
        if (n_max.empty() || eta.empty()) throw std::invalid_argument("n_max and eta lists must be non-empty");
        for (int n : n_max) {
            if (n != kInfiniteNmax && n < 0) throw std::invalid_argument("n_max must be >= 0");
        }
        for (double e : eta) LossParams{e}.validate();
        for (double b : pe_max) ErrorBudget{b}.validate();
    }
};

struct SweepPoint {
    double r = 0.0;
    int n_max = kInfiniteNmax;
    double eta = 1.0;
    double pe_max = 0.0;
    double p_s = 0.0;
    double p_e = 0.0;
    std::optional<double> alpha;
    double erasure = 1.0;
    std::size_t n_selected = 0;
    double deficit = 0.0;  ///< prior-weighted truncation deficit

    friend bool operator==(const SweepPoint &, const SweepPoint &) = default;
};

inline bool point_order(const SweepPoint &a, const SweepPoint &b) {
    return std::tie(a.n_max, a.eta, a.pe_max, a.r) < std::tie(b.n_max, b.eta, b.pe_max, b.r);
}

/// Everything a sweep needs from one (r, n_max, eta) circuit.
struct SweepCell {
    double r = 0.0;
    int n_max = kInfiniteNmax;
    double eta = 1.0;
    double deficit = 0.0;
    std::vector<PatternClass> classes;
};

inline SweepCell evaluate_cell(double r, int n_max, double eta, LossRoute route) {
    CircuitParams params = CircuitParams::uniform(r, eta, n_max);
    params.loss_route = route;
    const DetectionTable table = build_detection_table(params);
    SweepCell cell{r, n_max, eta, 0.0, classify(table)};
    for (const auto &lt : table.labels) cell.deficit += kBellPrior * lt.deficit;
    return cell;
}

inline SweepPoint make_point(const SweepCell &cell, double pe_max, const DiscriminationResult &res) {
    return {cell.r, cell.n_max, cell.eta, pe_max, res.p_s, res.p_e, res.alpha, res.erasure,
            res.selected.size(), cell.deficit};
}

namespace detail {

template <typename PerCell>
std::vector<SweepPoint> run_cells(const SweepSpec &spec, PerCell &&per_cell) {
    spec.validate();
    struct Job {
        double r;
        int n_max;
        double eta;
    };
    std::vector<Job> jobs;
    for (int n : spec.n_max)
        for (double e : spec.eta)
            for (double r : spec.r_grid.points(spec.include_singular)) jobs.push_back({r, n, e});

    std::vector<std::vector<SweepPoint>> results(jobs.size());
    parallel_for(
        jobs.size(), spec.threads,
        [&](std::size_t i) {
            const SweepCell cell = evaluate_cell(jobs[i].r, jobs[i].n_max, jobs[i].eta, spec.loss_route);
            results[i] = per_cell(cell);
        },
        spec.progress);

    std::vector<SweepPoint> out;
    for (auto &v : results) out.insert(out.end(), v.begin(), v.end());
    std::sort(out.begin(), out.end(), point_order);
    return out;
}

}  // namespace detail

/// Zero-error curves: one point per (r, n_max, eta) with pe_max = 0.
inline std::vector<SweepPoint> usd_sweep(const SweepSpec &spec) {
    return detail::run_cells(spec, [](const SweepCell &cell) {
        const double ps = usd_success(cell.classes);
        DiscriminationResult res = detail::finish(ps, {});
        return std::vector<SweepPoint>{make_point(cell, 0.0, res)};
    });
}

/// One point per (r, n_max, eta, pe_max).
inline std::vector<SweepPoint> psd_sweep(const SweepSpec &spec) {
    if (spec.pe_max.empty()) throw std::invalid_argument("psd sweep needs at least one error budget");
    const PsdOptions opts{spec.allow_coinflip};
    return detail::run_cells(spec, [&](const SweepCell &cell) {
        PsdSelector selector(cell.classes, opts);
        std::vector<SweepPoint> pts;
        for (double b : spec.pe_max) pts.push_back(make_point(cell, b, selector.select(ErrorBudget{b})));
        return pts;
    });
}

// ---------------------------------------------------------------------------
// Envelopes

/// Largest p_s among sweep points whose confidence falls in one alpha bin.
struct EnvelopePoint {
    double alpha_center = 0.0;
    double alpha = 0.0;  ///< confidence of the maximizing point
    double p_s = 0.0;
    double p_e = 0.0;
    double r = 0.0;
    double pe_max = 0.0;
    int n_max = kInfiniteNmax;
    double eta = 1.0;
    std::size_t count = 0;  ///< points in the bin

    friend bool operator==(const EnvelopePoint &, const EnvelopePoint &) = default;
};

inline constexpr double kAlphaFloor = 0.25;

/// Bins points by alpha over [0.25, 1] and keeps the best p_s of each bin.
/// Only occupied bins are returned, in increasing alpha. Points without a
/// confidence are skipped. Ties keep the earliest point in sweep order.
inline std::vector<EnvelopePoint> envelope(std::span<const SweepPoint> points, double bin_width = 0.002) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    const auto bins = static_cast<long>(std::ceil((1.0 - kAlphaFloor) / bin_width - 1e-9));
    std::map<long, EnvelopePoint> best;
    for (const auto &p : points) {
        if (!p.alpha) continue;
        long b = static_cast<long>(std::floor((*p.alpha - kAlphaFloor) / bin_width));
        b = std::clamp(b, 0L, bins - 1);
        auto [it, inserted] = best.try_emplace(b);
        EnvelopePoint &e = it->second;
        ++e.count;
        if (inserted || p.p_s > e.p_s) {
            const std::size_t count = e.count;
            e = EnvelopePoint{kAlphaFloor + (static_cast<double>(b) + 0.5) * bin_width,
                              *p.alpha, p.p_s, p.p_e, p.r, p.pe_max, p.n_max, p.eta, count};
        }
    }
    std::vector<EnvelopePoint> out;
    for (auto &[b, e] : best) out.push_back(e);
    return out;
}

inline const EnvelopePoint &envelope_peak(std::span<const EnvelopePoint> env) {
    if (env.empty()) throw std::invalid_argument("empty envelope");
    return *std::max_element(env.begin(), env.end(),
                             [](const EnvelopePoint &a, const EnvelopePoint &b) { return a.p_s < b.p_s; });
}

// ---------------------------------------------------------------------------
// Per-mode intensity scan

struct ScanEntry {
    std::array<double, 4> r{};
    double p_s = 0.0;

    bool uniform() const { return r[0] == r[1] && r[1] == r[2] && r[2] == r[3]; }
};

struct NonuniformReport {
    std::vector<ScanEntry> entries;  ///< lexicographic in the r tuple
    ScanEntry best_uniform;
    std::optional<ScanEntry> best_nonuniform;
    std::size_t beating_count = 0;  ///< non-uniform tuples above every uniform tuple

    bool nonuniform_beats_uniform() const { return beating_count > 0; }
};

inline constexpr std::size_t kScanWarnPoints = 10'000;
inline constexpr std::size_t kScanMaxPoints = 1'000'000;

/// Margin by which a non-uniform tuple must exceed the best uniform one to
/// count as beating it.
inline constexpr double kScanMargin = 1e-12;

/// USD success for every 4-tuple drawn from `values`, zero phases.
inline NonuniformReport nonuniform_scan(std::span<const double> values, int n_max = kInfiniteNmax,
                                        unsigned threads = 0, const ProgressFn &progress = {},
                                        std::ostream *warn = &std::cerr) {
    if (values.empty()) throw std::invalid_argument("scan needs at least one r value");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (double r : v) SqueezeParams{r, 0.0}.validate();
    const std::size_t k = v.size();
    const std::size_t total = k * k * k * k;
    if (total > kScanMaxPoints) {
        throw std::invalid_argument("scan grid of " + std::to_string(total) + " points exceeds limit");
    }
    if (total > kScanWarnPoints && warn) {
        *warn << "warning: non-uniform scan over " << total << " points\n";
    }

    NonuniformReport rep;
    rep.entries.resize(total);
    parallel_for(
        total, threads,
        [&](std::size_t idx) {
            std::array<double, 4> r{v[idx / (k * k * k)], v[(idx / (k * k)) % k], v[(idx / k) % k], v[idx % k]};
            const auto classes = classify(build_detection_table(CircuitParams::per_mode(r, 1.0, n_max)));
            rep.entries[idx] = ScanEntry{r, usd_success(classes)};
        },
        progress);

    bool have_uniform = false;
    for (const auto &e : rep.entries) {
        if (e.uniform()) {
            if (!have_uniform || e.p_s > rep.best_uniform.p_s) rep.best_uniform = e;
            have_uniform = true;
        } else if (!rep.best_nonuniform || e.p_s > rep.best_nonuniform->p_s) {
            rep.best_nonuniform = e;
        }
    }
    for (const auto &e : rep.entries) {
        if (!e.uniform() && e.p_s > rep.best_uniform.p_s + kScanMargin) ++rep.beating_count;
    }
    return rep;
}

}  // namespace sqbsm

#endif  // SQBSM_SWEEP_HPP
