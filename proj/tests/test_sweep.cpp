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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sqbsm/emit.hpp"
#include "sqbsm/figures.hpp"
#include "sqbsm/sweep.hpp"

namespace sqbsm {
namespace {

std::string csv_of(std::span<const SweepPoint> pts) {
    std::ostringstream os;
    write_points_csv(os, pts);
    return os.str();
}

SweepSpec coarse(double step = 0.1) {
    SweepSpec s;
    s.r_grid = RGrid{0.0, 0.9, step};
    s.pe_max = {0.0, 1e-3, 1e-2, 0.1, std::numeric_limits<double>::infinity()};
    return s;
}

TEST(RGrid, PointsAndSingular) {
    const RGrid g{0.0, 0.9, 0.005};
    const auto plain = g.points(false);
    EXPECT_EQ(plain.size(), 181u);
    EXPECT_EQ(plain[60], 0.3);
    EXPECT_EQ(plain.back(), 0.9);
    const auto with = g.points(true);
    EXPECT_EQ(with.size(), 182u);
    EXPECT_TRUE(std::find(with.begin(), with.end(), singular_r()) != with.end());
    EXPECT_TRUE(std::is_sorted(with.begin(), with.end()));
    EXPECT_EQ(RGrid({0.0, 0.5, 0.1}).points(true).size(), 6u);
}

TEST(RGrid, RejectsInvalid) {
    EXPECT_THROW(RGrid::parse("0:0.9"), std::invalid_argument);
    EXPECT_THROW(RGrid::parse("0:0.9:0"), std::invalid_argument);
    EXPECT_THROW(RGrid::parse("0:1.2:0.1"), std::invalid_argument);
    EXPECT_THROW(RGrid::parse("0.5:0.2:0.1"), std::invalid_argument);
    EXPECT_THROW(RGrid::parse("x:0.2:0.1"), std::invalid_argument);
    const auto g = RGrid::parse("0.1:0.3:0.05");
    EXPECT_EQ(g.points(false).size(), 5u);
}

TEST(Budgets, Defaults) {
    const auto b = default_pe_budgets();
    EXPECT_EQ(b.front(), 0.0);
    EXPECT_TRUE(std::isinf(b.back()));
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    EXPECT_NEAR(b[1], 1e-5, 1e-20);
    const auto d = decade_budgets(1e-3);
    EXPECT_EQ(d.size(), 41u);
    EXPECT_NEAR(d.back(), 1e-2, 1e-17);
}

TEST(UsdSweep, PassiveBaselineAndLowCeilings) {
    SweepSpec s = coarse(0.05);
    s.n_max = {1, 2, 3, 7};
    const auto pts = usd_sweep(s);
    EXPECT_EQ(pts.size(), 4u * 20u);
    for (const auto &p : pts) {
        EXPECT_EQ(p.pe_max, 0.0);
        if (p.r == 0.0 && p.n_max >= 2) {
            EXPECT_NEAR(p.p_s, 0.5, 1e-9);
        }
        if (p.n_max <= 2) {
            EXPECT_LE(p.p_s, 0.5 + 1e-9);
        }
        if (p.n_max <= 2 && p.r > 0.0) {
            EXPECT_LT(p.p_s, 0.5);
        }
    }
}

TEST(PsdSweep, ZeroBudgetSliceMatchesUsd) {
    SweepSpec s = coarse(0.05);
    s.n_max = {4, kInfiniteNmax};
    s.eta = {1.0, 0.95};
    const auto usd = usd_sweep(s);
    const auto psd = psd_sweep(s);
    std::vector<SweepPoint> slice;
    for (const auto &p : psd)
        if (p.pe_max == 0.0) slice.push_back(p);
    ASSERT_EQ(slice.size(), usd.size());
    for (std::size_t i = 0; i < usd.size(); ++i) {
        EXPECT_EQ(slice[i].r, usd[i].r);
        EXPECT_NEAR(slice[i].p_s, usd[i].p_s, 1e-12);
        EXPECT_NEAR(slice[i].p_e, usd[i].p_e, 1e-12);
    }
}

TEST(PsdSweep, PointsAreConsistent) {
    const auto pts = psd_sweep(coarse());
    for (const auto &p : pts) {
        EXPECT_LE(p.p_e, p.pe_max);
        EXPECT_NEAR(p.erasure, 1 - p.p_s - p.p_e, 1e-14);
        if (p.alpha) {
            EXPECT_NEAR(*p.alpha, p.p_s / (p.p_s + p.p_e), 1e-15);
        }
        EXPECT_GE(p.deficit, -1e-14);
    }
}

TEST(Sweep, ReproducibleAcrossThreadCounts) {
    SweepSpec s = coarse(0.05);
    s.n_max = {3, 7};
    s.eta = {1.0, 0.9};
    s.threads = 1;
    const std::string one = csv_of(psd_sweep(s));
    s.threads = 4;
    const std::string four = csv_of(psd_sweep(s));
    EXPECT_EQ(one, four);
    EXPECT_EQ(one, csv_of(psd_sweep(s)));
}

TEST(Sweep, RejectsInvalidSpec) {
    SweepSpec s = coarse();
    s.n_max.clear();
    EXPECT_THROW(usd_sweep(s), std::invalid_argument);
    s = coarse();
    s.eta = {1.5};
    EXPECT_THROW(usd_sweep(s), std::invalid_argument);
    s = coarse();
    s.pe_max.clear();
    EXPECT_THROW(psd_sweep(s), std::invalid_argument);
}

TEST(Sweep, ProgressReachesTotal) {
    SweepSpec s = coarse(0.3);
    std::size_t last = 0, total = 0;
    s.progress = [&](std::size_t d, std::size_t t) {
        last = d;
        total = t;
    };
    usd_sweep(s);
    EXPECT_EQ(last, total);
    EXPECT_EQ(total, 5u);
}

TEST(Emit, CsvRoundTrip) {
    SweepSpec s = coarse(0.1);
    s.n_max = {2, kInfiniteNmax};
    const auto pts = psd_sweep(s);
    std::istringstream is(csv_of(pts));
    EXPECT_EQ(read_points_csv(is), pts);
    std::istringstream empty(csv_of({}));
    EXPECT_TRUE(read_points_csv(empty).empty());
    EXPECT_EQ(csv_of({}), std::string(kPointCsvHeader) + "\n");
    std::istringstream bad("r,p\n");
    EXPECT_THROW(read_points_csv(bad), std::invalid_argument);
}

TEST(Emit, JsonMirrorsCsv) {
    const auto pts = usd_sweep(coarse(0.3));
    const auto j = points_to_json(pts);
    ASSERT_EQ(j.size(), pts.size());
    EXPECT_EQ(j[0]["n_max"], "inf");
    EXPECT_EQ(j[0]["p_s"].get<double>(), pts[0].p_s);
    EXPECT_EQ(j[0]["pe_max"].get<double>(), 0.0);
}

TEST(Envelope, SinglePoint) {
    SweepPoint p;
    p.p_s = 0.6;
    p.p_e = 0.2;
    p.alpha = 0.7511;
    const std::vector<SweepPoint> pts{p};
    const auto env = envelope(pts);
    ASSERT_EQ(env.size(), 1u);
    EXPECT_EQ(env[0].p_s, 0.6);
    EXPECT_EQ(env[0].count, 1u);
    EXPECT_NEAR(env[0].alpha_center, 0.751, 1e-12);
    SweepPoint none;
    EXPECT_TRUE(envelope(std::vector<SweepPoint>{none}).empty());
    EXPECT_THROW(envelope(pts, 0.0), std::invalid_argument);
}

TEST(Envelope, DominatesItsBin) {
    SweepSpec s = coarse(0.02);
    s.n_max = {5};
    s.pe_max = default_pe_budgets();
    const auto pts = psd_sweep(s);
    const double w = 0.002;
    const auto env = envelope(pts, w);
    ASSERT_FALSE(env.empty());
    std::size_t counted = 0;
    for (const auto &e : env) {
        EXPECT_GE(e.alpha_center, kAlphaFloor);
        EXPECT_LE(e.alpha_center, 1.0);
        EXPECT_LE(std::abs(e.alpha - e.alpha_center), w / 2 + 1e-12);
        counted += e.count;
        for (const auto &p : pts) {
            if (p.alpha && std::abs(*p.alpha - e.alpha_center) < w / 2 - 1e-12) {
                EXPECT_GE(e.p_s, p.p_s);
            }
        }
    }
    std::size_t with_alpha = 0;
    for (const auto &p : pts) with_alpha += p.alpha.has_value();
    EXPECT_EQ(counted, with_alpha);
    EXPECT_EQ(envelope_peak(env).p_s,
              std::max_element(pts.begin(), pts.end(), [](auto &a, auto &b) { return a.p_s < b.p_s; })->p_s);
}

TEST(Scan, UniformDiagonalMatchesSweep) {
    const std::vector<double> values{0.0, 0.3, 0.6};
    const auto rep = nonuniform_scan(values, 7, 0, {}, nullptr);
    ASSERT_EQ(rep.entries.size(), 81u);
    SweepSpec s;
    s.r_grid = RGrid{0.0, 0.6, 0.3};
    s.include_singular = false;
    s.n_max = {7};
    const auto usd = usd_sweep(s);
    for (const auto &e : rep.entries) {
        if (!e.uniform()) continue;
        const auto it = std::find_if(usd.begin(), usd.end(), [&](auto &p) { return p.r == e.r[0]; });
        ASSERT_NE(it, usd.end());
        EXPECT_NEAR(e.p_s, it->p_s, 1e-12);
    }
}

TEST(Scan, PairSwapSymmetry) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 0.8);
    for (int t = 0; t < 12; ++t) {
        const std::array<double, 4> r{u(rng), u(rng), u(rng), u(rng)};
        const std::array<double, 4> swapped{r[1], r[0], r[3], r[2]};
        const double a = usd_success(classify(build_detection_table(CircuitParams::per_mode(r, 1.0, 6))));
        const double b = usd_success(classify(build_detection_table(CircuitParams::per_mode(swapped, 1.0, 6))));
        EXPECT_NEAR(a, b, 1e-12);
    }
}

TEST(Scan, ReducedGrid) {
    // three of the seven coarse-grid values
    const std::vector<double> values{0.0, 0.45, 0.6585};
    const auto rep = nonuniform_scan(values, kInfiniteNmax, 0, {}, nullptr);
    EXPECT_EQ(rep.entries.size(), 81u);
    EXPECT_EQ(rep.best_uniform.r[0], 0.6585);
    EXPECT_FALSE(rep.nonuniform_beats_uniform());
    ASSERT_TRUE(rep.best_nonuniform.has_value());
    EXPECT_LT(rep.best_nonuniform->p_s, rep.best_uniform.p_s);
}

TEST(Scan, GridLimits) {
    std::vector<double> big;
    for (int i = 0; i < 32; ++i) big.push_back(i * 0.025);
    EXPECT_THROW(nonuniform_scan(big), std::invalid_argument);
    EXPECT_THROW(nonuniform_scan(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(nonuniform_scan(std::vector<double>{1.5}), std::invalid_argument);
    std::ostringstream warn;
    std::vector<double> mid;
    for (int i = 0; i < 11; ++i) mid.push_back(i * 0.01);
    nonuniform_scan(mid, 2, 0, {}, &warn);
    EXPECT_NE(warn.str().find("14641"), std::string::npos);
}

TEST(Svg, DeterministicAndWellFormed) {
    const auto pts = usd_sweep(coarse(0.1));
    std::ostringstream a, b;
    write_svg(a, curve_plot(pts, "t <1>"));
    write_svg(b, curve_plot(pts, "t <1>"));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind("<svg", 0), 0u);
    EXPECT_NE(a.str().find("</svg>"), std::string::npos);
    EXPECT_NE(a.str().find("t &lt;1&gt;"), std::string::npos);
    EXPECT_NE(a.str().find("<polyline"), std::string::npos);
}

TEST(Figures, CoarseRecipesWriteFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "sqbsm_fig_test";
    std::filesystem::remove_all(dir);
    FigureOptions o;
    o.r_grid = RGrid{0.0, 0.9, 0.15};
    const auto f3 = run_figure("fig3", dir, o);
    EXPECT_EQ(f3.points.size(), 8u);
    for (const auto &f : f3.files) EXPECT_TRUE(std::filesystem::exists(f));
    std::ifstream csv(dir / "fig3.csv");
    const auto back = read_points_csv(csv);
    EXPECT_EQ(back, f3.points);

    const auto f10 = run_figure("fig10", dir, o);
    for (const auto &e : f10.envelope) EXPECT_GE(e.alpha, kHighConfidenceFloor);
    const auto f6 = run_figure("fig6", dir, o);
    EXPECT_TRUE(std::filesystem::exists(dir / "fig6_envelope.csv"));
    EXPECT_FALSE(f6.envelope.empty());
    EXPECT_THROW(run_figure("fig2", dir, o), std::invalid_argument);
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sqbsm
