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

#ifndef SQBSM_BSM_HPP
#define SQBSM_BSM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sqbsm/fock.hpp"
#include "sqbsm/format.hpp"
#include "sqbsm/optics.hpp"

namespace sqbsm {

inline constexpr int kDetectorModes = 4;

enum class BellLabel { kPsiPlus = 0, kPsiMinus = 1, kPhiPlus = 2, kPhiMinus = 3 };

inline constexpr std::array<BellLabel, 4> kBellLabels = {BellLabel::kPsiPlus, BellLabel::kPsiMinus,
                                                         BellLabel::kPhiPlus, BellLabel::kPhiMinus};

/// Prior probability of each Bell state at the input.
inline constexpr double kBellPrior = 0.25;

inline std::string_view label_name(BellLabel label) {
    switch (label) {
        case BellLabel::kPsiPlus: return "psi_plus";
        case BellLabel::kPsiMinus: return "psi_minus";
        case BellLabel::kPhiPlus: return "phi_plus";
        case BellLabel::kPhiMinus: return "phi_minus";
    }
    throw std::logic_error("bad BellLabel");
}

inline BellLabel parse_label(std::string_view name) {
    for (BellLabel l : kBellLabels) {
        if (label_name(l) == name) return l;
    }
    throw std::invalid_argument("unknown Bell label '" + std::string(name) + "'");
}

inline std::size_t index_of(BellLabel label) { return static_cast<std::size_t>(label); }

/// Dual-rail Bell states; modes 0,1 carry the first qubit and 2,3 the second.
inline Ket bell_state(BellLabel label) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (label) {
        case BellLabel::kPsiPlus: return from_terms(4, {{{1, 0, 0, 1}, s}, {{0, 1, 1, 0}, s}});
        case BellLabel::kPsiMinus: return from_terms(4, {{{1, 0, 0, 1}, s}, {{0, 1, 1, 0}, -s}});
        case BellLabel::kPhiPlus: return from_terms(4, {{{1, 0, 1, 0}, s}, {{0, 1, 0, 1}, s}});
        case BellLabel::kPhiMinus: return from_terms(4, {{{1, 0, 1, 0}, s}, {{0, 1, 0, 1}, -s}});
    }
    throw std::logic_error("bad BellLabel");
}

/// Mixes modes 0&2 and 1&3 on 50-50 beamsplitters.
inline Ket passive_bsm(const Ket &ket) {
    if (ket.modes() != kDetectorModes) {
        throw std::invalid_argument("passive BSM expects a 4-mode ket, got " + std::to_string(ket.modes()));
    }
    return apply_beamsplitter(apply_beamsplitter(ket, 0, 2), 1, 3);
}

/// How detector loss is evaluated when eta < 1.
enum class LossRoute {
    kExplicitModes,     ///< append four loss modes and marginalize them (8-mode kets)
    kBinomialThinning,  ///< thin the lossless count distribution binomially
};

/// Photons kept above n_max while building lossy states, so that larger
/// counts which lose photons back under the ceiling are represented.
inline constexpr int kLossyConstructionMargin = 2;

struct CircuitParams {
    std::array<SqueezeParams, 4> squeeze{};
    LossParams loss{};
    TruncationPolicy truncation{};
    LossRoute loss_route = LossRoute::kBinomialThinning;

    /// Equal intensity r and zero phase on all four squeezers.
    static CircuitParams uniform(double r, double eta = 1.0, int n_max = kInfiniteNmax) {
        CircuitParams p;
        for (auto &s : p.squeeze) s = SqueezeParams{r, 0.0};
        p.loss.eta = eta;
        p.truncation.n_max = n_max;
        p.validate();
        return p;
    }
    static CircuitParams per_mode(const std::array<double, 4> &r, double eta = 1.0, int n_max = kInfiniteNmax) {
        CircuitParams p;
        for (std::size_t i = 0; i < 4; ++i) p.squeeze[i] = SqueezeParams{r[i], 0.0};
        p.loss.eta = eta;
        p.truncation.n_max = n_max;
        p.validate();
        return p;
    }

    bool lossy() const { return loss.eta < 1.0; }
    double max_r() const {
        double r = 0.0;
        for (const auto &s : squeeze) r = std::max(r, s.r);
        return r;
    }
    bool is_uniform() const {
        return std::all_of(squeeze.begin(), squeeze.end(), [&](const SqueezeParams &s) {
            return s.r == squeeze[0].r && s.phi == squeeze[0].phi;
        });
    }

    void validate() const {
        for (const auto &s : squeeze) s.validate();
        loss.validate();
        truncation.validate();
    }
};

/// Probability-sum threshold a truncated state is expected to clear at
/// intensity r: 0.999 up to r = 0.70 and 0.995 up to r = 0.90.
inline double norm_threshold(double r) { return r <= 0.70 + 1e-12 ? 0.999 : 0.995; }

struct LabelTable {
    PatternDistribution patterns;  ///< P(pattern | label), sorted by pattern
    double deficit = 0.0;          ///< 1 - sum of P

    double sum() const {
        double s = 0.0;
        for (const auto &[pat, p] : patterns) s += p;
        return s;
    }
    double probability(Occupation pattern) const {
        auto it = std::lower_bound(patterns.begin(), patterns.end(), pattern,
                                   [](const auto &e, Occupation o) { return e.first < o; });
        return (it != patterns.end() && it->first == pattern) ? it->second : 0.0;
    }
};

/// Conditional detection statistics for each Bell input. The 1/4 prior is not
/// applied here.
struct DetectionTable {
    CircuitParams params;
    std::array<LabelTable, 4> labels;

    const LabelTable &operator[](BellLabel l) const { return labels[index_of(l)]; }
    LabelTable &operator[](BellLabel l) { return labels[index_of(l)]; }

    double probability(BellLabel l, std::initializer_list<int> pattern) const {
        return (*this)[l].probability(Occupation::from_counts(pattern));
    }
    double max_deficit() const {
        double d = 0.0;
        for (const auto &t : labels) d = std::max(d, t.deficit);
        return d;
    }
    std::size_t distinct_patterns() const {
        std::vector<Occupation> all;
        for (const auto &t : labels)
            for (const auto &[pat, p] : t.patterns) all.push_back(pat);
        std::sort(all.begin(), all.end());
        return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
    }
};

namespace detail {

inline constexpr std::array<int, 4> kDetected = {0, 1, 2, 3};

inline PatternDistribution thin_binomially(const PatternDistribution &lossless, double eta, int ceiling) {
    // per-mode kernel K[m][d] = C(m, d) eta^d (1-eta)^(m-d)
    int max_count = 0;
    for (const auto &[pat, p] : lossless)
        for (std::size_t i = 0; i < 4; ++i) max_count = std::max(max_count, pat[i]);
    std::vector<std::vector<double>> kernel(static_cast<std::size_t>(max_count) + 1);
    for (int m = 0; m <= max_count; ++m) {
        auto &row = kernel[static_cast<std::size_t>(m)];
        row.resize(static_cast<std::size_t>(m) + 1);
        for (int d = 0; d <= m; ++d) {
            row[static_cast<std::size_t>(d)] = binomial(m, d) * std::pow(eta, d) * std::pow(1.0 - eta, m - d);
        }
    }
    std::unordered_map<Occupation, double, OccupationHash> acc;
    for (const auto &[pat, p] : lossless) {
        const int m0 = pat[0], m1 = pat[1], m2 = pat[2], m3 = pat[3];
        const auto &k0 = kernel[static_cast<std::size_t>(m0)];
        const auto &k1 = kernel[static_cast<std::size_t>(m1)];
        const auto &k2 = kernel[static_cast<std::size_t>(m2)];
        const auto &k3 = kernel[static_cast<std::size_t>(m3)];
        for (int d0 = 0; d0 <= std::min(m0, ceiling); ++d0) {
            const double w0 = p * k0[static_cast<std::size_t>(d0)];
            for (int d1 = 0; d1 <= std::min(m1, ceiling); ++d1) {
                const double w1 = w0 * k1[static_cast<std::size_t>(d1)];
                for (int d2 = 0; d2 <= std::min(m2, ceiling); ++d2) {
                    const double w2 = w1 * k2[static_cast<std::size_t>(d2)];
                    for (int d3 = 0; d3 <= std::min(m3, ceiling); ++d3) {
                        const double w = w2 * k3[static_cast<std::size_t>(d3)];
                        if (w == 0.0) continue;
                        acc[Occupation::from_counts({d0, d1, d2, d3})] += w;
                    }
                }
            }
        }
    }
    PatternDistribution out(acc.begin(), acc.end());
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    return out;
}

}  // namespace detail

/// Output state of the squeezed circuit before any loss, built with the
/// construction ceiling implied by `params`.
inline Ket squeezed_output(BellLabel label, const CircuitParams &params) {
    TruncationPolicy policy = params.truncation;
    if (params.lossy()) policy.construction_margin = kLossyConstructionMargin;
    Ket ket = passive_bsm(bell_state(label));
    for (int m = 0; m < kDetectorModes; ++m) {
        ket = apply_squeeze(ket, m, params.squeeze[static_cast<std::size_t>(m)], policy);
    }
    return ket;
}

inline LabelTable build_label_table(BellLabel label, const CircuitParams &params) {
    const int ceiling = params.truncation.resolved_n_max();
    Ket ket = squeezed_output(label, params);
    LabelTable out;
    if (params.lossy() && params.loss_route == LossRoute::kBinomialThinning) {
        out.patterns = detail::thin_binomially(pattern_probabilities(ket, detail::kDetected), params.loss.eta, ceiling);
    } else {
        if (params.lossy()) {
            for (int m = 0; m < kDetectorModes; ++m) ket = apply_loss(ket, m, params.loss);
        }
        ket = truncate(ket, ceiling, detail::kDetected);
        out.patterns = pattern_probabilities(ket, detail::kDetected);
    }
    out.deficit = 1.0 - out.sum();
    return out;
}

inline DetectionTable build_detection_table(const CircuitParams &params) {
    params.validate();
    DetectionTable table;
    table.params = params;
    for (BellLabel l : kBellLabels) table[l] = build_label_table(l, params);
    return table;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string n_max_text(int n_max) { return n_max == kInfiniteNmax ? "inf" : std::to_string(n_max); }

inline int parse_n_max(std::string_view s) {
    if (s == "inf" || s == "infinity") return kInfiniteNmax;
    int v = parse_int(s);
    if (v < 0) throw std::invalid_argument("n_max must be non-negative");
    return v;
}

inline nlohmann::json params_to_json(const CircuitParams &p) {
    nlohmann::json r = nlohmann::json::array(), phi = nlohmann::json::array();
    for (const auto &s : p.squeeze) {
        r.push_back(s.r);
        phi.push_back(s.phi);
    }
    return {{"r", r},
            {"phi", phi},
            {"eta", p.loss.eta},
            {"n_max", n_max_text(p.truncation.n_max)},
            {"kmax_rule", p.truncation.rule == KmaxRule::kFixed ? "fixed" : "detector-matched"},
            {"fixed_kmax", p.truncation.fixed_kmax},
            {"loss_route", p.loss_route == LossRoute::kExplicitModes ? "explicit" : "thinning"}};
}

inline CircuitParams params_from_json(const nlohmann::json &j) {
    CircuitParams p;
    auto r = j.at("r").get<std::vector<double>>();
    auto phi = j.at("phi").get<std::vector<double>>();
    if (r.size() != 4 || phi.size() != 4) throw std::invalid_argument("expected four squeezers");
    for (std::size_t i = 0; i < 4; ++i) p.squeeze[i] = SqueezeParams{r[i], phi[i]};
    p.loss.eta = j.at("eta").get<double>();
    p.truncation.n_max = parse_n_max(j.at("n_max").get<std::string>());
    if (j.value("kmax_rule", std::string("detector-matched")) == "fixed") {
        p.truncation.rule = KmaxRule::kFixed;
        p.truncation.fixed_kmax = j.value("fixed_kmax", 0);
    }
    p.loss_route = j.value("loss_route", std::string("thinning")) == "explicit" ? LossRoute::kExplicitModes
                                                                                : LossRoute::kBinomialThinning;
    return p;
}

/// JSON dump; per-label sums are reported next to the truncation threshold.
inline nlohmann::json table_to_json(const DetectionTable &t) {
    const double threshold = norm_threshold(t.params.max_r());
    nlohmann::json labels = nlohmann::json::array();
    for (BellLabel l : kBellLabels) {
        const LabelTable &lt = t[l];
        nlohmann::json pats = nlohmann::json::array();
        for (const auto &[pat, p] : lt.patterns) pats.push_back({{"n", pat.counts(4)}, {"p", p}});
        const double sum = lt.sum();
        labels.push_back({{"label", label_name(l)},
                          {"sum", sum},
                          {"deficit", lt.deficit},
                          {"meets_threshold", sum >= threshold},
                          {"patterns", std::move(pats)}});
    }
    return {{"params", params_to_json(t.params)}, {"threshold", threshold}, {"labels", std::move(labels)}};
}

inline DetectionTable table_from_json(const nlohmann::json &j) {
    DetectionTable t;
    t.params = params_from_json(j.at("params"));
    for (const auto &lj : j.at("labels")) {
        LabelTable &lt = t[parse_label(lj.at("label").get<std::string>())];
        for (const auto &pj : lj.at("patterns")) {
            lt.patterns.emplace_back(Occupation::from_counts(pj.at("n").get<std::vector<int>>()),
                                     pj.at("p").get<double>());
        }
        std::sort(lt.patterns.begin(), lt.patterns.end(),
                  [](const auto &a, const auto &b) { return a.first < b.first; });
        lt.deficit = lj.at("deficit").get<double>();
    }
    return t;
}

/// CSV dump: "# key=value" parameter lines, then `label,n1,n2,n3,n4,p`.
inline void write_table_csv(std::ostream &os, const DetectionTable &t) {
    const auto pj = params_to_json(t.params);
    os << "# params=" << pj.dump() << '\n';
    for (BellLabel l : kBellLabels) {
        os << "# deficit." << label_name(l) << '=' << format_double(t[l].deficit) << '\n';
    }
    os << "label,n1,n2,n3,n4,p\n";
    for (BellLabel l : kBellLabels) {
        for (const auto &[pat, p] : t[l].patterns) {
            os << label_name(l) << ',' << pat[0] << ',' << pat[1] << ',' << pat[2] << ',' << pat[3] << ','
               << format_double(p) << '\n';
        }
    }
}

inline DetectionTable read_table_csv(std::istream &is) {
    DetectionTable t;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("# params=", 0) == 0) {
            t.params = params_from_json(nlohmann::json::parse(line.substr(9)));
            continue;
        }
        if (line.rfind("# deficit.", 0) == 0) {
            auto eq = line.find('=');
            t[parse_label(line.substr(10, eq - 10))].deficit = parse_double(line.substr(eq + 1));
            continue;
        }
        if (line[0] == '#') continue;
        if (!header_seen) {
            if (line != "label,n1,n2,n3,n4,p") throw std::invalid_argument("unexpected table CSV header: " + line);
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 6) throw std::invalid_argument("malformed table CSV row: " + line);
        t[parse_label(f[0])].patterns.emplace_back(
            Occupation::from_counts({parse_int(f[1]), parse_int(f[2]), parse_int(f[3]), parse_int(f[4])}),
            parse_double(f[5]));
    }
    for (auto &lt : t.labels) {
        std::sort(lt.patterns.begin(), lt.patterns.end(),
                  [](const auto &a, const auto &b) { return a.first < b.first; });
    }
    return t;
}

}  // namespace sqbsm

#endif  // SQBSM_BSM_HPP
