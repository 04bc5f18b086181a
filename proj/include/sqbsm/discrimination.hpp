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

#ifndef SQBSM_DISCRIMINATION_HPP
#define SQBSM_DISCRIMINATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqbsm/bsm.hpp"

namespace sqbsm {

/// Weighted probabilities at or below this count as zero, and two weighted
/// probabilities closer than this count as equal.
inline constexpr double kZeroTolerance = 1e-10;

enum class PatternKind { kUnique, kDuplicate, kExcluded };

inline std::string_view kind_name(PatternKind k) {
    switch (k) {
        case PatternKind::kUnique: return "unique";
        case PatternKind::kDuplicate: return "duplicate";
        case PatternKind::kExcluded: return "excluded";
    }
    return "?";
}

/// One detection pattern with its prior-weighted probabilities q = P(pattern|label)/4.
///
/// gain_success is the largest q; gain_error is the remaining mass, or zero
/// for unique patterns.
struct PatternClass {
    Occupation pattern;
    std::array<double, 4> weighted{};
    PatternKind kind = PatternKind::kExcluded;
    BellLabel guess = BellLabel::kPsiPlus;
    double gain_success = 0.0;
    double gain_error = 0.0;

    double total() const { return weighted[0] + weighted[1] + weighted[2] + weighted[3]; }
};

inline PatternClass classify_pattern(Occupation pattern, const std::array<double, 4> &weighted, double tau) {
    PatternClass pc;
    pc.pattern = pattern;
    pc.weighted = weighted;
    int nonzero = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        // strict '>' keeps the first label on ties (declaration order)
        if (weighted[i] > weighted[best]) best = i;
        if (weighted[i] > tau) {
            ++nonzero;
            lo = std::min(lo, weighted[i]);
            hi = std::max(hi, weighted[i]);
        }
    }
    pc.guess = kBellLabels[best];
    pc.gain_success = weighted[best];
    if (nonzero == 1) {
        pc.kind = PatternKind::kUnique;
        pc.gain_error = 0.0;
    } else {
        // nonzero == 0 lands here too: nothing to tell apart
        pc.kind = (nonzero == 0 || hi - lo <= tau) ? PatternKind::kExcluded : PatternKind::kDuplicate;
        pc.gain_error = pc.total() - pc.gain_success;
    }
    return pc;
}

/// Classifies every pattern of the table, in lexicographic pattern order.
inline std::vector<PatternClass> classify(const DetectionTable &table, double tau = kZeroTolerance) {
    // k-way merge of the four sorted per-label lists
    std::array<std::size_t, 4> pos{};
    std::vector<PatternClass> out;
    while (true) {
        std::optional<Occupation> next;
        for (std::size_t i = 0; i < 4; ++i) {
            const auto &pats = table.labels[i].patterns;
            if (pos[i] < pats.size() && (!next || pats[pos[i]].first < *next)) next = pats[pos[i]].first;
        }
        if (!next) break;
        std::array<double, 4> q{};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto &pats = table.labels[i].patterns;
            if (pos[i] < pats.size() && pats[pos[i]].first == *next) {
                q[i] = kBellPrior * pats[pos[i]].second;
                ++pos[i];
            }
        }
        out.push_back(classify_pattern(*next, q, tau));
    }
    return out;
}

/// Success probability when only unique patterns are acted on.
inline double usd_success(std::span<const PatternClass> classes) {
    double ps = 0.0;
    for (const auto &c : classes) {
        if (c.kind == PatternKind::kUnique) ps += c.gain_success;
    }
    return ps;
}

/// p_s / (p_s + p_e), absent when nothing is ever declared.
inline std::optional<double> confidence(double ps, double pe) {
    const double declared = ps + pe;
    if (!(declared > 0.0)) return std::nullopt;
    return ps / declared;
}

struct ErrorBudget {
    double pe_max = 0.0;

    void validate() const {
        if (!(pe_max >= 0.0)) throw std::invalid_argument("error budget must be >= 0");
    }
};

struct PsdOptions {
    /// Also admit patterns whose labels are exactly tied.
    bool allow_coinflip = false;
};

struct SelectedPattern {
    Occupation pattern;
    BellLabel guess = BellLabel::kPsiPlus;
    double gain_success = 0.0;
    double gain_error = 0.0;
};

struct DiscriminationResult {
    double p_s = 0.0;
    double p_e = 0.0;
    std::optional<double> alpha;
    double erasure = 1.0;  ///< 1 - (p_s + p_e); includes saturated and truncated events
    double usd_p_s = 0.0;
    std::vector<SelectedPattern> selected;
};

namespace detail {

inline bool admissible(const PatternClass &c, const PsdOptions &opts) {
    if (c.kind == PatternKind::kDuplicate) return true;
    return opts.allow_coinflip && c.kind == PatternKind::kExcluded && c.gain_error > 0.0;
}

/// Ratio-descending order; ties by larger success gain, then pattern.
inline bool ratio_before(const PatternClass &a, const PatternClass &b) {
    // a.s/a.e > b.s/b.e  <=>  a.s*b.e > b.s*a.e  (all gains are positive)
    const double lhs = a.gain_success * b.gain_error;
    const double rhs = b.gain_success * a.gain_error;
    if (lhs != rhs) return lhs > rhs;
    if (a.gain_success != b.gain_success) return a.gain_success > b.gain_success;
    return a.pattern < b.pattern;
}

inline DiscriminationResult finish(double usd, std::vector<SelectedPattern> selected) {
    DiscriminationResult res;
    res.usd_p_s = usd;
    res.p_s = usd;
    for (const auto &s : selected) {
        res.p_s += s.gain_success;
        res.p_e += s.gain_error;
    }
    res.alpha = confidence(res.p_s, res.p_e);
    res.erasure = 1.0 - (res.p_s + res.p_e);
    res.selected = std::move(selected);
    return res;
}

inline SelectedPattern to_selected(const PatternClass &c) {
    return {c.pattern, c.guess, c.gain_success, c.gain_error};
}

}  // namespace detail

/// Greedy error-budgeted admission of duplicate patterns.
///
/// Candidates are ranked once by gain ratio; select() then walks the ranking
/// for a given budget, admitting a pattern iff the running error stays within
/// it. One selector serves any number of budgets for the same table.
class PsdSelector {
  public:
    explicit PsdSelector(std::span<const PatternClass> classes, PsdOptions opts = {}) {
        usd_ = usd_success(classes);
        for (const auto &c : classes) {
            if (detail::admissible(c, opts)) ranked_.push_back(c);
        }
        std::sort(ranked_.begin(), ranked_.end(), detail::ratio_before);
    }

    DiscriminationResult select(ErrorBudget budget) const {
        budget.validate();
        std::vector<SelectedPattern> chosen;
        double pe = 0.0;
        for (const auto &c : ranked_) {
            if (pe + c.gain_error <= budget.pe_max) {
                pe += c.gain_error;
                chosen.push_back(detail::to_selected(c));
            }
        }
        return detail::finish(usd_, std::move(chosen));
    }

    std::span<const PatternClass> candidates() const { return ranked_; }
    double usd() const { return usd_; }

  private:
    double usd_ = 0.0;
    std::vector<PatternClass> ranked_;
};

inline DiscriminationResult psd_select(std::span<const PatternClass> classes, ErrorBudget budget,
                                       PsdOptions opts = {}) {
    return PsdSelector(classes, opts).select(budget);
}

/// Largest candidate set the exact oracle accepts.
inline constexpr std::size_t kOracleMaxCandidates = 64;

/// Search nodes after which an instance counts as too large.
inline constexpr std::uint64_t kOracleNodeLimit = 20'000'000ull;

/// Exact maximum-p_s subset of the admissible duplicates under the budget,
/// by depth-first search with a fractional-relaxation bound.
///
/// Patterns with identical gains are interchangeable, so they are searched as
/// one group with a take-count instead of one branch per pattern. A subset is
/// feasible when its error sum is within the budget up to a relative 1e-12,
/// so summation order never makes the oracle lose to the greedy on a
/// boundary case.
///
/// Throws std::length_error when the instance is too large, either by
/// candidate count or by search effort.
inline DiscriminationResult psd_oracle(std::span<const PatternClass> classes, ErrorBudget budget,
                                       PsdOptions opts = {}) {
    budget.validate();
    PsdSelector ranking(classes, opts);
    const auto items = ranking.candidates();
    if (items.size() > kOracleMaxCandidates) {
        throw std::length_error("oracle instance has " + std::to_string(items.size()) + " candidates, limit is " +
                                std::to_string(kOracleMaxCandidates));
    }
    const double cap = budget.pe_max * (1.0 + 1e-12);

    struct Group {
        std::size_t first;  ///< index into items
        int size;
        double s, e;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!groups.empty() && items[i].gain_success == groups.back().s && items[i].gain_error == groups.back().e) {
            ++groups.back().size;
        } else {
            groups.push_back({i, 1, items[i].gain_success, items[i].gain_error});
        }
    }
    const std::size_t n = groups.size();

    // Fractional relaxation over groups[g..]; groups are ratio-sorted.
    auto bound = [&](std::size_t g, double room) {
        double gain = 0.0;
        for (; g < n; ++g) {
            const double e = groups[g].e * groups[g].size;
            if (e <= room) {
                room -= e;
                gain += groups[g].s * groups[g].size;
            } else {
                gain += groups[g].s * (room / groups[g].e);
                break;
            }
        }
        return gain;
    };

    std::vector<int> take(n, 0), best_take(n, 0);
    double best = -1.0;
    std::uint64_t nodes = 0;

    auto dfs = [&](auto &&self, std::size_t g, double gain, double err) -> void {
        if (++nodes > kOracleNodeLimit) throw std::length_error("oracle search exceeded node limit");
        if (gain > best) {
            best = gain;
            best_take = take;
            std::fill(best_take.begin() + static_cast<std::ptrdiff_t>(g), best_take.end(), 0);
        }
        if (g == n) return;
        if (gain + bound(g, cap - err) <= best) return;
        int most = groups[g].size;
        while (most > 0 && err + groups[g].e * most > cap) --most;
        for (int c = most; c >= 0; --c) {
            take[g] = c;
            self(self, g + 1, gain + groups[g].s * c, err + groups[g].e * c);
        }
        take[g] = 0;
    };
    dfs(dfs, 0, 0.0, 0.0);

    std::vector<SelectedPattern> chosen;
    for (std::size_t g = 0; g < n; ++g) {
        for (int c = 0; c < best_take[g]; ++c) chosen.push_back(detail::to_selected(items[groups[g].first + c]));
    }
    return detail::finish(ranking.usd(), std::move(chosen));
}

inline nlohmann::json result_to_json(const DiscriminationResult &r) {
    nlohmann::json sel = nlohmann::json::array();
    for (const auto &s : r.selected) {
        sel.push_back({{"n", s.pattern.counts(4)},
                       {"guess", label_name(s.guess)},
                       {"dp_s", s.gain_success},
                       {"dp_e", s.gain_error}});
    }
    return {{"p_s", r.p_s},
            {"p_e", r.p_e},
            {"alpha", r.alpha ? nlohmann::json(*r.alpha) : nlohmann::json(nullptr)},
            {"erasure", r.erasure},
            {"usd_p_s", r.usd_p_s},
            {"selected", std::move(sel)}};
}

}  // namespace sqbsm

#endif  // SQBSM_DISCRIMINATION_HPP
