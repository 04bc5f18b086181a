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

#ifndef SQBSM_FOCK_HPP
#define SQBSM_FOCK_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sqbsm {

using Amplitude = std::complex<double>;

/// Amplitudes with magnitude below this are dropped after every operation.
inline constexpr double kPruneThreshold = 1e-15;

/// Photon counts for up to eight modes, packed one byte per mode.
///
/// Mode 0 occupies the most significant byte, so comparing packed words
/// orders two occupations of equal mode count lexicographically.
class Occupation {
  public:
    static constexpr std::size_t kMaxModes = 8;
    static constexpr int kMaxCount = 255;

    constexpr Occupation() = default;

    static Occupation from_counts(std::span<const int> counts) {
        if (counts.size() > kMaxModes) {
            throw std::invalid_argument("occupation supports at most 8 modes");
        }
        Occupation occ;
        for (std::size_t m = 0; m < counts.size(); ++m) {
            if (counts[m] < 0 || counts[m] > kMaxCount) {
                throw std::invalid_argument("photon count out of range: " + std::to_string(counts[m]));
            }
            occ = occ.with(m, counts[m]);
        }
        return occ;
    }
    static Occupation from_counts(std::initializer_list<int> counts) {
        return from_counts(std::span<const int>(counts.begin(), counts.size()));
    }
    static constexpr Occupation from_packed(std::uint64_t bits) {
        Occupation occ;
        occ.bits_ = bits;
        return occ;
    }

    constexpr int operator[](std::size_t mode) const {
        return static_cast<int>((bits_ >> shift(mode)) & 0xFFu);
    }
    [[nodiscard]] constexpr Occupation with(std::size_t mode, int count) const {
        Occupation occ = *this;
        occ.bits_ &= ~(std::uint64_t{0xFF} << shift(mode));
        occ.bits_ |= std::uint64_t(count & 0xFF) << shift(mode);
        return occ;
    }
    constexpr std::uint64_t packed() const { return bits_; }

    constexpr int total(std::size_t modes) const {
        int n = 0;
        for (std::size_t m = 0; m < modes; ++m) {
            n += (*this)[m];
        }
        return n;
    }
    std::vector<int> counts(std::size_t modes) const {
        std::vector<int> out(modes);
        for (std::size_t m = 0; m < modes; ++m) {
            out[m] = (*this)[m];
        }
        return out;
    }
    std::string str(std::size_t modes) const {
        std::string s = "(";
        for (std::size_t m = 0; m < modes; ++m) {
            if (m) s += ',';
            s += std::to_string((*this)[m]);
        }
        return s + ")";
    }

    friend constexpr auto operator<=>(Occupation, Occupation) = default;

  private:
    static constexpr unsigned shift(std::size_t mode) { return static_cast<unsigned>(8 * (kMaxModes - 1 - mode)); }
    std::uint64_t bits_ = 0;
};

struct OccupationHash {
    std::size_t operator()(Occupation occ) const noexcept {
        // splitmix64 finalizer
        std::uint64_t z = occ.packed() + 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return static_cast<std::size_t>(z ^ (z >> 31));
    }
};

/// Sparse state over a fixed number of modes in the orthonormal number basis.
///
/// Terms are held sorted by occupation and never contain amplitudes below
/// kPruneThreshold. A Ket is immutable once built; use KetBuilder to make one.
class Ket {
  public:
    using Term = std::pair<Occupation, Amplitude>;

    Ket() = default;

    int modes() const { return modes_; }
    std::span<const Term> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    Amplitude amplitude(Occupation occ) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), occ,
                                   [](const Term &t, Occupation o) { return t.first < o; });
        if (it == terms_.end() || it->first != occ) {
            return {};
        }
        return it->second;
    }
    Amplitude amplitude(std::initializer_list<int> counts) const {
        return amplitude(Occupation::from_counts(counts));
    }

  private:
    friend class KetBuilder;
    int modes_ = 0;
    std::vector<Term> terms_;
};

/// Accumulates (occupation, amplitude) contributions, summing duplicates.
///
/// Contributions to one key are summed in insertion order, so a builder fed in
/// a fixed order yields bit-identical kets.
class KetBuilder {
  public:
    explicit KetBuilder(int modes, std::size_t reserve = 0) : modes_(modes) {
        if (modes < 1 || static_cast<std::size_t>(modes) > Occupation::kMaxModes) {
            throw std::invalid_argument("mode count must be in [1, 8], got " + std::to_string(modes));
        }
        if (reserve) acc_.reserve(reserve);
    }

    void add(Occupation occ, Amplitude amp) { acc_[occ] += amp; }

    Ket build() && {
        Ket ket;
        ket.modes_ = modes_;
        ket.terms_.reserve(acc_.size());
        for (const auto &[occ, amp] : acc_) {
            if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) {
                throw std::domain_error("non-finite amplitude at " + occ.str(static_cast<std::size_t>(modes_)));
            }
            if (std::abs(amp) >= kPruneThreshold) {
                ket.terms_.emplace_back(occ, amp);
            }
        }
        std::sort(ket.terms_.begin(), ket.terms_.end(),
                  [](const Ket::Term &a, const Ket::Term &b) { return a.first < b.first; });
        acc_.clear();
        return ket;
    }

  private:
    int modes_;
    std::unordered_map<Occupation, Amplitude, OccupationHash> acc_;
};

inline Ket vacuum(int modes) {
    if (modes < 1) {
        throw std::invalid_argument("vacuum needs at least one mode");
    }
    KetBuilder b(modes);
    b.add(Occupation{}, 1.0);
    return std::move(b).build();
}

/// Builds a ket from explicit terms; repeated occupations are summed.
inline Ket from_terms(int modes, std::span<const std::pair<std::vector<int>, Amplitude>> terms) {
    KetBuilder b(modes, terms.size());
    for (const auto &[counts, amp] : terms) {
        if (counts.size() != static_cast<std::size_t>(modes)) {
            throw std::invalid_argument("occupation has " + std::to_string(counts.size()) + " modes, ket has " +
                                        std::to_string(modes));
        }
        b.add(Occupation::from_counts(counts), amp);
    }
    return std::move(b).build();
}
inline Ket from_terms(int modes, std::initializer_list<std::pair<std::vector<int>, Amplitude>> terms) {
    return from_terms(modes, std::span<const std::pair<std::vector<int>, Amplitude>>(terms.begin(), terms.size()));
}

inline double norm_sq(const Ket &ket) {
    double s = 0.0;
    for (const auto &[occ, amp] : ket.terms()) {
        s += std::norm(amp);
    }
    return s;
}

inline Amplitude inner(const Ket &bra, const Ket &ket) {
    Amplitude s{};
    for (const auto &[occ, amp] : ket.terms()) {
        s += std::conj(bra.amplitude(occ)) * amp;
    }
    return s;
}

/// Detection probabilities over a subset of modes.
///
/// Keys hold the detected counts re-packed into positions 0..k-1 in the order
/// of `detected`; undetected modes are summed out. Sorted by key.
using PatternDistribution = std::vector<std::pair<Occupation, double>>;

inline Occupation restrict_to(Occupation occ, std::span<const int> detected) {
    Occupation out;
    for (std::size_t i = 0; i < detected.size(); ++i) {
        out = out.with(i, occ[static_cast<std::size_t>(detected[i])]);
    }
    return out;
}

inline void check_detected(const Ket &ket, std::span<const int> detected) {
    if (detected.empty()) {
        throw std::invalid_argument("detected mode set is empty");
    }
    for (int m : detected) {
        if (m < 0 || m >= ket.modes()) {
            throw std::out_of_range("detected mode " + std::to_string(m) + " outside ket of " +
                                    std::to_string(ket.modes()) + " modes");
        }
    }
}

inline PatternDistribution pattern_probabilities(const Ket &ket, std::span<const int> detected) {
    check_detected(ket, detected);
    std::unordered_map<Occupation, double, OccupationHash> acc;
    for (const auto &[occ, amp] : ket.terms()) {
        acc[restrict_to(occ, detected)] += std::norm(amp);
    }
    PatternDistribution out(acc.begin(), acc.end());
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    return out;
}
inline PatternDistribution pattern_probabilities(const Ket &ket, std::initializer_list<int> detected) {
    return pattern_probabilities(ket, std::span<const int>(detected.begin(), detected.size()));
}

/// Sentinel for an unbounded detector ceiling.
inline constexpr int kUnboundedCeiling = std::numeric_limits<int>::max();

/// Drops every term with more than `ceiling` photons in any detected mode.
inline Ket truncate(const Ket &ket, int ceiling, std::span<const int> detected) {
    if (ceiling < 0) {
        throw std::invalid_argument("truncation ceiling must be non-negative");
    }
    check_detected(ket, detected);
    KetBuilder b(ket.modes(), ket.size());
    for (const auto &[occ, amp] : ket.terms()) {
        bool keep = std::all_of(detected.begin(), detected.end(),
                                [&](int m) { return occ[static_cast<std::size_t>(m)] <= ceiling; });
        if (keep) b.add(occ, amp);
    }
    return std::move(b).build();
}
inline Ket truncate(const Ket &ket, int ceiling, std::initializer_list<int> detected) {
    return truncate(ket, ceiling, std::span<const int>(detected.begin(), detected.size()));
}

// JSON form: {"modes": M, "terms": [{"n": [...], "re": x, "im": y}, ...]},
// terms in lexicographic occupation order.
inline nlohmann::json to_json(const Ket &ket) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[occ, amp] : ket.terms()) {
        terms.push_back({{"n", occ.counts(static_cast<std::size_t>(ket.modes()))},
                         {"re", amp.real()},
                         {"im", amp.imag()}});
    }
    return {{"modes", ket.modes()}, {"terms", std::move(terms)}};
}

inline Ket ket_from_json(const nlohmann::json &j) {
    const int modes = j.at("modes").get<int>();
    std::vector<std::pair<std::vector<int>, Amplitude>> terms;
    for (const auto &t : j.at("terms")) {
        terms.emplace_back(t.at("n").get<std::vector<int>>(),
                           Amplitude(t.at("re").get<double>(), t.at("im").get<double>()));
    }
    return from_terms(modes, terms);
}

}  // namespace sqbsm

#endif  // SQBSM_FOCK_HPP
