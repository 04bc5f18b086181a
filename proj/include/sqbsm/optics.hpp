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

#ifndef SQBSM_OPTICS_HPP
#define SQBSM_OPTICS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqbsm/fock.hpp"

namespace sqbsm {

namespace detail {

inline constexpr int kFactorialTableSize = 171;

inline const std::array<double, kFactorialTableSize> &factorials() {
    static const auto table = [] {
        std::array<double, kFactorialTableSize> f{};
        f[0] = 1.0;
        for (int i = 1; i < kFactorialTableSize; ++i) f[i] = f[i - 1] * i;
        return f;
    }();
    return table;
}

inline double factorial(int n) {
    if (n < 0 || n >= kFactorialTableSize) {
        throw std::out_of_range("factorial argument out of range: " + std::to_string(n));
    }
    return factorials()[static_cast<std::size_t>(n)];
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

/// i^e for integer e.
inline Amplitude ipow(int e) {
    switch (((e % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

template <typename T>
T ipow_n(T base, int n) {
    T out(1);
    for (int i = 0; i < n; ++i) out *= base;
    return out;
}

inline void check_mode(const Ket &ket, int mode) {
    if (mode < 0 || mode >= ket.modes()) {
        throw std::out_of_range("mode " + std::to_string(mode) + " outside ket of " + std::to_string(ket.modes()) +
                                " modes");
    }
}

}  // namespace detail

/// Largest squeezing intensity the truncation thresholds are quoted for.
inline constexpr double kMaxValidatedR = 0.9;

struct SqueezeParams {
    double r = 0.0;    ///< intensity, >= 0
    double phi = 0.0;  ///< phase in radians

    /// Degree of squeezing, (1/2) e^{i phi} tanh r.
    Amplitude xi() const { return 0.5 * std::polar(1.0, phi) * std::tanh(r); }
    /// Squeezing in decibels, -10 log10(e^{-2r}).
    double db() const { return -10.0 * std::log10(std::exp(-2.0 * r)); }

    void validate() const {
        if (!std::isfinite(r) || !std::isfinite(phi)) {
            throw std::invalid_argument("squeezing parameters must be finite");
        }
        if (r < 0.0 || r > kMaxValidatedR + 1e-12) {
            throw std::invalid_argument("squeezing intensity r=" + std::to_string(r) + " outside [0, 0.9]");
        }
    }
};

/// The squeezing intensity at which cosh(2r) = 2.
inline double singular_r() { return 0.5 * std::acosh(2.0); }

/// Ceiling that stands in for unlimited photon-number resolution.
inline constexpr int kInfiniteStandIn = 13;
inline constexpr int kInfiniteNmax = std::numeric_limits<int>::max();

enum class KmaxRule {
    kDetectorMatched,  ///< keep exactly the outputs at or below the construction ceiling
    kFixed,            ///< keep k = 0..fixed_kmax in every inner sum
};

struct TruncationPolicy {
    int n_max = kInfiniteNmax;  ///< detector ceiling, or kInfiniteNmax
    KmaxRule rule = KmaxRule::kDetectorMatched;
    int fixed_kmax = 0;
    int construction_margin = 0;  ///< extra photons kept while building lossy states

    bool infinite() const { return n_max == kInfiniteNmax; }
    int resolved_n_max() const { return infinite() ? kInfiniteStandIn : n_max; }
    int construction_ceiling() const { return resolved_n_max() + construction_margin; }

    /// Upper limit of the inner sum for input |n> and outer index j.
    int kmax(int n, int j) const {
        if (rule == KmaxRule::kFixed) return fixed_kmax;
        int room = construction_ceiling() - n + 2 * j;
        return room < 0 ? 0 : room / 2;
    }

    void validate() const {
        if (!infinite() && n_max < 0) throw std::invalid_argument("n_max must be non-negative");
        if (rule == KmaxRule::kFixed && fixed_kmax < 0) throw std::invalid_argument("fixed k_max must be >= 0");
        if (construction_margin < 0) throw std::invalid_argument("construction margin must be >= 0");
    }
};

struct LossParams {
    double eta = 1.0;  ///< transmission

    void validate() const {
        if (!(eta >= 0.0 && eta <= 1.0)) {
            throw std::invalid_argument("detector transmission eta=" + std::to_string(eta) + " outside [0, 1]");
        }
    }
};

/// 50-50 beamsplitter on modes j and k:
///   a_j^+ -> (i a_j^+ + a_k^+)/sqrt2,  a_k^+ -> (a_j^+ + i a_k^+)/sqrt2.
inline Ket apply_beamsplitter(const Ket &ket, int j, int k) {
    detail::check_mode(ket, j);
    detail::check_mode(ket, k);
    if (j == k) {
        throw std::invalid_argument("beamsplitter needs two distinct modes");
    }
    const auto uj = static_cast<std::size_t>(j);
    const auto uk = static_cast<std::size_t>(k);
    KetBuilder out(ket.modes(), ket.size() * 4);
    for (const auto &[occ, amp] : ket.terms()) {
        const int nj = occ[uj];
        const int nk = occ[uk];
        const int total = nj + nk;
        const double norm_in = std::sqrt(detail::factorial(nj) * detail::factorial(nk));
        const double scale = std::pow(0.5, 0.5 * total) / norm_in;
        for (int p = 0; p <= nj; ++p) {
            for (int q = 0; q <= nk; ++q) {
                const int mj = p + q;
                const int mk = total - mj;
                const double mag = detail::binomial(nj, p) * detail::binomial(nk, q) * scale *
                                   std::sqrt(detail::factorial(mj) * detail::factorial(mk));
                out.add(occ.with(uj, mj).with(uk, mk), amp * detail::ipow(p + nk - q) * mag);
            }
        }
    }
    return std::move(out).build();
}

/// Closed-form <m|S(xi)|n> for all m retained by `policy`, keyed by m.
///
///   S|n> = sech(r)^{n+1/2} sqrt(n!) sum_j (-xi*)^j cosh(r)^{2j} / ((n-2j)! j!)
///                                  sum_k xi^k sqrt((n-2j+2k)!) / k!  |n-2j+2k>
inline std::map<int, Amplitude> squeeze_column(int n, const SqueezeParams &sq, const TruncationPolicy &policy) {
    const Amplitude xi = sq.xi();
    const Amplitude neg_xi_conj = -std::conj(xi);
    const double sech = 1.0 / std::cosh(sq.r);
    std::map<int, Amplitude> column;
    for (int j = 0; 2 * j <= n; ++j) {
        // sech^{n+1/2} cosh^{2j} = sech^{n-2j+1/2}
        const Amplitude outer = std::pow(sech, n - 2 * j + 0.5) * std::sqrt(detail::factorial(n)) *
                                detail::ipow_n(neg_xi_conj, j) /
                                (detail::factorial(n - 2 * j) * detail::factorial(j));
        const int kmax = policy.kmax(n, j);
        Amplitude xi_k = 1.0;
        for (int k = 0; k <= kmax; ++k) {
            const int m = n - 2 * j + 2 * k;
            if (m > Occupation::kMaxCount) break;
            column[m] += outer * xi_k * std::sqrt(detail::factorial(m)) / detail::factorial(k);
            xi_k *= xi;
        }
    }
    return column;
}

/// Single-mode squeezer on `mode`, truncated according to `policy`.
inline Ket apply_squeeze(const Ket &ket, int mode, const SqueezeParams &sq, const TruncationPolicy &policy) {
    detail::check_mode(ket, mode);
    policy.validate();
    if (!std::isfinite(sq.r) || sq.r < 0.0) {
        throw std::invalid_argument("squeezing intensity must be finite and non-negative");
    }
    const auto um = static_cast<std::size_t>(mode);
    std::map<int, std::vector<std::pair<int, Amplitude>>> columns;
    KetBuilder out(ket.modes(), ket.size() * 8);
    for (const auto &[occ, amp] : ket.terms()) {
        const int n = occ[um];
        auto it = columns.find(n);
        if (it == columns.end()) {
            auto col = squeeze_column(n, sq, policy);
            it = columns.emplace(n, std::vector<std::pair<int, Amplitude>>(col.begin(), col.end())).first;
        }
        for (const auto &[m, s] : it->second) {
            out.add(occ.with(um, m), amp * s);
        }
    }
    return std::move(out).build();
}

/// Loss channel on `mode`: a^+ -> sqrt(eta) a^+ + sqrt(1-eta) l^+, where l is
/// a fresh mode appended at index modes().
inline Ket apply_loss(const Ket &ket, int mode, const LossParams &loss) {
    detail::check_mode(ket, mode);
    loss.validate();
    if (static_cast<std::size_t>(ket.modes()) + 1 > Occupation::kMaxModes) {
        throw std::invalid_argument("no room for another loss mode");
    }
    const auto um = static_cast<std::size_t>(mode);
    const auto lm = static_cast<std::size_t>(ket.modes());
    const double eta = loss.eta;
    KetBuilder out(ket.modes() + 1, ket.size() * 4);
    for (const auto &[occ, amp] : ket.terms()) {
        const int n = occ[um];
        for (int kept = n; kept >= 0; --kept) {
            const int lost = n - kept;
            const double w =
                std::sqrt(detail::binomial(n, kept) * std::pow(eta, kept) * std::pow(1.0 - eta, lost));
            if (w == 0.0) continue;
            out.add(occ.with(um, kept).with(lm, lost), amp * w);
        }
    }
    return std::move(out).build();
}

}  // namespace sqbsm

#endif  // SQBSM_OPTICS_HPP
