#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "word.hpp"

namespace dimcons {

/// (C, D)-chain parameters on a tree (delta = 0).
struct ChainParams {
    double C = 0.0;
    double D = 1.0;
};

struct ChainCheck {
    bool ok = true;
    std::optional<std::size_t> violation;  // first index whose step or turn fails
};

/// Gromov products and distances are integers on the tree; thresholds compare exactly.
inline long floor_bound(double C) { return static_cast<long>(std::floor(C + 1e-12)); }
inline long ceil_bound(double D) { return static_cast<long>(std::ceil(D - 1e-12)); }

/// Checks d(x_{i-1}, x_i) >= D and (x_{i-1}|x_{i+1})_{x_i} <= C. For valid chains with
/// D >= 2C + 1 the consequences d(x_0, x_n) >= sum(d_i - 2C) >= n and (x_0|x_n)_{x_1} <= C
/// are asserted as well.
inline ChainCheck is_chain(const std::vector<Word>& points, const ChainParams& p) {
    if (points.size() < 2) throw ConfigError("a chain needs at least 2 points");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (static_cast<double>(distance(points[i - 1], points[i])) < p.D) return {false, i};
        if (i + 1 < points.size() && static_cast<double>(gromov_product(points[i - 1], points[i + 1], points[i])) > p.C)
            return {false, i};
    }
    if (p.D >= 2.0 * p.C + 1.0) {
        const std::size_t n = points.size() - 1;
        double bound = 0.0;
        for (std::size_t i = 1; i <= n; ++i) bound += static_cast<double>(distance(points[i - 1], points[i])) - 2.0 * p.C;
        const auto total = static_cast<double>(distance(points.front(), points.back()));
        if (total < bound || total < static_cast<double>(n))
            throw std::logic_error("chain consequence violated: d(x_0, x_n) too small");
        if (n >= 1 && static_cast<double>(gromov_product(points.front(), points.back(), points[1])) > p.C)
            throw std::logic_error("chain consequence violated: (x_0|x_n)_{x_1} > C");
    }
    return {};
}

/// Membership in CS_o(y, C) on a regular tree of degree >= 4 from |y|, |z| and k = (y|z)_o.
/// Longer chains shortcut to o, x_1, z, so it suffices to decide the one-step chain and the
/// existence of x_1 = z[0, b) t with |t| <= C that follows y where it can.
inline bool chain_shadow_contains_lengths(long ly, long lz, long k, double C) {
    const long c = floor_bound(C);
    const long d = ceil_bound(2.0 * C + 1.0);
    if (lz >= d && k >= ly - c) return true;
    const long lo = std::max(d - c, 0L);
    const long hi = std::min(lz + c - d, lz);
    if (lo > hi) return false;
    if (std::max(lo, ly - c) <= std::min(hi, k - 1)) return true;  // x_1 leaves z before y does
    if (k >= lo && k <= hi && k >= ly - 2 * c) return true;        // x_1 leaves z where y does
    return k >= ly - c && std::max(lo, k + 1) <= hi;               // x_1 leaves z after y
}

namespace detail {

/// Best x_1 leaving z at b with a tail of length t, or nothing when no such vertex exists.
inline std::optional<Word> shadow_candidate(const Word& y, const Word& z, std::size_t b, std::size_t t) {
    Word x = z.prefix(b);
    const auto& zl = z.letters();
    const auto& yl = y.letters();
    for (std::size_t i = 0; i < t; ++i) {
        const std::size_t pos = x.length();
        const bool on_y = pos < yl.size() && common_prefix_length(x, y) == pos;
        auto allowed = [&](Letter l) {
            if (!x.empty() && x.letters().back() == -l) return false;
            return !(i == 0 && b < zl.size() && zl[b] == l);
        };
        if (on_y && allowed(yl[pos])) {
            x.push(yl[pos]);
            continue;
        }
        bool pushed = false;
        for (int g = 1; g <= z.rank() && !pushed; ++g) {
            for (Letter l : {static_cast<Letter>(g), static_cast<Letter>(-g)}) {
                if (allowed(l)) {
                    x.push(l);
                    pushed = true;
                    break;
                }
            }
        }
        if (!pushed) return std::nullopt;
    }
    return x;
}

/// Constructive decision over all (b, t); used for rank 1 where the closed form does not apply.
inline bool chain_shadow_search(const Word& y, const Word& z, double C) {
    const long c = floor_bound(C);
    const ChainParams p{C, 2.0 * C + 1.0};
    const Word o(z.rank());
    if (static_cast<double>(z.length()) >= p.D && static_cast<double>(gromov_product(o, z, y)) <= C) return true;
    for (std::size_t b = 0; b <= z.length(); ++b) {
        for (long t = 0; t <= c; ++t) {
            const auto x1 = shadow_candidate(y, z, b, static_cast<std::size_t>(t));
            if (!x1 || static_cast<double>(x1->length()) < p.D) continue;
            if (static_cast<double>(gromov_product(o, *x1, y)) > C) continue;
            if (static_cast<double>(distance(*x1, z)) < p.D) continue;
            if (static_cast<double>(gromov_product(o, z, *x1)) > C) continue;
            return true;
        }
    }
    return false;
}

} // namespace detail

/// z in CS_x(y, C): some (C, 2C + 1)-chain x = x_0, x_1, ..., x_n = z with n >= 1 and
/// (x_0|x_1)_y <= C.
inline bool chain_shadow_contains(const Word& x, const Word& y, double C, const Word& z) {
    require_same_group(x, y);
    require_same_group(x, z);
    if (C < 0.0) throw ConfigError("chain shadow needs C >= 0");
    const Word xi = x.inverse();
    const Word yy = xi * y;
    const Word zz = xi * z;
    if (x.rank() == 1) return detail::chain_shadow_search(yy, zz, C);
    return chain_shadow_contains_lengths(static_cast<long>(yy.length()), static_cast<long>(zz.length()),
                                         static_cast<long>(common_prefix_length(yy, zz)), C);
}

} // namespace dimcons
