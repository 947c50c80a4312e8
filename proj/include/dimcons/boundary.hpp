#pragma once

#include <cmath>
#include <string>

#include "product.hpp"

namespace dimcons {

/// A boundary point of the Cayley tree, known through its first `depth()` letters.
/// Represents the cylinder of infinite reduced words extending the prefix.
class BoundaryPoint {
public:
    BoundaryPoint() = default;
    explicit BoundaryPoint(Word prefix) : prefix_(std::move(prefix)) {
        if (prefix_.empty()) throw ConfigError("boundary approximation needs depth >= 1");
    }

    /// g^depth, the approximation of the ray g g g ... .
    static BoundaryPoint ray(int rank, int signed_generator, std::size_t depth) {
        Word w(rank);
        for (std::size_t i = 0; i < depth; ++i) w.push(static_cast<Letter>(signed_generator));
        return BoundaryPoint(std::move(w));
    }

    const Word& prefix() const noexcept { return prefix_; }
    std::size_t depth() const noexcept { return prefix_.length(); }
    int rank() const noexcept { return prefix_.rank(); }

    friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;

private:
    Word prefix_;
};

struct BoundaryPair {
    BoundaryPoint first;
    BoundaryPoint second;
    friend bool operator==(const BoundaryPair&, const BoundaryPair&) = default;
};

/// Gromov product at the identity together with an exactness flag. When
/// `truncated` is set the value is only a lower bound (prefixes agree to full depth).
struct GromovValue {
    long value = 0;
    bool truncated = false;
};

inline GromovValue gromov_product(const BoundaryPoint& a, const BoundaryPoint& b) {
    require_same_group(a.prefix(), b.prefix());
    const auto cp = common_prefix_length(a.prefix(), b.prefix());
    return {static_cast<long>(cp), cp >= std::min(a.depth(), b.depth())};
}

inline GromovValue gromov_product(const Word& x, const BoundaryPoint& b) {
    require_same_group(x, b.prefix());
    const auto cp = common_prefix_length(x, b.prefix());
    // x lies on the ray when cp == |x|; otherwise the branch point is visible iff cp < depth.
    return {static_cast<long>(cp), cp != x.length() && cp >= b.depth()};
}

inline GromovValue gromov_product(const BoundaryPoint& b, const Word& x) { return gromov_product(x, b); }

/// Boundary arguments are only supported at the identity base point.
template <typename A, typename B>
GromovValue gromov_product(const A& a, const B& b, const Word& base) {
    if (!base.empty()) throw UnsupportedBase("Gromov products with boundary points need the identity as base");
    return gromov_product(a, b);
}

namespace detail {
inline long exact_or_throw(const GromovValue& g, const char* what) {
    if (g.truncated) throw InsufficientDepth(std::string(what) + ": boundary approximation too shallow");
    return g.value;
}
} // namespace detail

/// q(x, y) = exp(-(x|y)_o), with q(x, x) = 0.
inline double quasi_metric(const Word& x, const Word& y) {
    if (x == y) return 0.0;
    return std::exp(-static_cast<double>(gromov_product(x, y)));
}

inline double quasi_metric(const Word& x, const BoundaryPoint& b) {
    return std::exp(-static_cast<double>(detail::exact_or_throw(gromov_product(x, b), "quasi_metric")));
}
inline double quasi_metric(const BoundaryPoint& b, const Word& x) { return quasi_metric(x, b); }

inline double quasi_metric(const BoundaryPoint& a, const BoundaryPoint& b) {
    if (a == b) return 0.0;
    return std::exp(-static_cast<double>(detail::exact_or_throw(gromov_product(a, b), "quasi_metric")));
}

inline double product_quasi_metric(const ProductElement& a, const ProductElement& b) {
    return std::max(quasi_metric(a.first, b.first), quasi_metric(a.second, b.second));
}
inline double product_quasi_metric(const BoundaryPair& a, const BoundaryPair& b) {
    return std::max(quasi_metric(a.first, b.first), quasi_metric(a.second, b.second));
}

/// Membership of eta in the shadow O(x, R) = { eta : (o|eta)_x < R }.
/// On the tree (o|eta)_x = |x| - (x|eta)_o.
inline bool shadow_contains(const Word& x, double thickness, const BoundaryPoint& eta) {
    const long xe = detail::exact_or_throw(gromov_product(x, eta), "shadow_contains");
    return static_cast<double>(static_cast<long>(x.length()) - xe) < thickness;
}

/// Busemann value beta_eta(x) = lim |x^{-1} w_k| - |w_k| = |x| - 2 (x|eta)_o.
/// Exact as soon as depth(eta) >= |x|.
inline long busemann(const Word& x, const BoundaryPoint& eta) {
    const long xe = detail::exact_or_throw(gromov_product(x, eta), "busemann");
    return static_cast<long>(x.length()) - 2 * xe;
}

/// The map F_{m+1} -> F_m fixing g_1..g_m and killing g_{m+1}.
class KillLastGenerator {
public:
    explicit KillLastGenerator(int target_rank) : target_rank_(target_rank) {
        if (target_rank < 1) throw ConfigError("target rank must be >= 1");
    }
    int source_rank() const noexcept { return target_rank_ + 1; }
    int target_rank() const noexcept { return target_rank_; }

    Word operator()(const Word& x) const {
        if (x.rank() != source_rank()) {
            throw SpecMismatch("homomorphism expects a word over F_" + std::to_string(source_rank()));
        }
        Word out(target_rank_);
        for (Letter l : x.letters()) {
            if (std::abs(l) <= target_rank_) out.push(l);
        }
        return out;
    }

private:
    int target_rank_;
};

} // namespace dimcons
