#pragma once

#include <algorithm>

#include "word.hpp"

namespace dimcons {

/// Element (x, y) of F_m x F_m*.
struct ProductElement {
    Word first;
    Word second;

    static ProductElement identity(int rank1, int rank2) { return {Word(rank1), Word(rank2)}; }

    ProductElement& operator*=(const ProductElement& rhs) {
        first *= rhs.first;
        second *= rhs.second;
        return *this;
    }
    ProductElement inverse() const { return {first.inverse(), second.inverse()}; }

    friend ProductElement operator*(ProductElement a, const ProductElement& b) {
        a *= b;
        return a;
    }
    friend bool operator==(const ProductElement&, const ProductElement&) = default;
    friend auto operator<=>(const ProductElement&, const ProductElement&) = default;
};

/// Max-metric on the product: d(x̄1, x̄2) = max{d(x1, x2), d*(y1, y2)}.
inline long product_distance(const ProductElement& a, const ProductElement& b) {
    return std::max(distance(a.first, b.first), distance(a.second, b.second));
}

struct ProductElementHash {
    std::size_t operator()(const ProductElement& p) const noexcept {
        WordHash h;
        return h(p.first) * 31u ^ h(p.second);
    }
};

} // namespace dimcons
