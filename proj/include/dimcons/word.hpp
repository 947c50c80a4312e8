#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace dimcons {

/// Signed generator index: +i is g_i, -i is its inverse, i in 1..rank.
using Letter = std::int8_t;

inline constexpr int kMaxRank = 26;

/// Reduced word in the free group of a given rank. The identity is the empty word
/// and doubles as the base point o of the Cayley tree.
class Word {
public:
    Word() = default;
    explicit Word(int rank) : rank_(rank) { check_rank(rank); }

    /// Freely reduces `letters`. Reduction is a single stack pass, so the
    /// result does not depend on the order in which cancellations happen.
    Word(int rank, std::span<const Letter> letters) : Word(rank) {
        letters_.reserve(letters.size());
        for (Letter l : letters) push(l);
    }
    Word(int rank, std::initializer_list<int> letters) : Word(rank) {
        for (int l : letters) push(static_cast<Letter>(l));
    }

    /// Lowercase a,b,c,... are generators, uppercase their inverses; spaces and
    /// "e" (alone) denote nothing.
    static Word parse(int rank, std::string_view text) {
        Word w(rank);
        if (text == "e" || text == "1") return w;
        for (char c : text) {
            if (c == ' ' || c == '.' || c == '*') continue;
            int idx;
            if (c >= 'a' && c <= 'z') {
                idx = c - 'a' + 1;
            } else if (c >= 'A' && c <= 'Z') {
                idx = -(c - 'A' + 1);
            } else {
                throw ConfigError(std::string("invalid letter '") + c + "' in word");
            }
            if (std::abs(idx) > rank) {
                throw ConfigError(std::string("letter '") + c + "' exceeds rank " + std::to_string(rank));
            }
            w.push(static_cast<Letter>(idx));
        }
        return w;
    }

    static Word generator(int rank, int signed_index) {
        Word w(rank);
        w.push(static_cast<Letter>(signed_index));
        return w;
    }

    int rank() const noexcept { return rank_; }
    std::size_t length() const noexcept { return letters_.size(); }
    bool empty() const noexcept { return letters_.empty(); }
    std::span<const Letter> letters() const noexcept { return letters_; }
    Letter operator[](std::size_t i) const { return letters_[i]; }
    Letter back() const { return letters_.back(); }

    /// Right multiplication by one letter, reducing at the junction.
    void push(Letter l) {
        if (l == 0 || std::abs(l) > rank_) throw ConfigError("letter out of range for rank");
        if (!letters_.empty() && letters_.back() == -l) {
            letters_.pop_back();
        } else {
            letters_.push_back(l);
        }
    }

    /// In-place right multiplication; cancellation costs O(overlap).
    Word& operator*=(const Word& rhs) {
        require_same_group(*this, rhs);
        std::size_t i = 0;
        while (i < rhs.letters_.size() && !letters_.empty() && letters_.back() == -rhs.letters_[i]) {
            letters_.pop_back();
            ++i;
        }
        letters_.insert(letters_.end(), rhs.letters_.begin() + static_cast<std::ptrdiff_t>(i), rhs.letters_.end());
        return *this;
    }

    Word inverse() const {
        Word w(rank_);
        w.letters_.resize(letters_.size());
        std::transform(letters_.rbegin(), letters_.rend(), w.letters_.begin(), [](Letter l) { return static_cast<Letter>(-l); });
        return w;
    }

    Word prefix(std::size_t k) const {
        Word w(rank_);
        w.letters_.assign(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(std::min(k, letters_.size())));
        return w;
    }

    std::string str() const {
        if (letters_.empty()) return "e";
        std::string s;
        s.reserve(letters_.size());
        for (Letter l : letters_) s.push_back(l > 0 ? static_cast<char>('a' + l - 1) : static_cast<char>('A' - l - 1));
        return s;
    }

    friend bool operator==(const Word& a, const Word& b) { return a.rank_ == b.rank_ && a.letters_ == b.letters_; }
    friend auto operator<=>(const Word& a, const Word& b) {
        if (auto c = a.rank_ <=> b.rank_; c != 0) return c;
        return a.letters_ <=> b.letters_;
    }

    friend void require_same_group(const Word& a, const Word& b) {
        if (a.rank_ != b.rank_) {
            throw SpecMismatch("words over F_" + std::to_string(a.rank_) + " and F_" + std::to_string(b.rank_));
        }
    }

private:
    static void check_rank(int rank) {
        if (rank < 1 || rank > kMaxRank) throw ConfigError("free group rank must be in 1..26");
    }

    int rank_ = 1;
    std::vector<Letter> letters_;
};

inline Word operator*(Word lhs, const Word& rhs) {
    lhs *= rhs;
    return lhs;
}

inline std::size_t common_prefix_length(std::span<const Letter> a, std::span<const Letter> b) {
    auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
    return static_cast<std::size_t>(ia - a.begin());
}

inline std::size_t common_prefix_length(const Word& a, const Word& b) {
    require_same_group(a, b);
    return common_prefix_length(a.letters(), b.letters());
}

/// Word metric d(x, y) = |x^{-1} y|. On the tree this is |x| + |y| - 2 cp(x, y).
inline long distance(const Word& x, const Word& y) {
    const auto cp = common_prefix_length(x, y);
    return static_cast<long>(x.length() + y.length() - 2 * cp);
}

/// (x|y)_base = (d(x,base) + d(base,y) - d(x,y)) / 2. Integer-valued on trees.
inline long gromov_product(const Word& x, const Word& y, const Word& base) {
    require_same_group(x, base);
    const long twice = distance(x, base) + distance(base, y) - distance(x, y);
    return twice / 2;
}

inline long gromov_product(const Word& x, const Word& y) { return static_cast<long>(common_prefix_length(x, y)); }

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept {
        std::size_t h = static_cast<std::size_t>(w.rank()) * 0x9E3779B97F4A7C15ull;
        for (Letter l : w.letters()) h = (h ^ static_cast<std::uint8_t>(l)) * 0x100000001B3ull;
        return h;
    }
};

/// All reduced words of exactly the given length, in lexicographic letter order.
inline std::vector<Word> words_of_length(int rank, std::size_t length) {
    std::vector<Word> out;
    std::vector<Letter> cur;
    std::function<void()> rec = [&]() {
        if (cur.size() == length) {
            out.emplace_back(rank, cur);
            return;
        }
        for (int i = -rank; i <= rank; ++i) {
            if (i == 0) continue;
            if (!cur.empty() && cur.back() == -i) continue;
            cur.push_back(static_cast<Letter>(i));
            rec();
            cur.pop_back();
        }
    };
    rec();
    return out;
}

/// Number of reduced words of length k: 2m(2m-1)^{k-1}, and 1 for k = 0.
inline double sphere_size(int rank, std::size_t k) {
    if (k == 0) return 1.0;
    double n = 2.0 * rank;
    for (std::size_t i = 1; i < k; ++i) n *= 2.0 * rank - 1.0;
    return n;
}

} // namespace dimcons
