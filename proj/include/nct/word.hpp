#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace nct {

/// 1-based index of an indeterminate X_n / T_n.
using VarIndex = std::uint32_t;

/// A monomial over the free indeterminates: a finite sequence of variable
/// indices. The empty word is the constant monomial 1. Products concatenate;
/// there is no rewriting of any kind.
class Word {
public:
    Word() = default;
    Word(std::initializer_list<VarIndex> ls) : letters_(ls) {}
    explicit Word(std::vector<VarIndex> ls) : letters_(std::move(ls)) {}

    int degree() const { return static_cast<int>(letters_.size()); }
    bool empty() const { return letters_.empty(); }
    VarIndex operator[](std::size_t k) const { return letters_[k]; }
    const std::vector<VarIndex>& letters() const { return letters_; }

    Word concat(const Word& o) const {
        std::vector<VarIndex> ls;
        ls.reserve(letters_.size() + o.letters_.size());
        ls.insert(ls.end(), letters_.begin(), letters_.end());
        ls.insert(ls.end(), o.letters_.begin(), o.letters_.end());
        return Word(std::move(ls));
    }

    Word reversed() const {
        std::vector<VarIndex> ls(letters_.rbegin(), letters_.rend());
        return Word(std::move(ls));
    }

    /// Letters k..end followed by letters 0..k-1.
    Word rotated(std::size_t k) const {
        std::vector<VarIndex> ls;
        ls.reserve(letters_.size());
        ls.insert(ls.end(), letters_.begin() + k, letters_.end());
        ls.insert(ls.end(), letters_.begin(), letters_.begin() + k);
        return Word(std::move(ls));
    }

    /// Letters [from, to).
    Word slice(std::size_t from, std::size_t to) const {
        return Word(std::vector<VarIndex>(letters_.begin() + from, letters_.begin() + to));
    }

    Word sorted() const {
        std::vector<VarIndex> ls = letters_;
        std::sort(ls.begin(), ls.end());
        return Word(std::move(ls));
    }

    bool operator==(const Word& o) const = default;

    // Degree first, then lexicographic: the canonical term order.
    std::strong_ordering operator<=>(const Word& o) const {
        if (auto c = letters_.size() <=> o.letters_.size(); c != 0) return c;
        return std::lexicographical_compare_three_way(letters_.begin(), letters_.end(),
                                                      o.letters_.begin(), o.letters_.end());
    }

private:
    std::vector<VarIndex> letters_;
};

}  // namespace nct
