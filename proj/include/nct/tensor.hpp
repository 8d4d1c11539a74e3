#pragma once

#include <map>
#include <optional>
#include <utility>

#include "nct/series.hpp"

namespace nct {

/// Element of the tensor algebra P (x) P^op in the monomial-pair basis, so
/// equality of representations is canonical. The # product and the bimodule
/// action keep the ``op'' side implicit: (u, v) stands for u (x) v^op.
template <ScalarMode S>
class TensorElem {
public:
    using Key = std::pair<Word, Word>;
    using Terms = std::map<Key, S>;

    TensorElem() = default;

    static TensorElem zero() { return TensorElem(); }

    static TensorElem one() { return term(Word{}, Word{}, scalar_traits<S>::one()); }

    static TensorElem term(Word u, Word v, S c) {
        TensorElem t;
        t.add_term(std::move(u), std::move(v), std::move(c));
        return t;
    }

    /// u (x) v with unit coefficient.
    static TensorElem pure(Word u, Word v) {
        return term(std::move(u), std::move(v), scalar_traits<S>::one());
    }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    std::optional<int> degree_cap() const { return cap_; }

    void set_degree_cap(std::optional<int> cap, TruncationLog* log = nullptr) {
        cap_ = cap;
        if (!cap_) return;
        for (auto it = terms_.begin(); it != terms_.end();) {
            int d = it->first.first.degree() + it->first.second.degree();
            if (d > *cap_) {
                if (log) log->drop(scalar_traits<S>::abs_double(it->second), d);
                it = terms_.erase(it);
            } else {
                ++it;
            }
        }
    }

    int max_degree() const {
        int d = 0;
        for (const auto& [k, c] : terms_) d = std::max(d, k.first.degree() + k.second.degree());
        return d;
    }

    void add_term(Word u, Word v, S c, TruncationLog* log = nullptr) {
        if (scalar_traits<S>::is_zero(c)) return;
        int d = u.degree() + v.degree();
        if (cap_ && d > *cap_) {
            if (log) log->drop(scalar_traits<S>::abs_double(c), d);
            return;
        }
        auto [it, inserted] = terms_.emplace(Key(std::move(u), std::move(v)), c);
        if (!inserted) {
            it->second += c;
            if (scalar_traits<S>::is_zero(it->second)) terms_.erase(it);
        }
    }

    TensorElem& operator+=(const TensorElem& o) {
        cap_ = detail::merge_caps(cap_, o.cap_);
        set_degree_cap(cap_);
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
        return *this;
    }

    TensorElem& operator-=(const TensorElem& o) {
        cap_ = detail::merge_caps(cap_, o.cap_);
        set_degree_cap(cap_);
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
        return *this;
    }

    friend TensorElem operator+(TensorElem a, const TensorElem& b) { return a += b; }
    friend TensorElem operator-(TensorElem a, const TensorElem& b) { return a -= b; }

    TensorElem operator-() const {
        TensorElem r;
        r.cap_ = cap_;
        for (const auto& [k, c] : terms_) r.terms_.emplace(k, -c);
        return r;
    }

    friend TensorElem operator*(const S& c, const TensorElem& a) {
        TensorElem r;
        r.cap_ = a.cap_;
        if (scalar_traits<S>::is_zero(c)) return r;
        for (const auto& [k, v] : a.terms_) r.add_term(k.first, k.second, c * v);
        return r;
    }

    bool operator==(const TensorElem& o) const { return terms_ == o.terms_; }

private:
    Terms terms_;
    std::optional<int> cap_;
};

/// A (x) B for series arguments.
template <ScalarMode S>
TensorElem<S> tensor_of(const Series<S>& a, const Series<S>& b,
                        std::optional<int> cap = std::nullopt) {
    TensorElem<S> r;
    r.set_degree_cap(detail::merge_caps(cap, detail::merge_caps(a.degree_cap(), b.degree_cap())));
    for (const auto& [u, cu] : a.terms())
        for (const auto& [v, cv] : b.terms()) r.add_term(u, v, cu * cv);
    return r;
}

/// The # algebra product: (A (x) B) # (C (x) D) = AC (x) DB, bilinearly.
/// Operand terms are scanned in total-degree order so capped products stop at
/// the cap boundary; skipped mass enters the log through suffix norm sums.
template <ScalarMode S>
TensorElem<S> tensor_mul(const TensorElem<S>& a, const TensorElem<S>& b,
                         std::optional<int> cap = std::nullopt, TruncationLog* log = nullptr) {
    TensorElem<S> r;
    r.set_degree_cap(detail::merge_caps(cap, detail::merge_caps(a.degree_cap(), b.degree_cap())));
    std::optional<int> rcap = r.degree_cap();
    if (!rcap) {
        for (const auto& [ka, ca] : a.terms())
            for (const auto& [kb, cb] : b.terms())
                r.add_term(ka.first.concat(kb.first), kb.second.concat(ka.second), ca * cb);
        return r;
    }

    struct Flat {
        const typename TensorElem<S>::Key* key;
        const S* coeff;
        int degree;
    };
    auto flatten = [](const TensorElem<S>& t) {
        std::vector<Flat> v;
        v.reserve(t.term_count());
        for (const auto& [k, c] : t.terms())
            v.push_back({&k, &c, k.first.degree() + k.second.degree()});
        std::stable_sort(v.begin(), v.end(),
                         [](const Flat& x, const Flat& y) { return x.degree < y.degree; });
        return v;
    };
    std::vector<Flat> fa = flatten(a), fb = flatten(b);
    std::vector<double> suffix;
    if (log) {
        suffix.assign(fb.size() + 1, 0.0);
        for (std::size_t j = fb.size(); j > 0; --j)
            suffix[j - 1] = suffix[j] + scalar_traits<S>::abs_double(*fb[j - 1].coeff) *
                                            std::pow(log->radius, fb[j - 1].degree);
    }
    for (const Flat& ta : fa) {
        std::size_t j = 0;
        for (const Flat& tb : fb) {
            if (ta.degree + tb.degree > *rcap) {
                if (log)
                    log->dropped += scalar_traits<S>::abs_double(*ta.coeff) *
                                    std::pow(log->radius, ta.degree) * suffix[j];
                break;
            }
            r.add_term(ta.key->first.concat(tb.key->first),
                       tb.key->second.concat(ta.key->second), (*ta.coeff) * (*tb.coeff));
            ++j;
        }
    }
    return r;
}

/// (a (x) b) # P = a P b, extended bilinearly.
template <ScalarMode S>
Series<S> hash_apply(const TensorElem<S>& eta, const Series<S>& P,
                     std::optional<int> cap = std::nullopt, TruncationLog* log = nullptr) {
    Series<S> r;
    r.set_degree_cap(detail::merge_caps(cap, detail::merge_caps(eta.degree_cap(), P.degree_cap())));
    for (const auto& [k, c] : eta.terms())
        for (const auto& [w, cw] : P.terms())
            r.add_term(k.first.concat(w).concat(k.second), c * cw, log);
    return r;
}

/// (a (x) b)* = a* (x) b*.
template <ScalarMode S>
TensorElem<S> invol_star(const TensorElem<S>& a) {
    TensorElem<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [k, c] : a.terms()) r.add_term(k.first.reversed(), k.second.reversed(), c);
    return r;
}

/// (a (x) b)^dagger = b* (x) a*.
template <ScalarMode S>
TensorElem<S> invol_dagger(const TensorElem<S>& a) {
    TensorElem<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [k, c] : a.terms()) r.add_term(k.second.reversed(), k.first.reversed(), c);
    return r;
}

/// (a (x) b)^diamond = b (x) a.
template <ScalarMode S>
TensorElem<S> invol_diamond(const TensorElem<S>& a) {
    TensorElem<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [k, c] : a.terms()) r.add_term(k.second, k.first, c);
    return r;
}

/// Sum over terms of |c| R^(left degree + right degree). One admissible
/// decomposition of the projective norm, hence a certified upper bound for
/// it; every bound in this library consumes upper bounds only.
template <ScalarMode S>
double tnorm_upper(const TensorElem<S>& a, double R) {
    double n = 0.0;
    for (const auto& [k, c] : a.terms())
        n += scalar_traits<S>::abs_double(c) * std::pow(R, k.first.degree() + k.second.degree());
    return n;
}

/// Copy without terms below `tol` in absolute value. Numerical work on
/// rapidly decaying structure arrays prunes far below its reported
/// tolerances to keep term counts finite.
template <ScalarMode S>
TensorElem<S> pruned(const TensorElem<S>& a, double tol) {
    if (tol <= 0.0) return a;
    TensorElem<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [k, c] : a.terms())
        if (scalar_traits<S>::abs_double(c) >= tol) r.add_term(k.first, k.second, c);
    return r;
}

/// Multiplication map m(a (x) b) = ab.
template <ScalarMode S>
Series<S> mul_map(const TensorElem<S>& a) {
    Series<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [k, c] : a.terms()) r.add_term(k.first.concat(k.second), c);
    return r;
}

}  // namespace nct
