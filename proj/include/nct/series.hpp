#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "nct/errors.hpp"
#include "nct/scalar.hpp"
#include "nct/word.hpp"

namespace nct {

/// Accumulates the weighted mass of terms dropped by degree truncation, so
/// reports can show the gap between a truncated value and the untruncated one.
struct TruncationLog {
    double radius = 1.0;
    double dropped = 0.0;

    void drop(double abs_coeff, int degree) { dropped += abs_coeff * std::pow(radius, degree); }
};

namespace detail {
inline std::optional<int> merge_caps(std::optional<int> a, std::optional<int> b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}
}  // namespace detail

/// Sparse noncommutative power series: a finitely supported assignment of
/// coefficients to words. `degree_cap`, when set, records the truncation
/// degree under which the value is exact; truncation provenance travels with
/// the value rather than living in ambient state.
template <ScalarMode S>
class Series {
public:
    using Terms = std::map<Word, S>;

    Series() = default;

    static Series zero() { return Series(); }

    static Series constant(S c) {
        Series s;
        s.add_term(Word{}, std::move(c));
        return s;
    }

    static Series one() { return constant(scalar_traits<S>::one()); }

    static Series generator(VarIndex n) { return monomial(Word{n}, scalar_traits<S>::one()); }

    static Series monomial(Word w, S c) {
        Series s;
        s.add_term(std::move(w), std::move(c));
        return s;
    }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    std::optional<int> degree_cap() const { return cap_; }

    void set_degree_cap(std::optional<int> cap, TruncationLog* log = nullptr) {
        cap_ = cap;
        if (!cap_) return;
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->first.degree() > *cap_) {
                if (log) log->drop(scalar_traits<S>::abs_double(it->second), it->first.degree());
                it = terms_.erase(it);
            } else {
                ++it;
            }
        }
    }

    int max_degree() const {
        int d = 0;
        for (const auto& [w, c] : terms_) d = std::max(d, w.degree());
        return d;
    }

    S coeff(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? scalar_traits<S>::zero() : it->second;
    }

    S constant_term() const { return coeff(Word{}); }

    /// Merge `c` into the coefficient of `w`; zero results are not stored and
    /// terms beyond the degree cap are dropped (optionally logged).
    void add_term(Word w, S c, TruncationLog* log = nullptr) {
        if (scalar_traits<S>::is_zero(c)) return;
        if (cap_ && w.degree() > *cap_) {
            if (log) log->drop(scalar_traits<S>::abs_double(c), w.degree());
            return;
        }
        auto [it, inserted] = terms_.emplace(std::move(w), c);
        if (!inserted) {
            it->second += c;
            if (scalar_traits<S>::is_zero(it->second)) terms_.erase(it);
        }
    }

    std::set<VarIndex> variables() const {
        std::set<VarIndex> vars;
        for (const auto& [w, c] : terms_)
            for (VarIndex v : w.letters()) vars.insert(v);
        return vars;
    }

    Series& operator+=(const Series& o) {
        cap_ = detail::merge_caps(cap_, o.cap_);
        set_degree_cap(cap_);
        for (const auto& [w, c] : o.terms_) add_term(w, c);
        return *this;
    }

    Series& operator-=(const Series& o) {
        cap_ = detail::merge_caps(cap_, o.cap_);
        set_degree_cap(cap_);
        for (const auto& [w, c] : o.terms_) add_term(w, -c);
        return *this;
    }

    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }

    Series operator-() const {
        Series r;
        r.cap_ = cap_;
        for (const auto& [w, c] : terms_) r.terms_.emplace(w, -c);
        return r;
    }

    friend Series operator*(const S& c, const Series& a) {
        Series r;
        r.cap_ = a.cap_;
        if (scalar_traits<S>::is_zero(c)) return r;
        for (const auto& [w, v] : a.terms_) r.add_term(w, c * v);
        return r;
    }

    bool operator==(const Series& o) const { return terms_ == o.terms_; }

private:
    Terms terms_;
    std::optional<int> cap_;
};

/// Product by word concatenation, truncated at `cap` when given. The result's
/// cap is the minimum of the inputs' caps and the argument. Terms iterate in
/// degree order, so capped products stop each inner scan at the cap boundary;
/// the mass of the skipped tail enters the log through suffix norm sums.
template <ScalarMode S>
Series<S> mul(const Series<S>& a, const Series<S>& b, std::optional<int> cap = std::nullopt,
              TruncationLog* log = nullptr) {
    Series<S> r;
    r.set_degree_cap(detail::merge_caps(cap, detail::merge_caps(a.degree_cap(), b.degree_cap())));
    std::optional<int> rcap = r.degree_cap();
    std::vector<double> suffix;
    if (log && rcap) {
        suffix.assign(b.term_count() + 1, 0.0);
        std::size_t j = b.term_count();
        for (auto it = b.terms().rbegin(); it != b.terms().rend(); ++it, --j)
            suffix[j - 1] = suffix[j] + scalar_traits<S>::abs_double(it->second) *
                                            std::pow(log->radius, it->first.degree());
    }
    for (const auto& [wa, ca] : a.terms()) {
        const int da = wa.degree();
        if (rcap && da > *rcap) {
            if (log)
                log->dropped += scalar_traits<S>::abs_double(ca) * std::pow(log->radius, da) *
                                (suffix.empty() ? 0.0 : suffix[0]);
            continue;
        }
        std::size_t j = 0;
        for (const auto& [wb, cb] : b.terms()) {
            if (rcap && da + wb.degree() > *rcap) {
                if (log)
                    log->dropped += scalar_traits<S>::abs_double(ca) *
                                    std::pow(log->radius, da) * suffix[j];
                break;
            }
            r.add_term(wa.concat(wb), ca * cb);
            ++j;
        }
    }
    return r;
}

template <ScalarMode S>
Series<S> operator*(const Series<S>& a, const Series<S>& b) {
    return mul(a, b);
}

/// The involution P -> P*: words reversed, coefficients conjugated (identity
/// on the real scalars in scope).
template <ScalarMode S>
Series<S> star(const Series<S>& a) {
    Series<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [w, c] : a.terms()) r.add_term(w.reversed(), c);
    return r;
}

/// || P ||_R = sum over stored terms of |coeff| R^deg.
template <ScalarMode S>
double norm_R(const Series<S>& a, double R) {
    double n = 0.0;
    for (const auto& [w, c] : a.terms())
        n += scalar_traits<S>::abs_double(c) * std::pow(R, w.degree());
    return n;
}

/// Number operator: each monomial scaled by its degree (constants killed).
template <ScalarMode S>
Series<S> number_op(const Series<S>& a) {
    Series<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [w, c] : a.terms())
        if (w.degree() > 0) r.add_term(w, scalar_traits<S>::from_int(w.degree()) * c);
    return r;
}

/// Inverse of the number operator on zero-constant series; annihilates constants.
template <ScalarMode S>
Series<S> sigma(const Series<S>& a) {
    Series<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [w, c] : a.terms())
        if (w.degree() > 0) r.add_term(w, scalar_traits<S>::div_int(c, w.degree()));
    return r;
}

/// P -> P - P(0).
template <ScalarMode S>
Series<S> pi_proj(const Series<S>& a) {
    Series<S> r = a;
    r.add_term(Word{}, -a.constant_term());
    return r;
}

/// Cyclic symmetrization: each monomial replaced by the average of its
/// rotations. Idempotent and contractive in every || . ||_R.
template <ScalarMode S>
Series<S> cyc_sym(const Series<S>& a) {
    Series<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [w, c] : a.terms()) {
        int d = w.degree();
        if (d == 0) {
            r.add_term(w, c);
            continue;
        }
        S share = scalar_traits<S>::div_int(c, d);
        for (int k = 0; k < d; ++k) r.add_term(w.rotated(k), share);
    }
    return r;
}

/// Keep only terms of degree <= d (no cap recorded; a plain restriction).
template <ScalarMode S>
Series<S> restrict_degree(const Series<S>& a, int d) {
    Series<S> r;
    for (const auto& [w, c] : a.terms())
        if (w.degree() <= d) r.add_term(w, c);
    return r;
}

/// Copy without terms below `tol` in absolute value.
template <ScalarMode S>
Series<S> pruned(const Series<S>& a, double tol) {
    if (tol <= 0.0) return a;
    Series<S> r;
    r.set_degree_cap(a.degree_cap());
    for (const auto& [w, c] : a.terms())
        if (scalar_traits<S>::abs_double(c) >= tol) r.add_term(w, c);
    return r;
}

/// Largest absolute coefficient of a - b; the float-mode equality measure.
template <ScalarMode S>
double max_coeff_delta(const Series<S>& a, const Series<S>& b) {
    double m = 0.0;
    Series<S> d = a - b;
    for (const auto& [w, c] : d.terms()) m = std::max(m, scalar_traits<S>::abs_double(c));
    return m;
}

enum class SeqKind { L1, LInf };

/// Finitely supported sequence of series, the desk-scale stand-in for the
/// l^1 / l^infty sequence spaces over the power-series algebra.
template <ScalarMode S>
struct SeriesSeq {
    std::map<VarIndex, Series<S>> entries;
    SeqKind kind = SeqKind::LInf;

    static SeriesSeq generators(const std::set<VarIndex>& vars, SeqKind kind = SeqKind::LInf) {
        SeriesSeq seq{.entries = {}, .kind = kind};
        for (VarIndex v : vars) seq.entries.emplace(v, Series<S>::generator(v));
        return seq;
    }

    bool has(VarIndex n) const { return entries.count(n) != 0; }

    const Series<S>& at(VarIndex n) const {
        static const Series<S> kZero;
        auto it = entries.find(n);
        return it == entries.end() ? kZero : it->second;
    }

    void set(VarIndex n, Series<S> s) {
        if (s.is_zero())
            entries.erase(n);
        else
            entries[n] = std::move(s);
    }

    SeriesSeq& operator+=(const SeriesSeq& o) {
        for (const auto& [n, s] : o.entries) set(n, at(n) + s);
        return *this;
    }

    SeriesSeq& operator-=(const SeriesSeq& o) {
        for (const auto& [n, s] : o.entries) set(n, at(n) - s);
        return *this;
    }

    friend SeriesSeq operator+(SeriesSeq a, const SeriesSeq& b) { return a += b; }
    friend SeriesSeq operator-(SeriesSeq a, const SeriesSeq& b) { return a -= b; }
};

template <ScalarMode S>
double norm_seq(const SeriesSeq<S>& seq, double R, SeqKind kind) {
    double n = 0.0;
    for (const auto& [i, s] : seq.entries) {
        double v = norm_R(s, R);
        n = (kind == SeqKind::L1) ? n + v : std::max(n, v);
    }
    return n;
}

template <ScalarMode S>
double norm_seq(const SeriesSeq<S>& seq, double R) {
    return norm_seq(seq, R, seq.kind);
}

/// Replace each letter X_n of P by Y_n and expand, truncating at `cap`.
/// Every index appearing in P must have an image in Y.
template <ScalarMode S>
Series<S> substitute(const Series<S>& P, const SeriesSeq<S>& Y, int cap,
                     TruncationLog* log = nullptr) {
    for (VarIndex v : P.variables())
        if (!Y.has(v)) throw MissingVariable(v);
    Series<S> r;
    r.set_degree_cap(cap);
    for (const auto& [w, c] : P.terms()) {
        Series<S> acc = Series<S>::constant(c);
        acc.set_degree_cap(cap);
        for (VarIndex v : w.letters()) {
            acc = mul(acc, Y.at(v), cap, log);
            if (acc.is_zero()) break;
        }
        r += acc;
    }
    return r;
}

}  // namespace nct
