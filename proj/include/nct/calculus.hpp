#pragma once

#include "nct/mat_tensor.hpp"
#include "nct/trace.hpp"

namespace nct {

/// Free difference quotient of a single word: u splits at each occurrence of
/// the n-th letter into prefix (x) suffix.
template <ScalarMode S>
TensorElem<S> diff_word(const Word& w, VarIndex n) {
    TensorElem<S> t;
    for (int k = 0; k < w.degree(); ++k) {
        if (w[static_cast<std::size_t>(k)] != n) continue;
        t.add_term(w.slice(0, static_cast<std::size_t>(k)),
                   w.slice(static_cast<std::size_t>(k) + 1, static_cast<std::size_t>(w.degree())),
                   scalar_traits<S>::one());
    }
    return t;
}

/// The n-th free difference quotient, extended linearly. Satisfies the
/// Leibniz rule and diff(star(P), n) = invol_dagger(diff(P, n)).
template <ScalarMode S>
TensorElem<S> diff(const Series<S>& P, VarIndex n) {
    TensorElem<S> t;
    t.set_degree_cap(P.degree_cap());
    for (const auto& [w, c] : P.terms())
        for (int k = 0; k < w.degree(); ++k) {
            if (w[static_cast<std::size_t>(k)] != n) continue;
            t.add_term(w.slice(0, static_cast<std::size_t>(k)),
                       w.slice(static_cast<std::size_t>(k) + 1, static_cast<std::size_t>(w.degree())), c);
        }
    return t;
}

/// The n-th cyclic derivative: each occurrence w = A X_n B contributes BA.
template <ScalarMode S>
Series<S> cyc_diff(const Series<S>& P, VarIndex n) {
    Series<S> r;
    r.set_degree_cap(P.degree_cap());
    for (const auto& [w, c] : P.terms())
        for (int k = 0; k < w.degree(); ++k) {
            if (w[static_cast<std::size_t>(k)] != n) continue;
            Word ba = w.slice(static_cast<std::size_t>(k) + 1, static_cast<std::size_t>(w.degree()))
                          .concat(w.slice(0, static_cast<std::size_t>(k)));
            r.add_term(std::move(ba), c);
        }
    return r;
}

/// Cyclic gradient: the l^1-type sequence of all nonzero cyclic derivatives.
template <ScalarMode S>
SeriesSeq<S> grad(const Series<S>& P) {
    SeriesSeq<S> g{.entries = {}, .kind = SeqKind::L1};
    for (VarIndex n : P.variables()) g.set(n, cyc_diff(P, n));
    return g;
}

/// Jacobian: entry (i,j) is the j-th free difference quotient of F_i.
template <ScalarMode S>
MatTensor<S> jacobian(const SeriesSeq<S>& F) {
    MatTensor<S> J;
    for (const auto& [i, Fi] : F.entries)
        for (VarIndex j : Fi.variables()) J.set(i, j, diff(Fi, j));
    return J;
}

/// Adjoint of the n-th free difference quotient on a tensor element, given the
/// n-th conjugate variable xi_n of the oracle's law:
///   dstar(eta) = eta # xi_n - sum over terms u (x) v of
///                (1 (x) tau)(diff u) v + u (tau (x) 1)(diff v).
template <ScalarMode S>
Series<S> dstar(const TensorElem<S>& eta, VarIndex n, const Series<S>& xi_n,
                const TraceOracle<S>& tau) {
    Series<S> r = hash_apply(eta, xi_n);
    for (const auto& [k, c] : eta.terms()) {
        Series<S> left = partial_trace_right(diff_word<S>(k.first, n), tau);
        for (const auto& [w, cw] : left.terms()) r.add_term(w.concat(k.second), -(c * cw));
        Series<S> right = partial_trace_left(diff_word<S>(k.second, n), tau);
        for (const auto& [w, cw] : right.terms()) r.add_term(k.first.concat(w), -(c * cw));
    }
    return r;
}

/// Row-wise adjoint of the Jacobian: jstar(H)_i = sum_j dstar(H(i,j), j).
/// xi must supply the conjugate variable for every column in H's support.
template <ScalarMode S>
SeriesSeq<S> jstar(const MatTensor<S>& H, const SeriesSeq<S>& xi, const TraceOracle<S>& tau) {
    SeriesSeq<S> r{.entries = {}, .kind = SeqKind::L1};
    for (const auto& [k, t] : H.entries()) {
        if (!xi.has(k.second)) throw MissingVariable(k.second);
        r.set(k.first, r.at(k.first) + dstar(t, k.second, xi.at(k.second), tau));
    }
    return r;
}

/// jstar for the free semicircular law, whose conjugate variables are the
/// generators themselves.
template <ScalarMode S>
SeriesSeq<S> jstar_semicircular(const MatTensor<S>& H, const TraceOracle<S>& tau) {
    SeriesSeq<S> xi{.entries = {}, .kind = SeqKind::LInf};
    for (const auto& [k, t] : H.entries()) xi.set(k.second, Series<S>::generator(k.second));
    return jstar(H, xi, tau);
}

/// C(R,S) = sup_{t>0} t S^{t-1} / R^t = 1 / (e S log(R/S)), for R > S > 0.
inline double script_C(double R, double Sv) {
    if (!(R > Sv) || !(Sv > 0.0)) throw DomainError("script_C requires R > S > 0");
    return 1.0 / (std::exp(1.0) * Sv * std::log(R / Sv));
}

/// The inverse-function constant: with T = (R+S)/2, the solution of
/// C / (1 - C C(R,T)) = (R-S)/4.
inline double inverse_C(double R, double Sv) {
    if (!(R > Sv) || !(Sv > 0.0)) throw DomainError("inverse_C requires R > S > 0");
    double T = 0.5 * (R + Sv);
    double a = 0.25 * (R - Sv);
    double te_log = std::exp(1.0) * T * std::log(R / T);
    return a * te_log / (te_log + a);
}

}  // namespace nct
