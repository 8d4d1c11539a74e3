#pragma once

#include <mutex>

#include "nct/tensor.hpp"

namespace nct {

/// A tracial state evaluated on monomials. Implementations: the combinatorial
/// semicircular oracle below, and the truncated Fock-space oracle in fock.hpp.
/// Implementations must be safe for concurrent read-only queries.
template <ScalarMode S>
class TraceOracle {
public:
    virtual ~TraceOracle() = default;
    virtual S word_trace(const Word& w) const = 0;

    S trace(const Series<S>& a) const {
        S t = scalar_traits<S>::zero();
        for (const auto& [w, c] : a.terms()) t += c * word_trace(w);
        return t;
    }
};

/// Trace oracle of a free semicircular family with unit variance, computed by
/// the Schwinger-Dyson recursion tau(X_n u) = sum over splits at letters of u
/// equal to n of tau(left) tau(right). Equivalent to counting non-crossing
/// pair partitions with equal letters inside each pair; exact integers.
template <ScalarMode S>
class SemicircularOracle final : public TraceOracle<S> {
public:
    S word_trace(const Word& w) const override {
        if (w.degree() % 2 != 0) return scalar_traits<S>::zero();
        std::scoped_lock lock(mutex_);
        return trace_locked(w);
    }

private:
    S trace_locked(const Word& w) const {
        if (w.empty()) return scalar_traits<S>::one();
        auto it = memo_.find(w);
        if (it != memo_.end()) return it->second;
        S total = scalar_traits<S>::zero();
        VarIndex n = w[0];
        for (int k = 1; k < w.degree(); ++k) {
            if (w[static_cast<std::size_t>(k)] != n) continue;
            S left = trace_locked(w.slice(1, static_cast<std::size_t>(k)));
            if (scalar_traits<S>::is_zero(left)) continue;
            total += left * trace_locked(w.slice(static_cast<std::size_t>(k) + 1,
                                                 static_cast<std::size_t>(w.degree())));
        }
        memo_.emplace(w, total);
        return total;
    }

    mutable std::map<Word, S> memo_;
    mutable std::mutex mutex_;
};

/// (1 (x) tau): sum of c tau(v) u.
template <ScalarMode S>
Series<S> partial_trace_right(const TensorElem<S>& eta, const TraceOracle<S>& tau) {
    Series<S> r;
    r.set_degree_cap(eta.degree_cap());
    for (const auto& [k, c] : eta.terms()) r.add_term(k.first, c * tau.word_trace(k.second));
    return r;
}

/// (tau (x) 1): sum of c tau(u) v.
template <ScalarMode S>
Series<S> partial_trace_left(const TensorElem<S>& eta, const TraceOracle<S>& tau) {
    Series<S> r;
    r.set_degree_cap(eta.degree_cap());
    for (const auto& [k, c] : eta.terms()) r.add_term(k.second, c * tau.word_trace(k.first));
    return r;
}

/// (tau (x) tau^op) evaluation: sum of c tau(u) tau(v).
template <ScalarMode S>
S tensor_trace(const TensorElem<S>& eta, const TraceOracle<S>& tau) {
    S t = scalar_traits<S>::zero();
    for (const auto& [k, c] : eta.terms()) t += c * tau.word_trace(k.first) * tau.word_trace(k.second);
    return t;
}

/// <P, Q>_tau = tau(Q* P), on real scalars.
template <ScalarMode S>
S series_pairing(const Series<S>& p, const Series<S>& q, const TraceOracle<S>& tau) {
    S t = scalar_traits<S>::zero();
    for (const auto& [wq, cq] : q.terms())
        for (const auto& [wp, cp] : p.terms()) t += cq * cp * tau.word_trace(wq.reversed().concat(wp));
    return t;
}

/// <a (x) b, c (x) d>_{tau (x) tau^op} = tau(c* a) tau(b d*), bilinearly.
template <ScalarMode S>
S tensor_pairing(const TensorElem<S>& eta, const TensorElem<S>& zeta, const TraceOracle<S>& tau) {
    S t = scalar_traits<S>::zero();
    for (const auto& [kz, cz] : zeta.terms())
        for (const auto& [ke, ce] : eta.terms()) {
            S left = tau.word_trace(kz.first.reversed().concat(ke.first));
            if (scalar_traits<S>::is_zero(left)) continue;
            t += cz * ce * left * tau.word_trace(ke.second.concat(kz.second.reversed()));
        }
    return t;
}

}  // namespace nct
