#pragma once

#include <set>

#include "nct/tensor.hpp"

namespace nct {

/// Finitely supported matrix over the tensor algebra: the computational
/// stand-in for the M_1 / M_infty matrix algebras. Rows and columns are
/// variable indices.
template <ScalarMode S>
class MatTensor {
public:
    using Key = std::pair<VarIndex, VarIndex>;
    using Entries = std::map<Key, TensorElem<S>>;

    MatTensor() = default;

    static MatTensor identity_on(const std::set<VarIndex>& idx) {
        MatTensor m;
        for (VarIndex i : idx) m.set(i, i, TensorElem<S>::one());
        return m;
    }

    const Entries& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }

    const TensorElem<S>& at(VarIndex i, VarIndex j) const {
        static const TensorElem<S> kZero;
        auto it = entries_.find(Key(i, j));
        return it == entries_.end() ? kZero : it->second;
    }

    void set(VarIndex i, VarIndex j, TensorElem<S> t) {
        if (t.is_zero())
            entries_.erase(Key(i, j));
        else
            entries_[Key(i, j)] = std::move(t);
    }

    void add(VarIndex i, VarIndex j, const TensorElem<S>& t) { set(i, j, at(i, j) + t); }

    std::set<VarIndex> index_set() const {
        std::set<VarIndex> s;
        for (const auto& [k, t] : entries_) {
            s.insert(k.first);
            s.insert(k.second);
        }
        return s;
    }

    MatTensor& operator+=(const MatTensor& o) {
        for (const auto& [k, t] : o.entries_) add(k.first, k.second, t);
        return *this;
    }

    MatTensor& operator-=(const MatTensor& o) {
        for (const auto& [k, t] : o.entries_) add(k.first, k.second, -t);
        return *this;
    }

    friend MatTensor operator+(MatTensor a, const MatTensor& b) { return a += b; }
    friend MatTensor operator-(MatTensor a, const MatTensor& b) { return a -= b; }

    friend MatTensor operator*(const S& c, const MatTensor& a) {
        MatTensor r;
        for (const auto& [k, t] : a.entries_) r.set(k.first, k.second, c * t);
        return r;
    }

    bool operator==(const MatTensor& o) const { return entries_ == o.entries_; }

private:
    Entries entries_;
};

/// [GH](i,j) = sum_k G(i,k) # H(k,j).
template <ScalarMode S>
MatTensor<S> mat_mul(const MatTensor<S>& G, const MatTensor<S>& H,
                     std::optional<int> cap = std::nullopt, TruncationLog* log = nullptr) {
    MatTensor<S> r;
    for (const auto& [kg, tg] : G.entries())
        for (const auto& [kh, th] : H.entries())
            if (kg.second == kh.first) r.add(kg.first, kh.second, tensor_mul(tg, th, cap, log));
    return r;
}

/// Marker for the (infty, 1) matrix norm in mat_norm's p argument.
inline constexpr int mat_p_inf = 0;

/// p = 1: sum over all entries, the || . ||_{R,1,1} norm; p = mat_p_inf:
/// sup_i sum_j, the || . ||_{R,infty,1} norm. Upper bounds via tnorm_upper.
template <ScalarMode S>
double mat_norm(const MatTensor<S>& H, double R, int p) {
    std::map<VarIndex, double> row_sums;
    for (const auto& [k, t] : H.entries()) row_sums[k.first] += tnorm_upper(t, R);
    double n = 0.0;
    for (const auto& [i, v] : row_sums) n = (p == 1) ? n + v : std::max(n, v);
    return n;
}

template <ScalarMode S>
TensorElem<S> mat_trace(const MatTensor<S>& H) {
    TensorElem<S> t;
    for (const auto& [k, e] : H.entries())
        if (k.first == k.second) t += e;
    return t;
}

/// [H*](i,j) = H(j,i)*.
template <ScalarMode S>
MatTensor<S> mat_star(const MatTensor<S>& H) {
    MatTensor<S> r;
    for (const auto& [k, t] : H.entries()) r.set(k.second, k.first, invol_star(t));
    return r;
}

/// [H^dagger](i,j) = H(i,j)^dagger (entrywise).
template <ScalarMode S>
MatTensor<S> mat_dagger(const MatTensor<S>& H) {
    MatTensor<S> r;
    for (const auto& [k, t] : H.entries()) r.set(k.first, k.second, invol_dagger(t));
    return r;
}

/// [H^diamond](i,j) = H(j,i)^diamond.
template <ScalarMode S>
MatTensor<S> mat_diamond(const MatTensor<S>& H) {
    MatTensor<S> r;
    for (const auto& [k, t] : H.entries()) r.set(k.second, k.first, invol_diamond(t));
    return r;
}

/// (H # P)_i = sum_j H(i,j) # P_j.
template <ScalarMode S>
SeriesSeq<S> mat_apply(const MatTensor<S>& H, const SeriesSeq<S>& P,
                       std::optional<int> cap = std::nullopt, TruncationLog* log = nullptr) {
    SeriesSeq<S> r{.entries = {}, .kind = P.kind};
    for (const auto& [k, t] : H.entries()) {
        if (!P.has(k.second)) continue;
        r.set(k.first, r.at(k.first) + hash_apply(t, P.at(k.second), cap, log));
    }
    return r;
}

/// H applied to the generator sequence itself: (H # X)_i = sum_j H(i,j) # X_j.
/// Kept separate because the full sequence X is not finitely supported.
template <ScalarMode S>
SeriesSeq<S> mat_apply_generators(const MatTensor<S>& H, std::optional<int> cap = std::nullopt) {
    SeriesSeq<S> r{.entries = {}, .kind = SeqKind::L1};
    for (const auto& [k, t] : H.entries())
        r.set(k.first, r.at(k.first) + hash_apply(t, Series<S>::generator(k.second), cap));
    return r;
}

/// (H # eta)_i = sum_j H(i,j) # eta_j for a vector of tensor elements.
template <ScalarMode S>
std::map<VarIndex, TensorElem<S>> mat_apply_tensors(const MatTensor<S>& H,
                                                    const std::map<VarIndex, TensorElem<S>>& eta) {
    std::map<VarIndex, TensorElem<S>> r;
    for (const auto& [k, t] : H.entries()) {
        auto it = eta.find(k.second);
        if (it == eta.end()) continue;
        auto [rit, ins] = r.emplace(k.first, tensor_mul(t, it->second));
        if (!ins) rit->second += tensor_mul(t, it->second);
    }
    return r;
}

enum class AnalyticKind { Log1p, NeumannInv, XiOver1p, SqOver1p };

template <ScalarMode S>
struct AnalyticResult {
    MatTensor<S> value;
    double tail_bound = 0.0;
};

/// Truncated power series of log(1+H), (1+H)^{-1}, H/(1+H) or H^2/(1+H) with
/// m_max terms, plus the geometric bound on the dropped terms measured in the
/// || . ||_{R,1,1} norm. Requires that norm of H to be < 1. The identity term
/// of (1+H)^{-1} is placed on `identity_support` (H's own index set when empty).
template <ScalarMode S>
AnalyticResult<S> mat_analytic(const MatTensor<S>& H, AnalyticKind kind, int m_max, double R,
                               std::optional<int> cap = std::nullopt,
                               std::set<VarIndex> identity_support = {}) {
    double r = mat_norm(H, R, 1);
    if (r >= 1.0)
        throw NormTooLarge("mat_analytic requires ||H||_{R,1,1} < 1, got " + std::to_string(r));

    MatTensor<S> out;
    if (kind == AnalyticKind::NeumannInv) {
        if (identity_support.empty()) identity_support = H.index_set();
        out = MatTensor<S>::identity_on(identity_support);
    }

    MatTensor<S> power = H;
    for (int m = 1; m <= m_max; ++m) {
        S coeff = scalar_traits<S>::zero();
        switch (kind) {
            case AnalyticKind::Log1p:
                coeff = scalar_traits<S>::ratio(m % 2 == 1 ? 1 : -1, m);
                break;
            case AnalyticKind::NeumannInv:
                coeff = scalar_traits<S>::from_int(m % 2 == 1 ? -1 : 1);
                break;
            case AnalyticKind::XiOver1p:
                coeff = scalar_traits<S>::from_int(m % 2 == 1 ? 1 : -1);
                break;
            case AnalyticKind::SqOver1p:
                if (m >= 2) coeff = scalar_traits<S>::from_int(m % 2 == 0 ? 1 : -1);
                break;
        }
        if (!scalar_traits<S>::is_zero(coeff)) out += coeff * power;
        if (m < m_max) power = mat_mul(power, H, cap);
    }

    double tail = std::pow(r, m_max + 1) / (1.0 - r);
    if (kind == AnalyticKind::Log1p) tail /= static_cast<double>(m_max + 1);
    return {std::move(out), tail};
}

}  // namespace nct
