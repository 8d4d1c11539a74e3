#pragma once

#include "nct/fock.hpp"
#include "nct/transport.hpp"

namespace nct {

/// pi(Q, n, R) = [(R(1-q_inf)+1) Q_n(1/2)]^2 / ((1-2 q_inf)^2 - [...]^2).
/// Returns +infinity when the denominator is not positive (the certificate
/// conveys failure through the infinite marker rather than an error).
inline double pi_bound(const StructureArray& Q, int n, double R) {
    double qi = Q.q_inf();
    double a = (R * (1.0 - qi) + 1.0) * Q.Qn(n, 0.5);
    if (std::isinf(a)) return std::numeric_limits<double>::infinity();
    double denom = (1.0 - 2.0 * qi) * (1.0 - 2.0 * qi) - a * a;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return a * a / denom;
}

struct MixedQParams {
    int d_max = 3;           // class levels retained in Xi_n(T)
    int m_max = 8;           // Neumann terms for the tensor inverse
    int degree_cap = 14;     // degree cap for tensor/series work
    int window = 0;          // variable window; 0 = automatic
    double window_tol = 1e-12;
    double invert_residual_tol = 1e-8;
    double prune_tol = 1e-16;  // coefficients below this are dropped in tensor work
};

/// Pick the variable window: all nonzero rows for finite kinds; for the
/// geometric kind, enough columns that the dropped per-level mass bound stays
/// below tol (it decays like |q|^{window}).
inline int choose_window(const StructureArray& Q, int n, double R, int d_max, double tol,
                         int requested) {
    if (requested > 0) return requested;
    if (!Q.is_infinite()) return std::max(Q.finite_size(), 1);
    double qi = Q.q_inf();
    double factor = (R * (1.0 - qi) + 1.0) / (1.0 - 2.0 * qi);
    for (int w = 2; w <= 48; ++w) {
        double dropped = 0.0;
        for (int d = 1; d <= d_max; ++d) {
            double full = std::pow(factor * Q.Qn(n, 0.5), 2 * d);
            double win = std::pow(factor * Q.Qn_window(n, 0.5, w), 2 * d);
            dropped += std::max(0.0, full - win);
        }
        if (dropped <= tol) return w;
    }
    throw WindowTooSmall("variable window cannot reach the requested tail tolerance");
}

/// Xi_n as a tensor series over the retained classes:
///   Xi_n(T) = sum_{d <= d_max} sum_{[j]} q_n(j) sum_{k,l in [j]}
///             (G_[j]^{-1})_{l k} psi_k(T) (x) psi_l(T)*,
/// with the level tail bounded by the geometric estimate
/// rho^d, rho = [(R(1-q_inf)+1) Q_n(1/2) / (1-2 q_inf)]^2.
struct XiSeries {
    VarIndex n = 0;
    TensorElem<double> value;
    double tail_bound = 0.0;    // levels d > d_max
    double window_tail = 0.0;   // variables beyond the window, levels <= d_max
    int d_max = 0;
    int window = 0;
};

inline XiSeries xi_series(const StructureArray& Q, VarIndex n, int d_max, double R,
                          const MixedQParams& params = {}) {
    XiSeries out;
    out.n = n;
    out.d_max = d_max;
    out.window = choose_window(Q, static_cast<int>(n), R, d_max, params.window_tol, params.window);

    WickCache wick_cache(Q);
    for (int d = 0; d <= d_max; ++d) {
        for (const EquivClass& cls : equiv_classes(d, out.window)) {
            double qn = q_product(Q, n, cls.representative);
            if (std::fabs(qn) < params.prune_tol || qn == 0.0) continue;
            Eigen::MatrixXd Ginv = gram_inv(Q, cls);
            const auto m = static_cast<Eigen::Index>(cls.members.size());
            std::vector<Series<double>> psi, psi_star;
            psi.reserve(cls.members.size());
            for (const Word& w : cls.members) {
                psi.push_back(wick_cache.get(w));
                psi_star.push_back(star(psi.back()));
            }
            for (Eigen::Index k = 0; k < m; ++k)
                for (Eigen::Index l = 0; l < m; ++l) {
                    double weight = qn * Ginv(l, k);
                    if (weight == 0.0) continue;
                    out.value += weight * tensor_of(psi[static_cast<std::size_t>(k)],
                                                    psi_star[static_cast<std::size_t>(l)]);
                }
        }
    }

    double qi = Q.q_inf();
    double rho_full = std::pow((R * (1.0 - qi) + 1.0) * Q.Qn(static_cast<int>(n), 0.5) /
                                   (1.0 - 2.0 * qi),
                               2.0);
    out.tail_bound = (rho_full < 1.0)
                         ? std::pow(rho_full, d_max + 1) / (1.0 - rho_full)
                         : std::numeric_limits<double>::infinity();
    if (Q.is_infinite()) {
        double factor = (R * (1.0 - qi) + 1.0) / (1.0 - 2.0 * qi);
        for (int d = 1; d <= d_max; ++d) {
            double full = std::pow(factor * Q.Qn(static_cast<int>(n), 0.5), 2 * d);
            double win = std::pow(factor * Q.Qn_window(static_cast<int>(n), 0.5, out.window), 2 * d);
            out.window_tail += std::max(0.0, full - win);
        }
        if (!(out.window_tail <= params.window_tol))
            throw WindowTooSmall("window-truncation tail " + std::to_string(out.window_tail) +
                                 " exceeds tolerance");
    }
    return out;
}

/// The n-th conjugate variable as a power series in the indeterminates,
///   xi_n(T) = eta # T_n - m (1 (x) tau (x) 1)(1 (x) d^Q + d^Q (x) 1)(eta),
/// with eta = (Xi_n(T)^{-1})^* (Neumann series) and d^Q = diff(.) # Xi_n(T).
/// Partial traces are evaluated with the exact matrix-free Fock trace.
struct ConjugateSeries {
    VarIndex n = 0;
    Series<double> xi;            // xi_n(T)
    double pi = 0.0;              // pi(Q, n, R); may be +infinity
    double perturbation_bound = 0.0;  // Prop-5.4(ii)-style bound on ||xi_n - T_n||_R
    double xi_tensor_tail = 0.0;      // level tail of the Xi_n(T) truncation
    double neumann_residual = 0.0;    // tnorm of Xi(T) # inverse - 1 at R = 1
    XiSeries xi_tensor;
};

inline ConjugateSeries conjugate_series(const StructureArray& Q, VarIndex n, double R,
                                        const MixedQParams& params = {}) {
    ConjugateSeries out;
    out.n = n;
    out.pi = pi_bound(Q, static_cast<int>(n), R);
    out.xi_tensor = xi_series(Q, n, params.d_max, R, params);
    out.xi_tensor_tail = out.xi_tensor.tail_bound;
    const TensorElem<double>& xi_t = out.xi_tensor.value;
    const int cap = params.degree_cap;

    // Neumann inverse of Xi_n(T) = 1 (x) 1 - D in the # algebra.
    TensorElem<double> D = TensorElem<double>::one() - xi_t;
    TensorElem<double> inv = TensorElem<double>::one();
    TensorElem<double> power = D;
    power.set_degree_cap(cap);
    for (int m = 1; m <= params.m_max; ++m) {
        inv += power;
        if (m < params.m_max) power = pruned(tensor_mul(power, D, cap), params.prune_tol);
    }
    inv = pruned(inv, params.prune_tol);
    out.neumann_residual = tnorm_upper(tensor_mul(xi_t, inv, cap) - TensorElem<double>::one(), 1.0);
    if (out.pi >= 1.0 && out.neumann_residual > params.invert_residual_tol)
        throw PreconditionFailed("Xi_n(T) is not invertible at this truncation (pi >= 1 and "
                                 "Neumann residual " +
                                 std::to_string(out.neumann_residual) + ")");

    TensorElem<double> eta = invol_star(inv);
    QMomentOracle tau(Q);

    Series<double> P = hash_apply(eta, Series<double>::generator(n));
    std::map<Word, Series<double>> traced_right, traced_left;
    for (const auto& [k, c] : eta.terms()) {
        auto [itu, newu] = traced_right.try_emplace(k.first);
        if (newu)
            itu->second = partial_trace_right(tensor_mul(diff_word<double>(k.first, n), xi_t), tau);
        for (const auto& [w, cw] : itu->second.terms()) P.add_term(w.concat(k.second), -(c * cw));

        auto [itv, newv] = traced_left.try_emplace(k.second);
        if (newv)
            itv->second = partial_trace_left(tensor_mul(diff_word<double>(k.second, n), xi_t), tau);
        for (const auto& [w, cw] : itv->second.terms()) P.add_term(k.first.concat(w), -(c * cw));
    }
    out.xi = std::move(P);

    double sup_x = Q.sup_Xnorm_bound();
    if (out.pi < 1.0 && R > sup_x) {
        double xi_norm = tnorm_upper(xi_t, R) + out.xi_tensor_tail;
        out.perturbation_bound = (R + 2.0 * xi_norm / (R - sup_x)) * out.pi / (1.0 - out.pi);
    } else {
        out.perturbation_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

/// The perturbation potential of the mixed q-Gaussian law:
///   W = Sigma( (1/2) sum_n X_n (xi_n - X_n) + (xi_n - X_n) X_n ),
/// self-adjoint with zero constant term and cyclic derivatives xi_n - T_n up
/// to the reported truncation deviation.
struct Perturbation {
    Series<double> W;
    std::vector<ConjugateSeries> per_n;
    double dW_residual = 0.0;   // max coefficient deviation of D_n W - (xi_n - T_n)
    double tail = 0.0;          // accumulated xi-series tails feeding the residual
    double norm_bound = 0.0;    // (1/2) R (R + 4/(R - sup||X||)) sum pi/(1-pi); may be inf
    double sum_pi_ratio = 0.0;
};

inline Perturbation build_W(const StructureArray& Q, double R, const MixedQParams& params = {}) {
    Perturbation out;
    int window = choose_window(Q, 1, R, params.d_max, params.window_tol, params.window);
    Series<double> w_raw;
    for (int n = 1; n <= window; ++n) {
        ConjugateSeries cs = conjugate_series(Q, static_cast<VarIndex>(n), R, params);
        Series<double> delta = cs.xi - Series<double>::generator(static_cast<VarIndex>(n));
        Series<double> xn = Series<double>::generator(static_cast<VarIndex>(n));
        w_raw += scalar_traits<double>::ratio(1, 2) * (mul(xn, delta) + mul(delta, xn));
        out.tail += cs.xi_tensor_tail + cs.xi_tensor.window_tail;
        double ratio = cs.pi < 1.0 ? cs.pi / (1.0 - cs.pi) : std::numeric_limits<double>::infinity();
        out.sum_pi_ratio += ratio;
        out.per_n.push_back(std::move(cs));
    }
    out.W = sigma(w_raw);
    for (const ConjugateSeries& cs : out.per_n) {
        Series<double> delta = cs.xi - Series<double>::generator(cs.n);
        out.dW_residual = std::max(out.dW_residual,
                                   max_coeff_delta(cyc_diff(out.W, cs.n), delta));
    }
    double sup_x = Q.sup_Xnorm_bound();
    out.norm_bound = R > sup_x
                         ? 0.5 * R * (R + 4.0 / (R - sup_x)) * out.sum_pi_ratio
                         : std::numeric_limits<double>::infinity();
    return out;
}

/// One row of the isomorphism report plus the aggregate verdict of the
/// criterion: 0 < pi(Q,n,R) < 1 for all n and
///   sum_n pi/(1-pi) < e log(R/5) / (R (R + 4/(R - sup_n ||X_n^Q||))).
struct IsoRow {
    int n = 0;
    double pi = 0.0;
    double ratio = 0.0;  // pi / (1 - pi)
};

struct IsoReport {
    double R = 0.0;
    std::vector<IsoRow> rows;
    double sum = 0.0;        // over reported rows
    double tail = 0.0;       // analytic bound over the remaining rows
    double threshold = 0.0;
    double sup_norm_bound = 0.0;
    double margin = 0.0;     // threshold - (sum + tail)
    bool pass = false;
};

inline IsoReport check_iso(const StructureArray& Q, double R) {
    if (!(R > 5.0)) throw DomainError("check_iso requires R > 5");
    IsoReport rep;
    rep.R = R;
    rep.sup_norm_bound = Q.sup_Xnorm_bound();
    rep.threshold = std::exp(1.0) * std::log(R / 5.0) /
                    (R * (R + 4.0 / (R - rep.sup_norm_bound)));

    int report_rows = Q.is_infinite() ? 8 : std::max(Q.finite_size(), 1);
    bool all_pi_ok = true;
    for (int n = 1; n <= report_rows; ++n) {
        IsoRow row;
        row.n = n;
        row.pi = pi_bound(Q, n, R);
        row.ratio = row.pi < 1.0 ? row.pi / (1.0 - row.pi) : std::numeric_limits<double>::infinity();
        if (!(row.pi < 1.0)) all_pi_ok = false;
        rep.sum += row.ratio;
        rep.rows.push_back(row);
    }

    if (Q.is_infinite() && all_pi_ok) {
        // Rows beyond the report window, bounded by pi_n <= c Q_n(1/2)^2 with the
        // constants frozen at the first dropped row (pi_n is non-increasing there).
        int N = report_rows;
        double qi = Q.q_inf();
        double a_next = (R * (1.0 - qi) + 1.0) * Q.Qn(N + 1, 0.5);
        double denom = (1.0 - 2.0 * qi) * (1.0 - 2.0 * qi) - a_next * a_next;
        double pi_next = pi_bound(Q, N + 1, R);
        if (denom > 0.0 && pi_next < 1.0) {
            double c = (R * (1.0 - qi) + 1.0) * (R * (1.0 - qi) + 1.0) / denom;
            rep.tail = c * Q.sum_Qn_half_sq_tail(N) / (1.0 - pi_next);
        } else {
            rep.tail = std::numeric_limits<double>::infinity();
            all_pi_ok = false;
        }
    }

    rep.margin = rep.threshold - (rep.sum + rep.tail);
    rep.pass = all_pi_ok && rep.sum + rep.tail < rep.threshold;
    return rep;
}

}  // namespace nct
