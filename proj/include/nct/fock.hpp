#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <mutex>
#include <vector>

#include "nct/structure_array.hpp"
#include "nct/trace.hpp"

namespace nct {

/// Left annihilation action on a basis word:
///   l(e_n)* e_{i_1} (x) ... (x) e_{i_d} =
///     sum_k delta_{n = i_k} q_{n i_1} ... q_{n i_{k-1}} (word with i_k removed).
inline std::vector<std::pair<Word, double>> annihilate(const StructureArray& Q, VarIndex n,
                                                       const Word& w) {
    std::vector<std::pair<Word, double>> out;
    double prefix = 1.0;
    for (int k = 0; k < w.degree(); ++k) {
        VarIndex ik = w[static_cast<std::size_t>(k)];
        if (ik == n) {
            std::vector<VarIndex> ls = w.letters();
            ls.erase(ls.begin() + k);
            out.emplace_back(Word(std::move(ls)), prefix);
        }
        prefix *= Q.q(static_cast<int>(n), static_cast<int>(ik));
        if (prefix == 0.0) break;
    }
    return out;
}

/// Q-inner product of two basis words, by the recursion
/// <e_i (x) xi', eta>_Q = <xi', l(e_i)* eta>_Q with <Omega, Omega> = 1.
/// Vanishes across lengths and across multiset classes.
inline double q_inner(const StructureArray& Q, const Word& a, const Word& b) {
    if (a.degree() != b.degree()) return 0.0;
    if (a.sorted() != b.sorted()) return 0.0;
    if (a.empty()) return 1.0;
    double total = 0.0;
    Word a_rest = a.slice(1, static_cast<std::size_t>(a.degree()));
    for (const auto& [w, c] : annihilate(Q, a[0], b)) total += c * q_inner(Q, a_rest, w);
    return total;
}

/// Words of length d over {1..n_vars} grouped by letter multiset.
struct EquivClass {
    Word representative;        // letters sorted ascending
    std::vector<Word> members;  // all distinct arrangements, lexicographic
};

inline std::vector<EquivClass> equiv_classes(int length, int n_vars) {
    std::vector<EquivClass> classes;
    if (length == 0) {
        classes.push_back({Word{}, {Word{}}});
        return classes;
    }
    // Multisets as non-decreasing tuples.
    std::vector<VarIndex> cur(static_cast<std::size_t>(length), 1);
    while (true) {
        EquivClass cls;
        cls.representative = Word(cur);
        std::vector<VarIndex> perm = cur;
        do {
            cls.members.emplace_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        classes.push_back(std::move(cls));
        int k = length - 1;
        while (k >= 0 && cur[static_cast<std::size_t>(k)] == static_cast<VarIndex>(n_vars)) --k;
        if (k < 0) break;
        VarIndex v = ++cur[static_cast<std::size_t>(k)];
        for (int m = k + 1; m < length; ++m) cur[static_cast<std::size_t>(m)] = v;
    }
    return classes;
}

/// q_n(i_vec) = q_{n i_1} ... q_{n i_d}; constant on equivalence classes.
inline double q_product(const StructureArray& Q, VarIndex n, const Word& w) {
    double p = 1.0;
    for (VarIndex v : w.letters()) p *= Q.q(static_cast<int>(n), static_cast<int>(v));
    return p;
}

/// Gram matrix of a class in the Q-inner product, in member order.
inline Eigen::MatrixXd gram_class(const StructureArray& Q, const EquivClass& cls) {
    const int m = static_cast<int>(cls.members.size());
    Eigen::MatrixXd G(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            double v = q_inner(Q, cls.members[static_cast<std::size_t>(i)],
                               cls.members[static_cast<std::size_t>(j)]);
            G(i, j) = v;
            G(j, i) = v;
        }
    return G;
}

/// Inverse of the class Gram matrix; the structure array must stay away from
/// the degenerate ||q|| -> 1 regime for this to be positive definite.
inline Eigen::MatrixXd gram_inv(const StructureArray& Q, const EquivClass& cls) {
    Eigen::MatrixXd G = gram_class(Q, cls);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw SingularGram("class Gram matrix is not positive definite");
    return llt.solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
}

/// Truncated Fock-space representation: all words of length <= depth over
/// n_vars generators, with sparse matrices for l_i, l_i^* (the Q-adjoint,
/// from the explicit annihilation action), r_i, and X_i^Q = l_i + l_i^*.
/// Creation out of the top level is dropped; identities that pass through
/// level depth+1 hold only on the retained levels below.
///
/// Truncation-exactness: a product of d generators applied to Omega never
/// leaves level d, so every moment of degree <= depth is exact.
class FockRep {
public:
    FockRep(StructureArray Q, int n_vars, int depth, std::size_t basis_cap = 200000)
        : Q_(std::move(Q)), n_vars_(n_vars), depth_(depth) {
        std::size_t dim = 0, level = 1;
        level_offset_.assign(static_cast<std::size_t>(depth) + 2, 0);
        for (int d = 0; d <= depth; ++d) {
            level_offset_[static_cast<std::size_t>(d)] = dim;
            dim += level;
            if (dim > basis_cap)
                throw BasisTooLarge("Fock basis exceeds cap of " + std::to_string(basis_cap));
            level *= static_cast<std::size_t>(n_vars);
        }
        level_offset_[static_cast<std::size_t>(depth) + 1] = dim;
        dim_ = dim;
        build_operators();
    }

    const StructureArray& structure() const { return Q_; }
    int n_vars() const { return n_vars_; }
    int depth() const { return depth_; }
    std::size_t dim() const { return dim_; }

    std::size_t level_offset(int level) const { return level_offset_[static_cast<std::size_t>(level)]; }
    std::size_t level_size(int level) const {
        return level_offset_[static_cast<std::size_t>(level) + 1] - level_offset_[static_cast<std::size_t>(level)];
    }

    /// Flat index of a basis word (level offsets plus base-n ranking).
    std::size_t index_of(const Word& w) const {
        std::size_t rank = 0;
        for (VarIndex v : w.letters()) rank = rank * static_cast<std::size_t>(n_vars_) + (v - 1);
        return level_offset_[static_cast<std::size_t>(w.degree())] + rank;
    }

    Word word_at(std::size_t idx) const {
        int level = 0;
        while (level_offset_[static_cast<std::size_t>(level) + 1] <= idx) ++level;
        std::size_t rank = idx - level_offset_[static_cast<std::size_t>(level)];
        std::vector<VarIndex> ls(static_cast<std::size_t>(level));
        for (int k = level - 1; k >= 0; --k) {
            ls[static_cast<std::size_t>(k)] = static_cast<VarIndex>(rank % static_cast<std::size_t>(n_vars_)) + 1;
            rank /= static_cast<std::size_t>(n_vars_);
        }
        return Word(std::move(ls));
    }

    const Eigen::SparseMatrix<double>& l(int i) const { return l_[static_cast<std::size_t>(i - 1)]; }
    const Eigen::SparseMatrix<double>& lstar(int i) const { return lstar_[static_cast<std::size_t>(i - 1)]; }
    const Eigen::SparseMatrix<double>& r(int i) const { return r_[static_cast<std::size_t>(i - 1)]; }
    const Eigen::SparseMatrix<double>& X(int i) const { return X_[static_cast<std::size_t>(i - 1)]; }

    Eigen::VectorXd vacuum() const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
        v(0) = 1.0;
        return v;
    }

    /// X_{w_1} ... X_{w_d} v, applied right to left.
    Eigen::VectorXd apply_word(const Word& w, Eigen::VectorXd v) const {
        for (int k = w.degree() - 1; k >= 0; --k) v = X(static_cast<int>(w[static_cast<std::size_t>(k)])) * v;
        return v;
    }

    Eigen::VectorXd apply_series_to_vacuum(const Series<double>& s) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
        for (const auto& [w, c] : s.terms()) out += c * apply_word(w, vacuum());
        return out;
    }

    /// tau_Q on a monomial: the vacuum component of the word applied to Omega.
    double trace_word(const Word& w) const {
        if (w.degree() > depth_)
            throw DegreeExceedsDepth("moment of degree " + std::to_string(w.degree()) +
                                     " exceeds Fock depth " + std::to_string(depth_));
        return apply_word(w, vacuum())(0);
    }

    double trace(const Series<double>& s) const {
        double t = 0.0;
        for (const auto& [w, c] : s.terms()) t += c * trace_word(w);
        return t;
    }

    /// Per-level Gram matrix of the Q-inner product, built bottom-up via the
    /// annihilation recursion; computed lazily and cached.
    const Eigen::MatrixXd& gram(int level) const {
        std::scoped_lock lock(gram_mutex_);
        for (int d = 0; d <= level; ++d) {
            if (gram_.count(d)) continue;
            gram_.emplace(d, build_gram_level(d));
        }
        return gram_.at(level);
    }

    /// <a, b>_Q of two coefficient vectors (levels are orthogonal).
    double q_pairing(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        double t = 0.0;
        for (int d = 0; d <= depth_; ++d) {
            const auto off = static_cast<Eigen::Index>(level_offset(d));
            const auto sz = static_cast<Eigen::Index>(level_size(d));
            t += b.segment(off, sz).dot(gram(d) * a.segment(off, sz));
        }
        return t;
    }

    /// Full block-diagonal Gram of the retained basis.
    Eigen::MatrixXd gram_full() const {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_),
                                                  static_cast<Eigen::Index>(dim_));
        for (int d = 0; d <= depth_; ++d) {
            const auto off = static_cast<Eigen::Index>(level_offset(d));
            const auto sz = static_cast<Eigen::Index>(level_size(d));
            G.block(off, off, sz, sz) = gram(d);
        }
        return G;
    }

    /// The Hilbert-Schmidt operator of a tensor element under the standard
    /// identification a (x) b -> < . , b* Omega>_Q a Omega, as a matrix acting
    /// on basis coordinates.
    Eigen::MatrixXd tensor_to_hs_matrix(const TensorElem<double>& eta) const {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_),
                                                  static_cast<Eigen::Index>(dim_));
        Eigen::MatrixXd G = gram_full();
        for (const auto& [k, c] : eta.terms()) {
            Eigen::VectorXd u = apply_word(k.first, vacuum());
            Eigen::VectorXd v = apply_word(k.second.reversed(), vacuum());
            M += c * u * (G * v).transpose();
        }
        return M;
    }

private:
    Eigen::MatrixXd build_gram_level(int level) const {
        if (level == 0) return Eigen::MatrixXd::Ones(1, 1);
        const Eigen::MatrixXd& prev = gram_.at(level - 1);
        const std::size_t sz = level_size(level), off = level_offset(level);
        const std::size_t off_prev = level_offset(level - 1);
        Eigen::MatrixXd G =
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sz), static_cast<Eigen::Index>(sz));
        std::vector<Word> words(sz), sorted_words(sz);
        for (std::size_t k = 0; k < sz; ++k) {
            words[k] = word_at(off + k);
            sorted_words[k] = words[k].sorted();
        }
        for (std::size_t a = 0; a < sz; ++a) {
            Word a_rest = words[a].slice(1, static_cast<std::size_t>(level));
            std::size_t a_rest_idx = index_of(a_rest) - off_prev;
            for (std::size_t b = a; b < sz; ++b) {
                if (sorted_words[a] != sorted_words[b]) continue;
                double v = 0.0;
                for (const auto& [w, c] : annihilate(Q_, words[a][0], words[b]))
                    v += c * prev(static_cast<Eigen::Index>(a_rest_idx),
                                  static_cast<Eigen::Index>(index_of(w) - off_prev));
                G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
                G(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
            }
        }
        return G;
    }

    void build_operators() {
        using Trip = Eigen::Triplet<double>;
        l_.resize(static_cast<std::size_t>(n_vars_));
        lstar_.resize(static_cast<std::size_t>(n_vars_));
        r_.resize(static_cast<std::size_t>(n_vars_));
        X_.resize(static_cast<std::size_t>(n_vars_));
        for (int i = 1; i <= n_vars_; ++i) {
            std::vector<Trip> tl, tls, tr;
            for (std::size_t col = 0; col < dim_; ++col) {
                Word w = word_at(col);
                if (w.degree() < depth_) {
                    std::vector<VarIndex> created{static_cast<VarIndex>(i)};
                    created.insert(created.end(), w.letters().begin(), w.letters().end());
                    tl.emplace_back(static_cast<int>(index_of(Word(std::move(created)))),
                                    static_cast<int>(col), 1.0);
                    std::vector<VarIndex> appended = w.letters();
                    appended.push_back(static_cast<VarIndex>(i));
                    tr.emplace_back(static_cast<int>(index_of(Word(std::move(appended)))),
                                    static_cast<int>(col), 1.0);
                }
                for (const auto& [wa, c] : annihilate(Q_, static_cast<VarIndex>(i), w))
                    tls.emplace_back(static_cast<int>(index_of(wa)), static_cast<int>(col), c);
            }
            auto& L = l_[static_cast<std::size_t>(i - 1)];
            auto& Ls = lstar_[static_cast<std::size_t>(i - 1)];
            auto& R = r_[static_cast<std::size_t>(i - 1)];
            L.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
            Ls.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
            R.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
            L.setFromTriplets(tl.begin(), tl.end());
            Ls.setFromTriplets(tls.begin(), tls.end());
            R.setFromTriplets(tr.begin(), tr.end());
            X_[static_cast<std::size_t>(i - 1)] = L + Ls;
        }
    }

    StructureArray Q_;
    int n_vars_;
    int depth_;
    std::size_t dim_ = 0;
    std::vector<std::size_t> level_offset_;
    std::vector<Eigen::SparseMatrix<double>> l_, lstar_, r_, X_;
    mutable std::map<int, Eigen::MatrixXd> gram_;
    mutable std::mutex gram_mutex_;
};

/// Trace oracle backed by a truncated Fock representation. Moments of degree
/// <= depth are exact; deeper queries throw.
class FockOracle final : public TraceOracle<double> {
public:
    explicit FockOracle(const FockRep& rep) : rep_(&rep) {}
    double word_trace(const Word& w) const override { return rep_->trace_word(w); }

private:
    const FockRep* rep_;
};

/// Matrix-free twin of the Fock trace: applies the word to the vacuum keeping
/// the state as a sparse word->coefficient map, so no basis is materialized
/// and there is no depth cap. Memoized per word.
class QMomentOracle final : public TraceOracle<double> {
public:
    explicit QMomentOracle(const StructureArray& Q) : Q_(&Q) {}

    double word_trace(const Word& w) const override {
        if (w.degree() % 2 != 0) return 0.0;  // creation/annihilation parity
        std::scoped_lock lock(mutex_);
        auto it = memo_.find(w);
        if (it != memo_.end()) return it->second;
        std::map<Word, double> state{{Word{}, 1.0}};
        for (int k = w.degree() - 1; k >= 0; --k) {
            VarIndex n = w[static_cast<std::size_t>(k)];
            std::map<Word, double> next;
            for (const auto& [s, c] : state) {
                std::vector<VarIndex> created{n};
                created.insert(created.end(), s.letters().begin(), s.letters().end());
                next[Word(std::move(created))] += c;
                for (const auto& [sa, ca] : annihilate(*Q_, n, s)) next[sa] += c * ca;
            }
            state = std::move(next);
        }
        auto vac = state.find(Word{});
        double t = vac == state.end() ? 0.0 : vac->second;
        memo_.emplace(w, t);
        return t;
    }

private:
    const StructureArray* Q_;
    mutable std::map<Word, double> memo_;
    mutable std::mutex mutex_;
};

/// Builds Wick words by the recursion W(e_i (x) xi) = T_i W(xi) - W(l_i* xi),
/// W(Omega) = 1; the unique elements with W(e_vec)(X^Q) Omega = e_vec.
class WickCache {
public:
    explicit WickCache(const StructureArray& Q) : Q_(&Q) {}

    const Series<double>& get(const Word& w) {
        auto it = memo_.find(w);
        if (it != memo_.end()) return it->second;
        Series<double> s;
        if (w.empty()) {
            s = Series<double>::one();
        } else {
            Word rest = w.slice(1, static_cast<std::size_t>(w.degree()));
            s = mul(Series<double>::generator(w[0]), get(rest));
            for (const auto& [wa, c] : annihilate(*Q_, w[0], rest)) s -= c * get(wa);
        }
        return memo_.emplace(w, std::move(s)).first->second;
    }

private:
    const StructureArray* Q_;
    std::map<Word, Series<double>> memo_;
};

inline Series<double> wick(const StructureArray& Q, const Word& w) {
    WickCache cache(Q);
    return cache.get(w);
}

/// The operator Xi_n = sum over classes of q_n(class) times the projection
/// onto the class subspace. Each basis word spans into exactly one class, so
/// the matrix is diagonal with entry q_n(word).
inline Eigen::MatrixXd xi_operator(const FockRep& rep, VarIndex n) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rep.dim()),
                                              static_cast<Eigen::Index>(rep.dim()));
    for (std::size_t k = 0; k < rep.dim(); ++k)
        M(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) =
            q_product(rep.structure(), n, rep.word_at(k));
    return M;
}

/// Truncated Hilbert-Schmidt norm of Xi_n: the exact partial geometric sum
/// sqrt(sum_{d <= depth} Q_n(2)^d) over the retained variable window.
inline double xi_hs_norm(const FockRep& rep, VarIndex n) {
    double qn2 = rep.structure().Qn_window(static_cast<int>(n), 2.0, rep.n_vars());
    double s = 0.0, p = 1.0;
    for (int d = 0; d <= rep.depth(); ++d) {
        s += p;
        p *= qn2;
    }
    return std::sqrt(s);
}

}  // namespace nct
