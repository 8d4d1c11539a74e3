#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "nct/errors.hpp"
#include "nct/word.hpp"

namespace nct {

/// The symmetric array Q = (q_ij) of deformation parameters, either an
/// explicit finite matrix or formula-generated (constant q_ij = q, geometric
/// q_ij = q^{i+j-1}). Formula kinds carry analytic tail sums so that the
/// infinite index set never has to be enumerated.
class StructureArray {
public:
    enum class Kind { Explicit, Constant, Geometric };

    static StructureArray make_explicit(std::vector<std::vector<double>> m) {
        StructureArray a;
        a.kind_ = Kind::Explicit;
        a.size_ = static_cast<int>(m.size());
        for (int i = 0; i < a.size_; ++i) {
            if (static_cast<int>(m[i].size()) != a.size_)
                throw DomainError("structure array matrix must be square");
            for (int j = 0; j < a.size_; ++j) {
                if (std::fabs(m[i][j]) >= 1.0) throw DomainError("structure array needs |q_ij| < 1");
                if (m[i][j] != m[j][i]) throw DomainError("structure array must be symmetric");
            }
        }
        a.matrix_ = std::move(m);
        return a;
    }

    /// q_ij = q everywhere. With n_vars > 0 the array is the finite n x n
    /// block (all other entries zero); with n_vars = 0 it is the infinite
    /// constant array, whose row sums Q_n(p) diverge unless q = 0.
    static StructureArray make_constant(double q, int n_vars = 0) {
        if (std::fabs(q) >= 1.0) throw DomainError("structure array needs |q| < 1");
        StructureArray a;
        a.kind_ = Kind::Constant;
        a.q_ = q;
        a.size_ = n_vars;
        return a;
    }

    static StructureArray make_geometric(double q) {
        if (std::fabs(q) >= 1.0) throw DomainError("structure array needs |q| < 1");
        StructureArray a;
        a.kind_ = Kind::Geometric;
        a.q_ = q;
        return a;
    }

    Kind kind() const { return kind_; }
    double q_param() const { return q_; }

    /// Nonzero-row count for finite kinds; 0 means infinitely many rows.
    int finite_size() const { return size_; }
    bool is_infinite() const { return size_ == 0 && kind_ != Kind::Explicit; }

    /// 1-based entry access.
    double q(int i, int j) const {
        switch (kind_) {
            case Kind::Explicit:
                return (i <= size_ && j <= size_) ? matrix_[i - 1][j - 1] : 0.0;
            case Kind::Constant:
                if (size_ > 0 && (i > size_ || j > size_)) return 0.0;
                return q_;
            case Kind::Geometric: {
                double mag = std::pow(std::fabs(q_), i + j - 1);
                return (q_ < 0.0 && (i + j - 1) % 2 == 1) ? -mag : mag;
            }
        }
        return 0.0;
    }

    double q_inf() const {
        switch (kind_) {
            case Kind::Explicit: {
                double m = 0.0;
                for (const auto& row : matrix_)
                    for (double v : row) m = std::max(m, std::fabs(v));
                return m;
            }
            case Kind::Constant:
                return std::fabs(q_);
            case Kind::Geometric:
                return std::fabs(q_);
        }
        return 0.0;
    }

    /// Q_n(p) = sum_{j >= 1} |q_nj|^p, with the geometric closed form
    /// |q|^{pn} / (1 - |q|^p); +infinity for the infinite constant array.
    double Qn(int n, double p) const {
        switch (kind_) {
            case Kind::Explicit:
            case Kind::Constant:
                if (is_infinite())
                    return q_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
                return Qn_window(n, p, size_);
            case Kind::Geometric: {
                double aq = std::fabs(q_);
                if (aq == 0.0) return 0.0;
                return std::pow(aq, p * n) / (1.0 - std::pow(aq, p));
            }
        }
        return 0.0;
    }

    /// Partial sum over columns j <= window.
    double Qn_window(int n, double p, int window) const {
        double s = 0.0;
        for (int j = 1; j <= window; ++j) {
            double v = std::fabs(q(n, j));
            if (v != 0.0) s += std::pow(v, p);
        }
        return s;
    }

    /// Q_n(p) minus the window partial sum (analytic for formula kinds).
    double Qn_tail(int n, double p, int window) const {
        double full = Qn(n, p);
        if (std::isinf(full)) return full;
        return std::max(0.0, full - Qn_window(n, p, window));
    }

    /// sum_{n > N} Q_n(1/2)^2; closed form for the geometric kind, zero once
    /// N covers all nonzero rows of a finite kind.
    double sum_Qn_half_sq_tail(int N) const {
        switch (kind_) {
            case Kind::Explicit:
            case Kind::Constant:
                if (is_infinite())
                    return q_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
                if (N >= size_) return 0.0;
                {
                    double s = 0.0;
                    for (int n = N + 1; n <= size_; ++n) s += Qn(n, 0.5) * Qn(n, 0.5);
                    return s;
                }
            case Kind::Geometric: {
                double aq = std::fabs(q_);
                if (aq == 0.0) return 0.0;
                double denom = (1.0 - std::sqrt(aq)) * (1.0 - std::sqrt(aq)) * (1.0 - aq);
                return std::pow(aq, N + 1) / denom;
            }
        }
        return 0.0;
    }

    /// sup_n of max(q_nn, 0), the diagonal part feeding the creation-norm bound.
    double sup_diag_pos() const {
        switch (kind_) {
            case Kind::Explicit: {
                double m = 0.0;
                for (int i = 0; i < size_; ++i) m = std::max(m, matrix_[i][i]);
                return m;
            }
            case Kind::Constant:
                return std::max(q_, 0.0);
            case Kind::Geometric:
                // q_nn = q^{2n-1}: positive diagonals only when q > 0, max at n = 1.
                return std::max(q_, 0.0);
        }
        return 0.0;
    }

    /// Analytic bound sup_n ||X_n^Q|| <= 2 / sqrt(1 - sup_n q_nn^+). Threshold
    /// checks always use this bound, never the truncated numerical norm.
    double sup_Xnorm_bound() const { return 2.0 / std::sqrt(1.0 - sup_diag_pos()); }

private:
    Kind kind_ = Kind::Constant;
    double q_ = 0.0;
    int size_ = 0;
    std::vector<std::vector<double>> matrix_;
};

}  // namespace nct
