#pragma once

#include <random>

#include "nct/series.hpp"
#include "nct/tensor.hpp"

namespace nct::testing {

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline Word random_word(std::mt19937_64& eng, int n_vars, int max_degree, int min_degree = 0) {
    std::uniform_int_distribution<int> deg(min_degree, max_degree);
    std::uniform_int_distribution<VarIndex> var(1, static_cast<VarIndex>(n_vars));
    std::vector<VarIndex> letters(static_cast<std::size_t>(deg(eng)));
    for (auto& v : letters) v = var(eng);
    return Word(std::move(letters));
}

template <ScalarMode S>
S random_coeff(std::mt19937_64& eng) {
    if constexpr (scalar_traits<S>::is_exact) {
        std::uniform_int_distribution<long long> num(-4, 4);
        std::uniform_int_distribution<long long> den(1, 4);
        long long n = num(eng);
        return Rational(n == 0 ? 1 : n, den(eng));
    } else {
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        double v = dist(eng);
        return v == 0.0 ? 0.5 : v;
    }
}

template <ScalarMode S>
Series<S> random_series(std::mt19937_64& eng, int n_vars, int max_degree, int n_terms,
                        int min_degree = 0) {
    Series<S> out;
    for (int k = 0; k < n_terms; ++k)
        out.add_term(random_word(eng, n_vars, max_degree, min_degree), random_coeff<S>(eng));
    return out;
}

template <ScalarMode S>
TensorElem<S> random_tensor(std::mt19937_64& eng, int n_vars, int max_side_degree, int n_terms) {
    TensorElem<S> out;
    for (int k = 0; k < n_terms; ++k)
        out.add_term(random_word(eng, n_vars, max_side_degree),
                     random_word(eng, n_vars, max_side_degree), random_coeff<S>(eng));
    return out;
}

/// Random self-adjoint series: p + p*.
template <ScalarMode S>
Series<S> random_self_adjoint(std::mt19937_64& eng, int n_vars, int max_degree, int n_terms) {
    Series<S> p = random_series<S>(eng, n_vars, max_degree, n_terms, 1);
    return p + star(p);
}

/// Enumerates all words over {1..n_vars} with degree in [min_degree, max_degree].
inline std::vector<Word> all_words(int n_vars, int max_degree, int min_degree = 0) {
    std::vector<Word> out;
    std::vector<Word> frontier{Word{}};
    for (int d = 0; d <= max_degree; ++d) {
        std::vector<Word> next;
        for (const Word& w : frontier) {
            if (d >= min_degree) out.push_back(w);
            if (d < max_degree)
                for (VarIndex v = 1; v <= static_cast<VarIndex>(n_vars); ++v)
                    next.push_back(w.concat(Word{v}));
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace nct::testing
