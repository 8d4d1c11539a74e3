#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "nct/calculus.hpp"
#include "nct/fock.hpp"

using namespace nct;
using Q = Rational;

TEST_CASE("semicircular moments", "[semitrace]") {
    SemicircularOracle<Q> tau;
    CHECK(tau.word_trace(Word{1, 1}) == Q(1));
    CHECK(tau.word_trace(Word{1, 2, 1, 2}) == Q(0));  // the only matching is crossing
    CHECK(tau.word_trace(Word{1, 1, 1, 1}) == Q(2));
    CHECK(tau.word_trace(Word{1, 1, 1, 1, 1, 1}) == Q(5));
    CHECK(tau.word_trace(Word{1, 1, 1, 1, 1, 1, 1, 1}) == Q(14));  // Catalan numbers
    CHECK(tau.word_trace(Word{1}) == Q(0));
    CHECK(tau.word_trace(Word{}) == Q(1));
    CHECK(tau.word_trace(Word{1, 2, 2, 1}) == Q(1));
}

TEST_CASE("Schwinger-Dyson characterization holds exactly", "[semitrace]") {
    SemicircularOracle<Q> tau;
    for (const Word& w : testing::all_words(3, 7)) {
        for (VarIndex n = 1; n <= 3; ++n) {
            Q lhs = tau.word_trace(Word{n}.concat(w));
            Q rhs = tensor_trace(diff(Series<Q>::monomial(w, Q(1)), n), tau);
            REQUIRE(lhs == rhs);
        }
    }
}

TEST_CASE("moment bound and traciality", "[semitrace]") {
    SemicircularOracle<double> tau;
    auto eng = testing::rng(81);
    for (int k = 0; k < 200; ++k) {
        Word w = testing::random_word(eng, 4, 8);
        double t = tau.word_trace(w);
        CHECK(std::fabs(t) <= std::pow(2.0, w.degree()));
        Word uv = testing::random_word(eng, 3, 4);
        CHECK(tau.word_trace(w.concat(uv)) ==
              Catch::Approx(tau.word_trace(uv.concat(w))).margin(1e-12));
    }
}

TEST_CASE("tau (x) tau evaluation", "[semitrace]") {
    SemicircularOracle<Q> tau;
    CHECK(tensor_trace(TensorElem<Q>::one(), tau) == Q(1));
    CHECK(tensor_trace(TensorElem<Q>::pure(Word{1}, Word{1}), tau) == Q(0));
    CHECK(tensor_trace(TensorElem<Q>::pure(Word{1, 1}, Word{2, 2}), tau) == Q(1));
}

TEST_CASE("matches the Fock oracle at q = 0", "[semitrace]") {
    SemicircularOracle<double> sc;
    FockRep rep(StructureArray::make_constant(0.0, 3), 3, 6);
    for (const Word& w : testing::all_words(3, 6))
        CHECK(rep.trace_word(w) == Catch::Approx(sc.word_trace(w)).margin(1e-9));
}
