#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "nct/fock.hpp"
#include "nct/mat_tensor.hpp"
#include "nct/trace.hpp"

using namespace nct;
using nct::testing::random_series;
using nct::testing::random_tensor;
using Q = Rational;

TEST_CASE("tnorm_upper weights by total degree", "[tensor]") {
    CHECK(tnorm_upper(TensorElem<double>::one(), 3.0) == 1.0);
    TensorElem<double> t = TensorElem<double>::pure(Word{1}, Word{2}) +
                           TensorElem<double>::pure(Word{2}, Word{1});
    double R = 2.5;
    CHECK(tnorm_upper(t, R) == Catch::Approx(2 * R * R));
}

TEST_CASE("tnorm_upper is submultiplicative for the # product", "[tensor]") {
    auto eng = testing::rng(41);
    for (int k = 0; k < 50; ++k) {
        TensorElem<double> a = random_tensor<double>(eng, 3, 3, 4);
        TensorElem<double> b = random_tensor<double>(eng, 3, 3, 4);
        CHECK(tnorm_upper(tensor_mul(a, b), 2.0) <=
              tnorm_upper(a, 2.0) * tnorm_upper(b, 2.0) * (1 + 1e-12));
    }
}

TEST_CASE("# product follows (A(x)B)#(C(x)D) = AC(x)DB", "[tensor]") {
    TensorElem<Q> ab = TensorElem<Q>::pure(Word{1}, Word{2});
    TensorElem<Q> cd = TensorElem<Q>::pure(Word{3}, Word{4});
    CHECK(tensor_mul(ab, cd) == TensorElem<Q>::pure(Word{1, 3}, Word{4, 2}));
    CHECK(tensor_mul(TensorElem<Q>::one(), ab) == ab);
    CHECK(tensor_mul(ab, TensorElem<Q>::one()) == ab);

    auto eng = testing::rng(42);
    for (int k = 0; k < 25; ++k) {
        TensorElem<Q> a = random_tensor<Q>(eng, 2, 2, 3);
        TensorElem<Q> b = random_tensor<Q>(eng, 2, 2, 3);
        TensorElem<Q> c = random_tensor<Q>(eng, 2, 2, 3);
        CHECK(tensor_mul(tensor_mul(a, b), c) == tensor_mul(a, tensor_mul(b, c)));
    }
}

TEST_CASE("hash action sandwiches the series", "[tensor]") {
    Series<Q> x3 = Series<Q>::generator(3);
    CHECK(hash_apply(TensorElem<Q>::pure(Word{1}, Word{2}), x3) ==
          Series<Q>::monomial(Word{1, 3, 2}, Q(1)));
    auto eng5 = testing::rng(5);
    Series<Q> p = random_series<Q>(eng5, 2, 3, 4);
    CHECK(hash_apply(TensorElem<Q>::one(), p) == p);

    auto eng = testing::rng(43);
    for (int k = 0; k < 30; ++k) {
        TensorElem<double> eta = random_tensor<double>(eng, 2, 3, 4);
        Series<double> s = random_series<double>(eng, 2, 3, 4);
        CHECK(norm_R(hash_apply(eta, s), 2.0) <=
              tnorm_upper(eta, 2.0) * norm_R(s, 2.0) * (1 + 1e-12));
    }
}

TEST_CASE("the three involutions", "[tensor]") {
    TensorElem<Q> t = TensorElem<Q>::pure(Word{1, 2}, Word{3});
    CHECK(invol_dagger(t) == TensorElem<Q>::pure(Word{3}, Word{2, 1}));
    CHECK(invol_diamond(TensorElem<Q>::pure(Word{1}, Word{2})) ==
          TensorElem<Q>::pure(Word{2}, Word{1}));

    auto eng = testing::rng(44);
    for (int k = 0; k < 30; ++k) {
        TensorElem<Q> eta = random_tensor<Q>(eng, 3, 3, 5);
        CHECK(invol_dagger(eta) == invol_diamond(invol_star(eta)));
        CHECK(invol_dagger(eta) == invol_star(invol_diamond(eta)));
        CHECK(invol_star(invol_star(eta)) == eta);
        double R = 1.9;
        CHECK(tnorm_upper(invol_star(eta), R) == Catch::Approx(tnorm_upper(eta, R)));
        CHECK(tnorm_upper(invol_dagger(eta), R) == Catch::Approx(tnorm_upper(eta, R)));
        CHECK(tnorm_upper(invol_diamond(eta), R) == Catch::Approx(tnorm_upper(eta, R)));
    }
}

TEST_CASE("partial traces against the semicircular oracle", "[tensor]") {
    SemicircularOracle<Q> tau;
    CHECK(partial_trace_right(TensorElem<Q>::pure(Word{1}, Word{}), tau) ==
          Series<Q>::generator(1));
    CHECK(partial_trace_right(TensorElem<Q>::pure(Word{1}, Word{2}), tau).is_zero());
    CHECK(mul_map(TensorElem<Q>::pure(Word{1}, Word{2})) == Series<Q>::monomial(Word{1, 2}, Q(1)));
}

TEST_CASE("matrix algebra basics", "[tensor]") {
    auto eng = testing::rng(45);
    MatTensor<Q> H;
    H.set(1, 1, random_tensor<Q>(eng, 2, 2, 3));
    H.set(1, 2, random_tensor<Q>(eng, 2, 2, 3));
    H.set(2, 1, random_tensor<Q>(eng, 2, 2, 2));
    MatTensor<Q> I = MatTensor<Q>::identity_on({1, 2});
    CHECK(mat_mul(I, H) == H);
    CHECK(mat_mul(H, I) == H);

    MatTensor<double> single;
    single.set(1, 1, TensorElem<double>::pure(Word{1}, Word{2}));
    double R = 2.0;
    CHECK(mat_norm(single, R, 1) == Catch::Approx(R * R));
    CHECK(mat_norm(single, R, mat_p_inf) == Catch::Approx(R * R));
}

TEST_CASE("trace is tracial under tau (x) tau", "[tensor]") {
    SemicircularOracle<double> tau;
    auto eng = testing::rng(46);
    for (int k = 0; k < 10; ++k) {
        MatTensor<double> G, H;
        for (VarIndex i = 1; i <= 2; ++i)
            for (VarIndex j = 1; j <= 2; ++j) {
                G.set(i, j, random_tensor<double>(eng, 2, 2, 3));
                H.set(i, j, random_tensor<double>(eng, 2, 2, 3));
            }
        double lhs = tensor_trace(mat_trace(mat_mul(G, H)), tau);
        double rhs = tensor_trace(mat_trace(mat_mul(H, G)), tau);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-10));
    }
}

TEST_CASE("M_1 is a right ideal in M_infinity", "[tensor]") {
    auto eng = testing::rng(47);
    for (int k = 0; k < 20; ++k) {
        MatTensor<double> G, H;
        for (VarIndex i = 1; i <= 3; ++i)
            for (VarIndex j = 1; j <= 3; ++j) {
                if (i + j != 5) G.set(i, j, random_tensor<double>(eng, 2, 2, 2));
                if (i != j) H.set(i, j, random_tensor<double>(eng, 2, 2, 2));
            }
        double R = 1.8;
        CHECK(mat_norm(mat_mul(G, H), R, 1) <=
              mat_norm(G, R, 1) * mat_norm(H, R, mat_p_inf) * (1 + 1e-12));
    }
}

TEST_CASE("analytic matrix functions", "[tensor]") {
    SECTION("zero input") {
        MatTensor<double> zero;
        auto log_res = mat_analytic(zero, AnalyticKind::Log1p, 8, 2.0);
        CHECK(log_res.value.is_zero());
        CHECK(log_res.tail_bound == 0.0);
        auto inv_res = mat_analytic(zero, AnalyticKind::NeumannInv, 8, 2.0, std::nullopt, {1, 2});
        CHECK(inv_res.value == MatTensor<double>::identity_on({1, 2}));
    }

    SECTION("1x1 scalar case reproduces the scalar logarithm") {
        double c = 0.37;
        MatTensor<double> H;
        H.set(1, 1, c * TensorElem<double>::one());
        auto res = mat_analytic(H, AnalyticKind::Log1p, 40, 2.0);
        TensorElem<double> entry = res.value.at(1, 1);
        REQUIRE(entry.term_count() == 1);
        double val = entry.terms().begin()->second;
        CHECK(std::fabs(val - std::log1p(c)) <= res.tail_bound + 1e-15);

        auto inv = mat_analytic(H, AnalyticKind::NeumannInv, 60, 2.0);
        CHECK(inv.value.at(1, 1).terms().begin()->second == Catch::Approx(1.0 / (1.0 + c)));
        auto xi = mat_analytic(H, AnalyticKind::XiOver1p, 60, 2.0);
        CHECK(xi.value.at(1, 1).terms().begin()->second == Catch::Approx(c / (1.0 + c)));
        auto sq = mat_analytic(H, AnalyticKind::SqOver1p, 60, 2.0);
        CHECK(sq.value.at(1, 1).terms().begin()->second == Catch::Approx(c * c / (1.0 + c)));
    }

    SECTION("tail bound decreases in m_max") {
        MatTensor<double> H;
        H.set(1, 1, 0.5 * TensorElem<double>::one());
        double prev = std::numeric_limits<double>::infinity();
        for (int m = 2; m <= 10; m += 2) {
            auto res = mat_analytic(H, AnalyticKind::Log1p, m, 2.0);
            CHECK(res.tail_bound < prev);
            prev = res.tail_bound;
        }
    }

    SECTION("norm guard") {
        MatTensor<double> H;
        H.set(1, 1, TensorElem<double>::pure(Word{1}, Word{1}));
        CHECK_THROWS_AS(mat_analytic(H, AnalyticKind::Log1p, 4, 2.0), NormTooLarge);
    }
}

TEST_CASE("tnorm_upper dominates the tau (x) tau norm at q = 0", "[tensor]") {
    FockRep rep(StructureArray::make_constant(0.0, 2), 2, 6);
    FockOracle tau(rep);
    auto eng = testing::rng(48);
    for (int k = 0; k < 20; ++k) {
        TensorElem<double> eta = random_tensor<double>(eng, 2, 3, 4);
        double l2 = std::sqrt(std::max(0.0, tensor_pairing(eta, eta, tau)));
        CHECK(l2 <= tnorm_upper(eta, 2.0) * (1 + 1e-9));
    }
}

TEST_CASE("mat_star is the adjoint of the l2 action", "[tensor]") {
    FockRep rep(StructureArray::make_constant(0.0, 2), 2, 6);
    FockOracle tau(rep);
    auto eng = testing::rng(49);
    for (int k = 0; k < 10; ++k) {
        MatTensor<double> H;
        for (VarIndex i = 1; i <= 2; ++i)
            for (VarIndex j = 1; j <= 2; ++j) H.set(i, j, random_tensor<double>(eng, 2, 2, 3));
        std::map<VarIndex, TensorElem<double>> xi, zeta;
        for (VarIndex i = 1; i <= 2; ++i) {
            xi[i] = random_tensor<double>(eng, 2, 2, 3);
            zeta[i] = random_tensor<double>(eng, 2, 2, 3);
        }
        auto pair_seq = [&](const std::map<VarIndex, TensorElem<double>>& a,
                            const std::map<VarIndex, TensorElem<double>>& b) {
            double t = 0.0;
            for (const auto& [n, an] : a) {
                auto it = b.find(n);
                if (it != b.end()) t += tensor_pairing(an, it->second, tau);
            }
            return t;
        };
        double lhs = pair_seq(mat_apply_tensors(H, xi), zeta);
        double rhs = pair_seq(xi, mat_apply_tensors(mat_star(H), zeta));
        CHECK(lhs == Catch::Approx(rhs).margin(1e-9));
    }
}
