#include <doctest.h>

#include <cmath>

#include "regime/loss.hpp"
#include "regime/rng.hpp"

using namespace regime;

namespace {

Matrix filled(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    Matrix m(r, c);
    std::size_t i = 0;
    for (double v : vals) m.data[i++] = v;
    return m;
}

LossMatrix random_loss(std::size_t n, std::size_t a, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    LossMatrix L;
    for (std::size_t j = 0; j < a; ++j) L.actions.labels.push_back("a" + std::to_string(j));
    L.values = Matrix(n, a);
    for (auto& v : L.values.data) v = scale * rng.uniform();
    L.l_max = scale;
    return L;
}

}  // namespace

TEST_CASE("assemble_loss mean decomposition is linear in the components") {
    // the loss is linear in (c, h, k), so the column-mean decomposition of
    // the direct action follows the same formula
    double mean_loss = 1.0 * (1.0 - 0.6685) + 1.0 * 0.7033 + 0.05 * 1.0;
    CHECK(mean_loss == doctest::Approx(1.0848).epsilon(1e-10));

    LossComponents comp;
    comp.c = filled(2, 2, {1, 0, 0, 0});
    comp.h = filled(2, 2, {0.7033, 0, 0.7033, 0});
    comp.k = filled(2, 2, {1.0, 0, 1.0, 0});
    auto L = assemble_loss(comp, Weights{1.0, 1.0, 0.05}, ActionSet{{"direct", "abstain"}});
    double direct_mean = 0.5 * (L.values(0, 0) + L.values(1, 0));
    CHECK(direct_mean == doctest::Approx((0.7533 + 1.7533) / 2.0));
}

TEST_CASE("abstain with zero components costs exactly the correctness weight") {
    LossComponents comp;
    comp.c = filled(3, 2, {1, 0, 0, 0, 1, 0});
    comp.h = filled(3, 2, {0.2, 0, 0.5, 0, 0.1, 0});
    comp.k = filled(3, 2, {1.0, 0, 1.0, 0, 2.3, 0});
    auto L = assemble_loss(comp, Weights{1.0, 1.0, 0.05}, ActionSet{{"direct", "abstain"}});
    for (std::size_t i = 0; i < 3; ++i) CHECK(L.values(i, 1) == doctest::Approx(1.0));
    CHECK(L.l_max == doctest::Approx(1.0 + 1.0 + 0.05 * 2.3));
}

TEST_CASE("assemble_loss with all-zero weights gives zero losses") {
    LossComponents comp;
    comp.c = filled(2, 2, {1, 0, 0, 1});
    comp.h = filled(2, 2, {0.3, 0.9, 0.1, 0.0});
    comp.k = filled(2, 2, {1, 2, 0, 1});
    auto L = assemble_loss(comp, Weights{0, 0, 0}, ActionSet{{"a", "b"}});
    for (double v : L.values.data) CHECK(v == 0.0);
}

TEST_CASE("assemble_loss rejects bad inputs") {
    LossComponents comp;
    comp.c = filled(2, 2, {1, 0, 0, 1});
    comp.h = filled(2, 2, {0.1, 0.2, 0.3, 0.4});
    comp.k = filled(1, 2, {1, 2});  // shape mismatch
    CHECK_THROWS_AS(assemble_loss(comp, Weights{1, 1, 0.05}, ActionSet{{"a", "b"}}),
                    std::invalid_argument);
    comp.k = filled(2, 2, {1, 2, 1, 2});
    CHECK_THROWS_AS(assemble_loss(comp, Weights{-1, 1, 0.05}, ActionSet{{"a", "b"}}),
                    std::invalid_argument);
}

TEST_CASE("assemble_loss output stays within [0, l_max] on random components") {
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 1 + rng.index(20), a = 2 + rng.index(3);
        LossComponents comp{Matrix(n, a), Matrix(n, a), Matrix(n, a)};
        for (auto& v : comp.c.data) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        for (auto& v : comp.h.data) v = rng.uniform();
        for (auto& v : comp.k.data) v = 3.0 * rng.uniform();
        ActionSet actions;
        for (std::size_t j = 0; j < a; ++j) actions.labels.push_back("a" + std::to_string(j));
        Weights w{rng.uniform(), rng.uniform(), rng.uniform()};
        auto L = assemble_loss(comp, w, actions);
        for (double v : L.values.data) {
            CHECK(v >= 0.0);
            CHECK(v <= L.l_max + 1e-12);
        }
    }
}

TEST_CASE("best_fixed_action picks abstain when it has the lowest mean") {
    LossMatrix L;
    L.actions = ActionSet::canonical();
    L.values = filled(2, 4, {1.085, 1.136, 1.104, 1.000, 1.085, 1.136, 1.104, 1.000});
    L.l_max = 2.115;
    auto [a, risk] = best_fixed_action(L);
    CHECK(a == 3);
    CHECK(risk == doctest::Approx(1.000));
}

TEST_CASE("best_fixed_action breaks ties by action order") {
    LossMatrix L;
    L.actions = ActionSet{{"a", "b", "c"}};
    L.values = Matrix(4, 3, 0.7);
    L.l_max = 1.0;
    CHECK(best_fixed_action(L).first == 0);
}

TEST_CASE("best_fixed_action matches an exhaustive column-mean scan") {
    auto L = random_loss(5, 3, 99);
    auto [a, risk] = best_fixed_action(L);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < 5; ++i) m += L.values(i, j);
        m /= 5.0;
        CHECK(risk <= m + 1e-12);
        if (j == a) CHECK(risk == doctest::Approx(m));
    }
}

TEST_CASE("policy_risk basics") {
    auto L = random_loss(6, 3, 4);
    SUBCASE("constant assignment equals the column mean") {
        std::vector<int> assign(6, 2);
        double m = 0.0;
        for (std::size_t i = 0; i < 6; ++i) m += L.values(i, 2);
        CHECK(policy_risk(L, assign) == doctest::Approx(m / 6.0));
    }
    SUBCASE("single row returns the selected entry") {
        auto one = random_loss(1, 3, 5);
        CHECK(policy_risk(one, {1}) == doctest::Approx(one.values(0, 1)));
    }
    SUBCASE("out-of-range index throws") {
        CHECK_THROWS_AS(policy_risk(L, std::vector<int>(6, 3)), std::invalid_argument);
    }
}

TEST_CASE("row-wise argmin beats every assignment on a 3x2 enumeration") {
    auto L = random_loss(3, 2, 11);
    std::vector<int> oracle(3);
    for (std::size_t i = 0; i < 3; ++i) oracle[i] = L.values(i, 0) <= L.values(i, 1) ? 0 : 1;
    double oracle_risk = policy_risk(L, oracle);
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> assign = {(mask >> 0) & 1, (mask >> 1) & 1, (mask >> 2) & 1};
        CHECK(oracle_risk <= policy_risk(L, assign) + 1e-12);
    }
}

TEST_CASE("the best fixed action beats other constant assignments") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto L = random_loss(12, 4, 100 + s);
        double best = best_fixed_action(L).second;
        for (int j = 0; j < 4; ++j)
            CHECK(best <= policy_risk(L, std::vector<int>(12, j)) + 1e-12);
    }
}

TEST_CASE("selective_constants midpoint example") {
    LossMatrix L;
    L.actions = ActionSet{{"direct", "abstain"}};
    L.values = Matrix(4, 2);
    std::vector<int> correct = {1, 1, 0, 0};
    for (std::size_t i = 0; i < 4; ++i) {
        L.values(i, 0) = correct[i] ? 0.0 : 1.0;
        L.values(i, 1) = 0.5;
    }
    L.l_max = 1.0;
    auto c = selective_constants(L, correct);
    CHECK(c.l_r == doctest::Approx(0.0));
    CHECK(c.l_w == doctest::Approx(1.0));
    CHECK(c.l_a == doctest::Approx(0.5));
    CHECK(c.alpha_min == doctest::Approx(0.5));
}

TEST_CASE("selective_constants matches hand-computed subset means") {
    Rng rng(42);
    LossMatrix L;
    L.actions = ActionSet::canonical();
    L.values = Matrix(20, 4);
    std::vector<int> correct(20);
    for (std::size_t i = 0; i < 20; ++i) {
        correct[i] = i % 3 == 0 ? 1 : 0;
        for (std::size_t a = 0; a < 4; ++a)
            L.values(i, a) = rng.uniform() + (correct[i] ? 0.0 : 0.8);
    }
    L.l_max = 2.0;
    auto c = selective_constants(L, correct);
    double sr = 0.0, sw = 0.0, sa = 0.0;
    std::size_t nr = 0, nw = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        if (correct[i]) {
            sr += L.values(i, 0);
            ++nr;
        } else {
            sw += L.values(i, 0);
            ++nw;
        }
        sa += L.values(i, 3);
    }
    CHECK(c.l_r == doctest::Approx(sr / static_cast<double>(nr)));
    CHECK(c.l_w == doctest::Approx(sw / static_cast<double>(nw)));
    CHECK(c.l_a == doctest::Approx(sa / 20.0));
    CHECK(c.alpha_min == doctest::Approx((c.l_a - c.l_r) / (c.l_w - c.l_r)));
}

TEST_CASE("selective_constants error paths") {
    LossMatrix L;
    L.actions = ActionSet{{"direct", "abstain"}};
    L.values = Matrix(4, 2, 0.5);
    L.l_max = 1.0;
    SUBCASE("degenerate l_w <= l_r") {
        CHECK_THROWS_AS(selective_constants(L, {1, 1, 0, 0}), std::domain_error);
    }
    SUBCASE("missing class") {
        CHECK_THROWS_AS(selective_constants(L, {1, 1, 1, 1}), std::invalid_argument);
    }
}

TEST_CASE("alpha_min lands in (0,1) whenever l_r < l_a < l_w") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        double lr = rng.uniform();
        double lw = lr + 0.1 + rng.uniform();
        double la = lr + (lw - lr) * (0.05 + 0.9 * rng.uniform());
        double alpha_min = (la - lr) / (lw - lr);
        CHECK(alpha_min > 0.0);
        CHECK(alpha_min < 1.0);
    }
}

TEST_CASE("component means reconstruct the fixed-action risks") {
    struct Row {
        double c, h, k, expected;
    };
    const Row rows[] = {{0.6685, 0.7033, 1.0, 1.0848},
                        {0.8306, 0.1944, 1.0, 0.4138},
                        {0.5320, 0.2340, 1.0, 0.7520}};
    for (const auto& r : rows)
        CHECK(1.0 * (1.0 - r.c) + 1.0 * r.h + 0.05 * r.k ==
              doctest::Approx(r.expected).epsilon(1e-6));
}
