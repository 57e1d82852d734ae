#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "reference.hpp"
#include "robeq/equalizers.hpp"
#include "robeq/oracle.hpp"

using namespace robeq;
using namespace robeq::oracle;

namespace {

ref::Stats stats(const Model &m) { return {m.mean_x(), m.var_x(), m.var_n()}; }

struct Draw {
    std::mt19937_64 rng;
    explicit Draw(unsigned seed) : rng(seed) {}
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    Model model(bool zero_mean = false) {
        const double mx = uni(-1, 1);
        return {zero_mean ? 0.0 : mx, uni(0.1, 10), uni(0.1, 10)};
    }
    Belief belief() {
        double h = 0;
        while (h == 0) h = uni(-3, 3);
        return {h, uni(0, 0.9 * std::abs(h))};
    }
    Equalizer eq() { return {uni(-3, 3), uni(-2, 2)}; }
};

double grid_h(const Belief &b, int k, int n) {
    return k == n - 1 ? b.upper() : b.lower() + 2 * b.epsilon() * k / (n - 1);
}

} // namespace

TEST(WorstCaseMse, Examples) {
    const Model m(0, 1, 1);
    const Equalizer e(0.4, 0);
    EXPECT_EQ(worst_case_mse(e, m, Belief(1, 0)), mse(e, m, 1.0));
    const Model shifted(0.3, 2, 1);
    EXPECT_DOUBLE_EQ(worst_case_mse(Equalizer(0, 0), shifted, Belief(1, 0.7)),
                     shifted.second_moment_x());

    const Belief b(1, 0.5);
    const double expected = std::max(mse(e, m, 0.5), mse(e, m, 1.5));
    EXPECT_EQ(worst_case_mse(e, m, b), expected);
    double grid_max = -INFINITY;
    for (int k = 0; k < 1001; ++k) grid_max = std::max(grid_max, mse(e, m, grid_h(b, k, 1001)));
    EXPECT_NEAR(grid_max, expected, 1e-12);
}

TEST(BestCaseMse, Examples) {
    const Model m(0, 1, 1);
    const Equalizer e(0.4, 0);
    EXPECT_EQ(best_case_mse(e, m, Belief(1, 0)), mse(e, m, 1.0));

    const Belief b(1, 0.5);
    const auto tuned = detail::matched_equalizer(m, 1.5);
    EXPECT_NEAR(best_case_mse(tuned, m, b), mmse_mse_at(m, 1.5), 1e-15);

    const Model shifted(0.3, 2, 1);
    EXPECT_NEAR(best_case_mse(Equalizer(0, 0.3), shifted, Belief(-1, 0.4)), 2.0, 1e-15);
}

TEST(Evaluators, BoundSampledChannels) {
    Draw d(3);
    for (int i = 0; i < 300; ++i) {
        const auto m = d.model();
        const auto e = d.eq();
        const auto b = d.belief();
        const double worst = worst_case_mse(e, m, b), best = best_case_mse(e, m, b);
        for (int k = 0; k < 1001; ++k) {
            const double dh = d.uni(-b.epsilon(), b.epsilon());
            const double v = mse(e, m, b.h_est() + dh);
            EXPECT_GE(worst, v);
            EXPECT_LE(best, v);
        }
    }
}

TEST(Evaluators, BestCaseMatchesDenseScan) {
    Draw d(4);
    for (int i = 0; i < 200; ++i) {
        const auto m = d.model();
        const auto e = d.eq();
        const auto b = d.belief();
        double scan = INFINITY;
        for (int k = 0; k < 20001; ++k) scan = std::min(scan, mse(e, m, grid_h(b, k, 20001)));
        EXPECT_LE(best_case_mse(e, m, b), scan);
        EXPECT_NEAR(best_case_mse(e, m, b), scan, 1e-6 * (1 + scan));
    }
}

TEST(Evaluators, WorstEqualsBestOnlyWhenDegenerate) {
    Draw d(5);
    for (int i = 0; i < 200; ++i) {
        const auto m = d.model();
        const auto e = d.eq();
        const auto b = d.belief();
        if (b.epsilon() > 0 && e.w() != 0) {
            EXPECT_GT(worst_case_mse(e, m, b), best_case_mse(e, m, b));
        }
        EXPECT_EQ(worst_case_mse(e, m, Belief(b.h_est(), 0)), best_case_mse(e, m, Belief(b.h_est(), 0)));
        const Equalizer flat(0, e.l());
        EXPECT_EQ(worst_case_mse(flat, m, b), best_case_mse(flat, m, b));
    }
}

TEST(GridSpec, Validation) {
    GridSpec g;
    EXPECT_NO_THROW(g.validate());
    g.w_hi = g.w_lo;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.coarse_points = 2;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.dh_points = 1000;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.refine_rounds = -1;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(GridSpec, AroundMmse) {
    const Model m(0, 1, 1);
    const auto g = GridSpec::around_mmse(m, Belief(1, 0.1));
    EXPECT_DOUBLE_EQ(g.w_lo, 0.5 - 5);
    EXPECT_DOUBLE_EQ(g.w_hi, 0.5 + 5);
    EXPECT_DOUBLE_EQ(g.l_lo, -5);
    EXPECT_DOUBLE_EQ(g.l_hi, 5);
}

TEST(GridMinimize, RefinedNeverWorseThanCoarseAndDeterministic) {
    Draw d(6);
    for (int i = 0; i < 20; ++i) {
        const auto m = d.model();
        const auto b = d.belief();
        const auto lo = mse_form(m, b.lower()), hi = mse_form(m, b.upper());
        auto f = [&](const Vector2<double> &u) { return std::max(lo(u), hi(u)); };
        const auto g = GridSpec::around_mmse(m, b);
        const auto a = grid_minimize(f, g), c = grid_minimize(f, g);
        EXPECT_LE(a.value, a.coarse_value);
        EXPECT_EQ(a.argmin, c.argmin);
        EXPECT_EQ(a.value, c.value);
        EXPECT_EQ(a.evaluations, c.evaluations);
    }
}

TEST(GridMinimize, LowestIndexTieBreak) {
    GridSpec g;
    g.w_lo = -1;
    g.w_hi = 1;
    g.l_lo = -1;
    g.l_hi = 1;
    g.coarse_points = 5;
    g.refine_rounds = 0;
    // flat in l on (-0.6, 0.6): the first row-major hit (smallest l) wins
    const auto r = grid_minimize(
        [](const Vector2<double> &u) { return u(0) * u(0) + (std::abs(u(1)) < 0.6 ? 0.0 : 1.0); },
        g);
    EXPECT_EQ(r.argmin(0), 0.0);
    EXPECT_EQ(r.argmin(1), -0.5);
}

TEST(GridMinimize, BracketTooNarrow) {
    GridSpec g;
    g.w_lo = -1;
    g.w_hi = 1;
    g.l_lo = -1;
    g.l_hi = 1;
    EXPECT_THROW(grid_minimize([](const Vector2<double> &u) { return (u(0) - 3) * (u(0) - 3) + u(1) * u(1); },
                               g),
                 BracketTooNarrow);
    const Model m(0, 1, 1);
    EXPECT_THROW(oracle_minimax(m, Belief(1, 0.5), GridSpec{0.5, 0.6, -1, 1}), BracketTooNarrow);
}

TEST(GridMinimize, RecentresWhenZoomWindowMissesMinimum) {
    GridSpec g;
    g.w_lo = -10;
    g.w_hi = 10;
    g.l_lo = -10;
    g.l_hi = 10;
    g.coarse_points = 3;
    g.refine_rounds = 4;
    const auto r = grid_minimize(
        [](const Vector2<double> &u) { return (u(0) - 3.3) * (u(0) - 3.3) + (u(1) + 7.1) * (u(1) + 7.1); },
        g);
    EXPECT_NEAR(r.argmin(0), 3.3, 0.1);
    EXPECT_NEAR(r.argmin(1), -7.1, 0.1);
}

TEST(OracleMinimax, Examples) {
    const Model m(0, 1, 1);
    const auto o = oracle_minimax(m, Belief(1, 0.5));
    EXPECT_NEAR(o.equalizer.w(), 0.4, 1e-4);
    EXPECT_NEAR(o.equalizer.l(), 0.0, 1e-4);
    EXPECT_EQ(o.branch, Branch::OracleGrid);

    const Model z(0.2, 2, 1);
    const auto at_zero = oracle_minimax(z, Belief(1.3, 0));
    const auto mmse = mmse_equalizer(z, 1.3).equalizer;
    EXPECT_NEAR(at_zero.equalizer.w(), mmse.w(), 1e-6);
    EXPECT_NEAR(at_zero.equalizer.l(), mmse.l(), 1e-6);
}

TEST(OracleMinimax, ObjectiveBelowEveryGridPoint) {
    const Model m(0.01, 1, 1);
    const Belief b(1.05, 0.3);
    const auto o = oracle_minimax(m, b);
    const auto g = GridSpec::around_mmse(m, b);
    const int n = 201;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Equalizer e(g.w_lo + (g.w_hi - g.w_lo) * i / (n - 1),
                              g.l_lo + (g.l_hi - g.l_lo) * j / (n - 1));
            ASSERT_LE(o.objective, worst_case_mse(e, m, b));
        }
}

TEST(OracleMinimin, Examples) {
    const Model m(0, 1, 1);
    auto o = oracle_minimin(m, Belief(1, 0.5));
    EXPECT_NEAR(o.equalizer.w(), 0.461538, 1e-4);
    o = oracle_minimin(m, Belief(-1, 0.5));
    EXPECT_NEAR(o.equalizer.w(), -0.461538, 1e-4);
    o = oracle_minimin(m, Belief(0.8, 0));
    EXPECT_EQ(o.equalizer, mmse_equalizer(m, 0.8).equalizer);
}

TEST(OracleMinimaxRegret, Examples) {
    const Model m(0, 1, 1);
    const auto o = oracle_minimax_regret(m, Belief(1, 0.2));
    EXPECT_NEAR(o.equalizer.w(), 1.2 / 2.44, 1e-4);
    EXPECT_NEAR(o.equalizer.l(), 0, 1e-4);
    const auto z = oracle_minimax_regret(m, Belief(1.7, 0));
    EXPECT_NEAR(z.equalizer.w(), mmse_equalizer(m, 1.7).equalizer.w(), 1e-6);
}

TEST(OracleMinimaxRegret, CaseFourInstanceFromRadiusScan) {
    // scan eps for a case-4 instance and check the oracle never beats it
    const Model m(0.3, 1.5, 0.8);
    int found = 0;
    for (int k = 1; k < 90 && found < 5; ++k) {
        const Belief b(1.2, 1.2 * 0.9 * k / 90);
        const auto r = minimax_regret_equalizer(m, b);
        if (r.branch != Branch::RegretCase4) continue;
        ++found;
        const auto o = oracle_minimax_regret(m, b);
        EXPECT_LE(r.objective, o.objective + 1e-8);
    }
    EXPECT_GT(found, 0);
}

TEST(Oracles, AgreeWithReferenceSearch) {
    Draw d(9);
    for (int i = 0; i < 40; ++i) {
        const auto m = d.model();
        const auto b = d.belief();
        const auto s = stats(m);
        const auto mm = oracle_minimax(m, b);
        const auto pm = ref::minimax(b.h_est(), b.epsilon(), s);
        EXPECT_NEAR(mm.objective, pm.value, 1e-8) << i;
        EXPECT_NEAR(mm.equalizer.w(), pm.w, 1e-4) << i;
        EXPECT_NEAR(mm.equalizer.l(), pm.l, 1e-4) << i;

        const auto rr = oracle_minimax_regret(m, b);
        const auto pr = ref::minimax_regret(b.h_est(), b.epsilon(), s);
        EXPECT_NEAR(rr.objective, pr.value, 1e-8) << i;

        const auto mn = oracle_minimin(m, b);
        const auto pn = ref::minimin(b.h_est(), b.epsilon(), s);
        EXPECT_NEAR(mn.objective, pn.value, 1e-10) << i;
    }
}

TEST(MinInterchange, Singletons) {
    const std::vector<double> x{1.5}, y{-2}, z{0.25};
    EXPECT_TRUE(lemma1_check(x, y, z, [](double a, double b, double c) { return a * b + c; }));
}

TEST(MinInterchange, RandomQuadratics) {
    Draw d(10);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> xs(10), ys(10), zs(10);
        for (auto *v : {&xs, &ys, &zs})
            for (double &x : *v) x = d.uni(-2, 2);
        double c[7];
        for (double &ci : c) ci = d.uni(-1, 1);
        auto f = [&](double x, double y, double z) {
            return c[0] * x * x + c[1] * y * y + c[2] * z * z + c[3] * x * y + c[4] * y * z +
                   c[5] * x * z + c[6];
        };
        EXPECT_TRUE(lemma1_check(xs, ys, zs, f));
    }
}

TEST(MinInterchange, MseObjective) {
    const Model m(0.01, 1, 1);
    std::vector<double> ws, ls, dhs;
    for (int i = 0; i < 21; ++i) {
        ws.push_back(-1 + 0.1 * i);
        ls.push_back(-0.5 + 0.05 * i);
        dhs.push_back(-0.3 + 0.03 * i);
    }
    EXPECT_TRUE(lemma1_check(ws, ls, dhs, [&](double w, double l, double dh) {
        return mse(Equalizer(w, l), m, 1.05 + dh);
    }));
}

TEST(MinInterchange, RejectsEmptyGrid) {
    const std::vector<double> some{1}, none;
    EXPECT_THROW(lemma1_check(some, none, some, [](double, double, double) { return 0.0; }),
                 std::invalid_argument);
}
