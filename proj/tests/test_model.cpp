#include <gtest/gtest.h>

#include <random>

#include "reference.hpp"
#include "robeq/equalizers.hpp"
#include "robeq/model.hpp"

using namespace robeq;

namespace {

using Model = SignalModel<double>;
using Belief = ChannelBelief<double>;
using Eq = AffineEqualizer<double>;

ref::Stats stats(const Model &m) { return {m.mean_x(), m.var_x(), m.var_n()}; }

struct Draw {
    std::mt19937_64 rng{12345};
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    Model model() { return {uni(-1, 1), uni(0.1, 10), uni(0.1, 10)}; }
    Eq eq() { return {uni(-3, 3), uni(-2, 2)}; }
};

} // namespace

TEST(SignalModel, RejectsInvalidStatistics) {
    EXPECT_THROW(Model(0, 0, 1), std::invalid_argument);
    EXPECT_THROW(Model(0, 1, -1), std::invalid_argument);
    EXPECT_THROW(Model(NAN, 1, 1), std::invalid_argument);
    EXPECT_THROW(Model(0, INFINITY, 1), std::invalid_argument);
    EXPECT_NO_THROW(Model(-3, 1e-9, 1e9));
}

TEST(SignalModel, SecondMomentAndSnr) {
    const Model zero(0, 2, 4);
    EXPECT_EQ(zero.second_moment_x(), zero.var_x());
    EXPECT_EQ(zero.snr(), 0.5);
    const Model shifted(0.5, 2, 4);
    EXPECT_GT(shifted.second_moment_x(), shifted.var_x());
    EXPECT_DOUBLE_EQ(shifted.second_moment_x(), 2.25);
}

TEST(ChannelBelief, Invariants) {
    EXPECT_THROW(Belief(1, -0.1), std::invalid_argument);
    EXPECT_THROW(Belief(NAN, 0.1), std::invalid_argument);
    EXPECT_THROW(Belief(1, INFINITY), std::invalid_argument);
    const Belief b(1, 0);
    EXPECT_EQ(b.lower(), b.upper());
}

TEST(AffineEqualizer, RejectsNonFinite) {
    EXPECT_THROW(Eq(NAN, 0), std::invalid_argument);
    EXPECT_THROW(Eq(0, INFINITY), std::invalid_argument);
    const Eq e(2, 3);
    EXPECT_EQ(e(4), 11);
}

TEST(MethodNames, RoundTrip) {
    for (Method m : kAllMethods) EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_EQ(parse_method("regret"), Method::MinimaxRegret);
    EXPECT_THROW(parse_method("wiener"), std::invalid_argument);
}

TEST(Mse, ZeroEqualizerReturnsSecondMoment) {
    const Model m(0.01, 1, 1);
    EXPECT_DOUBLE_EQ(mse(Eq(0, 0), m, 1.05), 1.0001);
}

TEST(Mse, MeanPredictorLeavesVariance) {
    for (const Model &m : {Model(0.3, 2, 1), Model(-1, 0.5, 7)})
        for (double h : {-2.0, 0.0, 1.05}) EXPECT_NEAR(mse(Eq(0, m.mean_x()), m, h), m.var_x(), 1e-15);
}

TEST(Mse, UnitCase) { EXPECT_DOUBLE_EQ(mse(Eq(0.5, 0), Model(0, 1, 1), 1.0), 0.5); }

TEST(Mse, AgreesWithDirectExpansion) {
    Draw d;
    for (int i = 0; i < 200; ++i) {
        const auto m = d.model();
        const auto e = d.eq();
        const double h = d.uni(-3, 3);
        EXPECT_NEAR(mse(e, m, h), ref::mse(e.w(), e.l(), h, stats(m)), 1e-12 * (1 + mse(e, m, h)));
        EXPECT_GE(mse(e, m, h), 0.0);
        EXPECT_NEAR(mse_form(m, h)(e.coeffs()), mse(e, m, h), 1e-12 * (1 + mse(e, m, h)));
    }
}

TEST(MmseMseAt, Examples) {
    EXPECT_DOUBLE_EQ(mmse_mse_at(Model(0, 1, 1), 1.0), 0.5);
    EXPECT_DOUBLE_EQ(mmse_mse_at(Model(0, 1, 1), 0.0), 1.0);
}

TEST(MmseMseAt, MatchesBruteForceMinimum) {
    const Model m(0, 1, 1);
    const auto p = ref::minimize2(
        [&](double w, double l) { return ref::mse(w, l, 1.05, stats(m)); }, -5, 5, -5, 5);
    EXPECT_NEAR(mmse_mse_at(m, 1.05), p.value, 1e-12);
    EXPECT_NEAR(mmse_mse_at(m, 1.05), 0.47562, 1e-5);
}

TEST(MmseMseAt, IndependentOfMeanAndEven) {
    Draw d;
    for (int i = 0; i < 100; ++i) {
        const auto m = d.model();
        const double h = d.uni(-3, 3);
        EXPECT_EQ(mmse_mse_at(m, h), mmse_mse_at(m, -h));
        EXPECT_NEAR(mmse_mse_at(m, h), ref::optimum_value(h, stats(m)), 1e-12);
        EXPECT_GT(mmse_mse_at(m, h), 0.0);
        EXPECT_LE(mmse_mse_at(m, h), m.var_x());
    }
}

TEST(MmseMseSlope, MatchesFiniteDifference) {
    const Model m(0.2, 1.5, 0.7);
    for (double h : {-1.3, 0.4, 2.0}) {
        const double step = 1e-6;
        const double fd = -(mmse_mse_at(m, h + step) - mmse_mse_at(m, h - step)) / (2 * step);
        EXPECT_NEAR(mmse_mse_slope(m, h), fd, 1e-8);
    }
}

TEST(Regret, Examples) {
    const Model m(0, 1, 1);
    EXPECT_NEAR(regret(detail::matched_equalizer(m, 1.0), m, 1.0), 0.0, 1e-16);
    EXPECT_DOUBLE_EQ(regret(Eq(0, 0), m, 1.0), 0.5);
    EXPECT_NEAR(mse(Eq(0.4, 0), m, 1.0), 0.52, 1e-15);
    EXPECT_NEAR(regret(Eq(0.4, 0), m, 1.0), 0.02, 1e-15);
}

TEST(Regret, NonNegativeAndZeroOnlyAtOptimum) {
    Draw d;
    for (int i = 0; i < 300; ++i) {
        const auto m = d.model();
        const double h = d.uni(-3, 3);
        EXPECT_GE(regret(d.eq(), m, h), -1e-12);
        const auto opt = detail::matched_equalizer(m, h);
        EXPECT_NEAR(regret(opt, m, h), 0.0, 1e-12);
        const auto [rw, rl] = ref::optimum(h, stats(m));
        EXPECT_NEAR(opt.w(), rw, 1e-12);
        EXPECT_NEAR(opt.l(), rl, 1e-12);
        EXPECT_GT(regret(Eq(opt.w() + 1e-3, opt.l()), m, h), 0.0);
        EXPECT_GT(regret(Eq(opt.w(), opt.l() - 1e-3), m, h), 0.0);
    }
}

TEST(LinearizedRegret, ExactAtExpansionPoint) {
    Draw d;
    for (int i = 0; i < 200; ++i) {
        const auto m = d.model();
        const auto e = d.eq();
        const Belief b(d.uni(-3, 3), d.uni(0, 1));
        EXPECT_EQ(linearized_regret(e, m, b, 0.0), regret(e, m, b.h_est()));
    }
    const Model m(0, 1, 1);
    const Belief b(1.0, 0.3);
    EXPECT_NEAR(linearized_regret(detail::matched_equalizer(m, 1.0), m, b, 0.0), 0.0, 1e-16);
}

TEST(LinearizedRegret, MatchesSurrogateTable) {
    // tabulate the surrogate on a dh grid with the reference formula
    const Model m(0, 1, 1);
    const Belief b(1.0, 0.2);
    const Eq e(0.4918, 0);
    for (int i = 0; i <= 40; ++i) {
        const double dh = -0.2 + 0.4 * i / 40;
        EXPECT_NEAR(linearized_regret(e, m, b, dh), ref::linearized_regret(0.4918, 0, 1.0, dh, stats(m)),
                    1e-14);
    }
    // dh = +eps by hand: h = 1.2, slope at h_est = 1 is 0.5
    const double mse_end = 1 + 0.4918 * 0.4918 * (1.44 + 1) - 2 * 0.4918 * 1.2;
    EXPECT_NEAR(linearized_regret(e, m, b, 0.2), mse_end - 0.5 + 0.2 * 0.5, 1e-14);
}

TEST(LinearizedRegret, RejectsOutOfRangeDh) {
    const Model m(0, 1, 1);
    EXPECT_THROW(linearized_regret(Eq(1, 0), m, Belief(1, 0.1), 0.1000001), std::out_of_range);
    EXPECT_THROW(linearized_regret(Eq(1, 0), m, Belief(1, 0), 1e-300), std::out_of_range);
}

TEST(MseProperties, ConvexInCoefficients) {
    Draw d;
    for (int i = 0; i < 500; ++i) {
        const auto m = d.model();
        const double h = d.uni(-3, 3);
        const auto a = d.eq(), c = d.eq();
        const Eq mid((a.w() + c.w()) / 2, (a.l() + c.l()) / 2);
        EXPECT_LE(mse(mid, m, h), (mse(a, m, h) + mse(c, m, h)) / 2 + 1e-12);
    }
}

TEST(MseProperties, EndpointMaximumOverDhGrid) {
    Draw d;
    for (int i = 0; i < 200; ++i) {
        const auto m = d.model();
        const auto e = d.eq();
        const Belief b(d.uni(-3, 3), d.uni(0, 1));
        double grid_max = -INFINITY;
        for (int k = 0; k < 1001; ++k) {
            const double h = k == 1000 ? b.upper() : b.lower() + 2 * b.epsilon() * k / 1000;
            grid_max = std::max(grid_max, mse(e, m, h));
        }
        const double ends = std::max(mse(e, m, b.lower()), mse(e, m, b.upper()));
        EXPECT_NEAR(grid_max, ends, 1e-12);
    }
}

TEST(QuadraticForm, CombinationAndMinimizer) {
    const Model m(0.4, 2, 0.5);
    const auto q = mse_form(m, 1.3);
    const auto u = q.minimizer();
    const auto [rw, rl] = ref::optimum(1.3, stats(m));
    EXPECT_NEAR(u(0), rw, 1e-13);
    EXPECT_NEAR(u(1), rl, 1e-13);
    EXPECT_NEAR(q.minimum(), mmse_mse_at(m, 1.3), 1e-13);
    const auto r = mse_form(m, -0.2);
    const Vector2<double> p(0.3, -0.7);
    EXPECT_NEAR((0.25 * q + 0.75 * r)(p), 0.25 * q(p) + 0.75 * r(p), 1e-14);
}

TEST(Templates, FloatInstantiation) {
    const SignalModel<float> m(0.0f, 1.0f, 1.0f);
    const AffineEqualizer<float> e(0.5f, 0.0f);
    EXPECT_FLOAT_EQ(mse(e, m, 1.0f), 0.5f);
    EXPECT_FLOAT_EQ(mmse_mse_at(m, 1.0f), 0.5f);
}
