// Closed-form affine equalizers under a bounded channel error |h - h_est| <= eps.
//
//   mmse            matched to h_est
//   minimax         minimizes the worst-case MSE over the interval
//   minimin         minimizes the best-case MSE over the interval
//   minimax-regret  minimizes the worst-case linearized regret
//
// Every solver is a pure function of (model, belief).
#pragma once

#include <cmath>
#include <stdexcept>

#include "robeq/errors.hpp"
#include "robeq/evaluators.hpp"
#include "robeq/model.hpp"

namespace robeq {

namespace detail {

/// sign with sign(0) = +1.
template <typename Scalar> Scalar sign_nonneg(Scalar v) {
    return v >= Scalar(0) ? Scalar(1) : Scalar(-1);
}

/// MMSE coefficients for an assumed channel h.
template <typename Scalar>
AffineEqualizer<Scalar> matched_equalizer(const SignalModel<Scalar> &m, Scalar h) {
    const Scalar d = h * h * m.var_x() + m.var_n();
    return {h * m.var_x() / d, m.mean_x() * m.var_n() / d};
}

} // namespace detail

template <typename Scalar>
SolveReport<Scalar> mmse_equalizer(const SignalModel<Scalar> &m, Scalar h_est) {
    auto eq = detail::matched_equalizer(m, h_est);
    return {eq, Method::MMSE, Branch::Mmse, mse(eq, m, h_est)};
}

/**
 * Minimax equalizer.
 *
 * Branch 1 matches the channel end of the interval closest to zero; it is
 * optimal exactly when that candidate's own end stays the worse of the two,
 * (|h_est| - eps) eps E[x^2] < var_n. Otherwise the optimum sits on the
 * equal-MSE line and branch 2 returns w = 1/h_est, l = 0, which is that
 * optimum for zero-mean signals. When the interval contains h = 0 only the
 * mean predictor (0, mean_x) guards the worst case.
 */
template <typename Scalar>
SolveReport<Scalar> minimax_equalizer(const SignalModel<Scalar> &m,
                                      const ChannelBelief<Scalar> &b) {
    const Scalar h0 = b.h_est(), e = b.epsilon();
    const Scalar mag = std::abs(h0);
    auto report = [&](AffineEqualizer<Scalar> eq, Branch br) {
        return SolveReport<Scalar>{eq, Method::Minimax, br, worst_case_mse(eq, m, b)};
    };
    if (e > Scalar(0) && mag <= e)
        return report(AffineEqualizer<Scalar>(Scalar(0), m.mean_x()), Branch::MinimaxZeroInSet);
    if ((mag - e) * e * m.second_moment_x() < m.var_n()) {
        const Scalar towards_zero = h0 - detail::sign_nonneg(h0) * e;
        return report(detail::matched_equalizer(m, towards_zero), Branch::MinimaxBranch1);
    }
    return report(AffineEqualizer<Scalar>(Scalar(1) / h0, Scalar(0)), Branch::MinimaxBranch2);
}

/// Minimin equalizer: MMSE matched to the interval end farthest from zero.
template <typename Scalar>
SolveReport<Scalar> minimin_equalizer(const SignalModel<Scalar> &m,
                                      const ChannelBelief<Scalar> &b) {
    const Scalar favorable = b.h_est() + b.epsilon() * detail::sign_nonneg(b.h_est());
    auto eq = detail::matched_equalizer(m, favorable);
    return {eq, Method::Minimin, Branch::Minimin, best_case_mse(eq, m, b)};
}

/**
 * Signed tie indicators for the two regret candidates.
 *
 * f >= 0 iff the candidate matched to h_est + eps has its +eps surrogate no
 * smaller than its -eps surrogate; g <= 0 iff the candidate matched to
 * h_est - eps has the -eps surrogate no smaller. Both are the tie expression
 *   h_est + l mean_x / (w E[x^2]) - 1/w + h_est var_n var_x^2 / (w^2 E[x^2] d0^2)
 * evaluated in closed form at the candidate; d0 = h_est^2 var_x + var_n.
 */
template <typename Scalar> struct RegretIndicators {
    Scalar f;
    Scalar g;
};

template <typename Scalar>
RegretIndicators<Scalar> regret_indicators(const SignalModel<Scalar> &m,
                                           const ChannelBelief<Scalar> &b) {
    const Scalar h0 = b.h_est(), e = b.epsilon();
    const Scalar vx = m.var_x(), vn = m.var_n(), x2 = m.second_moment_x();
    const Scalar d0 = h0 * h0 * vx + vn;
    auto indicator = [&](Scalar a, Scalar shift) {
        if (a == Scalar(0))
            throw SingularBelief("minimax-regret undefined for |h_est| == epsilon");
        const Scalar d = a * a * vx + vn;
        const Scalar ratio = d / d0;
        return shift - vn / (a * x2) + h0 * vn * ratio * ratio / (a * a * x2);
    };
    return {indicator(h0 + e, -e), indicator(h0 - e, e)};
}

namespace detail {

/**
 * Minimizes max(R(+eps), R(-eps)) on the set where the two surrogates tie.
 *
 * Both are convex quadratics in (w, l); along the Lagrangian path
 * u(t) = argmin t R(+eps) + (1 - t) R(-eps) the gap R(+eps) - R(-eps) is
 * non-increasing in t, and its root is the constrained optimum. Bisection
 * runs on t in [0, 1].
 */
template <typename Scalar>
AffineEqualizer<Scalar> tie_curve_solve(const SignalModel<Scalar> &m,
                                        const ChannelBelief<Scalar> &b,
                                        Scalar tolerance = Scalar(1e-12),
                                        int max_iterations = 200) {
    const Scalar e = b.epsilon();
    const auto plus = linearized_regret_form(m, b, e);
    const auto minus = linearized_regret_form(m, b, -e);
    auto path = [&](Scalar t) -> Vector2<Scalar> {
        return (t * plus + (Scalar(1) - t) * minus).minimizer();
    };
    auto gap = [&](const Vector2<Scalar> &u) { return plus(u) - minus(u); };

    Scalar lo = 0, hi = 1;
    Vector2<Scalar> u_lo = path(lo), u_hi = path(hi);
    const Scalar gap_lo = gap(u_lo), gap_hi = gap(u_hi);
    if (gap_lo == Scalar(0)) return AffineEqualizer<Scalar>(u_lo);
    if (gap_hi == Scalar(0)) return AffineEqualizer<Scalar>(u_hi);
    if (!(gap_lo > Scalar(0) && gap_hi < Scalar(0)))
        throw Case4SolveFailure("tie-curve search does not bracket a root");

    for (int it = 0; it < max_iterations && hi - lo > tolerance; ++it) {
        const Scalar mid = (lo + hi) / Scalar(2);
        const Vector2<Scalar> u = path(mid);
        const Scalar g = gap(u);
        if (g == Scalar(0)) return AffineEqualizer<Scalar>(u);
        if (g > Scalar(0)) {
            lo = mid;
            u_lo = u;
        } else {
            hi = mid;
            u_hi = u;
        }
    }
    const AffineEqualizer<Scalar> a(u_lo), c(u_hi);
    return worst_case_linearized_regret(a, m, b) <= worst_case_linearized_regret(c, m, b) ? a
                                                                                            : c;
}

} // namespace detail

/**
 * Minimax-regret equalizer for the first-order regret surrogate.
 *
 * Candidates are the MMSE equalizers matched to h_est + eps and h_est - eps.
 * Cases are tested in order, first match wins:
 *   1: f >= 0, g >= 0  -> candidate +eps
 *   2: f <= 0, g <= 0  -> candidate -eps
 *   3: f >= 0, g <= 0  -> better candidate, ties to +eps
 *   4: otherwise       -> optimum on the tie curve
 */
template <typename Scalar>
SolveReport<Scalar> minimax_regret_equalizer(const SignalModel<Scalar> &m,
                                             const ChannelBelief<Scalar> &b) {
    auto report = [&](AffineEqualizer<Scalar> eq, Branch br) {
        return SolveReport<Scalar>{eq, Method::MinimaxRegret, br,
                                   worst_case_linearized_regret(eq, m, b)};
    };
    const Scalar h0 = b.h_est(), e = b.epsilon();
    if (e == Scalar(0)) return report(detail::matched_equalizer(m, h0), Branch::RegretCase1);

    const auto [f, g] = regret_indicators(m, b);
    const auto up = detail::matched_equalizer(m, h0 + e);
    const auto down = detail::matched_equalizer(m, h0 - e);
    const Scalar zero(0);
    if (f >= zero && g >= zero) return report(up, Branch::RegretCase1);
    if (f <= zero && g <= zero) return report(down, Branch::RegretCase2);
    if (f >= zero && g <= zero) {
        const bool up_wins =
            worst_case_linearized_regret(up, m, b) <= worst_case_linearized_regret(down, m, b);
        return report(up_wins ? up : down, Branch::RegretCase3);
    }
    return report(detail::tie_curve_solve(m, b), Branch::RegretCase4);
}

template <typename Scalar>
SolveReport<Scalar> solve(Method method, const SignalModel<Scalar> &m,
                          const ChannelBelief<Scalar> &b) {
    switch (method) {
    case Method::MMSE: return mmse_equalizer(m, b.h_est());
    case Method::Minimax: return minimax_equalizer(m, b);
    case Method::Minimin: return minimin_equalizer(m, b);
    case Method::MinimaxRegret: return minimax_regret_equalizer(m, b);
    }
    throw std::invalid_argument("unknown method");
}

/**
 * SNR-form solutions for zero-mean signals (l = 0). Same branches as the
 * general solvers; MMSE and minimax-regret have no separate form and
 * delegate.
 */
template <typename Scalar>
SolveReport<Scalar> zero_mean_fast_path(const SignalModel<Scalar> &m,
                                        const ChannelBelief<Scalar> &b, Method method) {
    if (m.mean_x() != Scalar(0))
        throw std::invalid_argument("zero-mean fast path requires mean_x == 0");
    const Scalar h0 = b.h_est(), e = b.epsilon(), inv_snr = Scalar(1) / m.snr();
    auto gain = [&](Scalar a) { return a / (a * a + inv_snr); };
    switch (method) {
    case Method::Minimax: {
        auto report = [&](Scalar w, Branch br) {
            AffineEqualizer<Scalar> eq(w, Scalar(0));
            return SolveReport<Scalar>{eq, method, br, worst_case_mse(eq, m, b)};
        };
        const Scalar mag = std::abs(h0);
        if (e > Scalar(0) && mag <= e) return report(Scalar(0), Branch::MinimaxZeroInSet);
        if (e * (mag - e) < inv_snr)
            return report(gain(h0 - detail::sign_nonneg(h0) * e), Branch::MinimaxBranch1);
        return report(Scalar(1) / h0, Branch::MinimaxBranch2);
    }
    case Method::Minimin: {
        AffineEqualizer<Scalar> eq(gain(h0 + e * detail::sign_nonneg(h0)), Scalar(0));
        return {eq, method, Branch::Minimin, best_case_mse(eq, m, b)};
    }
    case Method::MMSE:
    case Method::MinimaxRegret: return solve(method, m, b);
    }
    throw std::invalid_argument("unknown method");
}

} // namespace robeq
