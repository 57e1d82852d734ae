// Exact worst/best-case evaluators over the channel interval.
//
// For fixed (w, l) the MSE is a quadratic in h with leading coefficient
// w^2 E[x^2] >= 0, so its maximum over an interval sits at an endpoint and its
// minimum is either the vertex or an endpoint.
#pragma once

#include <algorithm>

#include "robeq/model.hpp"

namespace robeq {

template <typename Scalar>
Scalar worst_case_mse(const AffineEqualizer<Scalar> &eq, const SignalModel<Scalar> &m,
                      const ChannelBelief<Scalar> &b) {
    return std::max(mse(eq, m, b.lower()), mse(eq, m, b.upper()));
}

template <typename Scalar>
Scalar best_case_mse(const AffineEqualizer<Scalar> &eq, const SignalModel<Scalar> &m,
                     const ChannelBelief<Scalar> &b) {
    const Scalar ends = std::min(mse(eq, m, b.lower()), mse(eq, m, b.upper()));
    const Scalar x2 = m.second_moment_x();
    const Scalar curvature = eq.w() * eq.w() * x2;
    if (!(curvature > Scalar(0))) return ends;
    const Scalar vertex = eq.w() * (x2 - eq.l() * m.mean_x()) / curvature;
    if (vertex > b.lower() && vertex < b.upper())
        return std::min(ends, mse(eq, m, vertex));
    return ends;
}

/// Maximum of the linearized regret over dh in {-eps, 0, +eps}. The surrogate
/// is convex in dh, so the endpoints already attain the interval maximum; the
/// centre is included so that eps = 0 reduces to the plain regret.
template <typename Scalar>
Scalar worst_case_linearized_regret(const AffineEqualizer<Scalar> &eq,
                                    const SignalModel<Scalar> &m,
                                    const ChannelBelief<Scalar> &b) {
    const Scalar e = b.epsilon();
    return std::max({linearized_regret(eq, m, b, -e), linearized_regret(eq, m, b, Scalar(0)),
                     linearized_regret(eq, m, b, e)});
}

} // namespace robeq
