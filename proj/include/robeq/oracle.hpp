// Brute-force reference solvers used to check the closed forms.
//
// They exploit only convexity of the objectives in (w, l) and the
// endpoint/vertex structure in h; none of them calls a closed-form solver.
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <span>

#include "robeq/errors.hpp"
#include "robeq/evaluators.hpp"
#include "robeq/model.hpp"

namespace robeq::oracle {

using Model = SignalModel<double>;
using Belief = ChannelBelief<double>;
using Equalizer = AffineEqualizer<double>;
using Report = SolveReport<double>;

struct GridSpec {
    double w_lo = -5, w_hi = 5;
    double l_lo = -5, l_hi = 5;
    int coarse_points = 101;
    int refine_rounds = 10;
    int dh_points = 1001;

    /// Throws std::invalid_argument on inconsistent bounds or counts.
    void validate() const;

    /// Box centered on the MMSE point with half-width 5 max(|w0|, |l0|, 1).
    static GridSpec around_mmse(const Model &m, const Belief &b);
};

struct GridSearchResult {
    Vector2<double> argmin;
    double value;
    double coarse_value;
    long evaluations;
};

/**
 * Coarse scan over the GridSpec box, then a nested line search (outer on w,
 * inner on l) in a window of two coarse steps around the incumbent. Each line
 * search runs refine_rounds of 10x zoom; the window is re-centred when the
 * result lands on its edge. Ties go to the lowest index.
 *
 * Throws BracketTooNarrow if the final incumbent is on the outer box edge.
 */
GridSearchResult grid_minimize(const std::function<double(const Vector2<double> &)> &objective,
                               const GridSpec &g);

Report oracle_minimax(const Model &m, const Belief &b, const GridSpec &g);
Report oracle_minimin(const Model &m, const Belief &b, const GridSpec &g);
Report oracle_minimax_regret(const Model &m, const Belief &b, const GridSpec &g);

inline Report oracle_minimax(const Model &m, const Belief &b) {
    return oracle_minimax(m, b, GridSpec::around_mmse(m, b));
}
inline Report oracle_minimin(const Model &m, const Belief &b) {
    return oracle_minimin(m, b, GridSpec::around_mmse(m, b));
}
inline Report oracle_minimax_regret(const Model &m, const Belief &b) {
    return oracle_minimax_regret(m, b, GridSpec::around_mmse(m, b));
}

/// Oracle matching a method; MMSE gets a plain grid search on the MSE at h_est.
Report oracle_for(Method method, const Model &m, const Belief &b);

/**
 * Checks min_{x,y} min_z f == min_z min_{x,y} f on finite grids by evaluating
 * both nestings. Always true for nonempty grids; the point is to exercise it.
 */
template <typename F>
bool lemma1_check(std::span<const double> xs, std::span<const double> ys,
                  std::span<const double> zs, F &&f) {
    if (xs.empty() || ys.empty() || zs.empty())
        throw std::invalid_argument("lemma1_check needs nonempty grids");
    constexpr double inf = std::numeric_limits<double>::infinity();
    double outer_xy = inf;
    for (double x : xs)
        for (double y : ys) {
            double inner = inf;
            for (double z : zs) inner = std::min(inner, static_cast<double>(f(x, y, z)));
            outer_xy = std::min(outer_xy, inner);
        }
    double outer_z = inf;
    for (double z : zs) {
        double inner = inf;
        for (double x : xs)
            for (double y : ys) inner = std::min(inner, static_cast<double>(f(x, y, z)));
        outer_z = std::min(outer_z, inner);
    }
    return outer_xy == outer_z;
}

} // namespace robeq::oracle
