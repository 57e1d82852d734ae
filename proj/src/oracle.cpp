#include "robeq/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace robeq::oracle {

namespace {

constexpr int kMaxRecentres = 64;
constexpr int kLinePoints = 21;
constexpr double kEdgeFraction = 1e-6;

bool on_outer_edge(const Vector2<double> &u, const GridSpec &g) {
    return u(0) <= g.w_lo || u(0) >= g.w_hi || u(1) <= g.l_lo || u(1) >= g.l_hi;
}

Report finish(Method method, Branch branch, const Equalizer &eq, const Model &m,
              const Belief &b) {
    double objective = 0;
    switch (method) {
    case Method::MMSE: objective = mse(eq, m, b.h_est()); break;
    case Method::Minimax: objective = worst_case_mse(eq, m, b); break;
    case Method::Minimin: objective = best_case_mse(eq, m, b); break;
    case Method::MinimaxRegret: objective = worst_case_linearized_regret(eq, m, b); break;
    }
    return {eq, method, branch, objective};
}

} // namespace

void GridSpec::validate() const {
    if (!(w_lo < w_hi) || !(l_lo < l_hi))
        throw std::invalid_argument("grid bounds must satisfy lo < hi");
    if (!std::isfinite(w_lo) || !std::isfinite(w_hi) || !std::isfinite(l_lo) ||
        !std::isfinite(l_hi))
        throw std::invalid_argument("grid bounds must be finite");
    if (coarse_points < 3) throw std::invalid_argument("coarse_points must be >= 3");
    if (dh_points < 3 || dh_points % 2 == 0)
        throw std::invalid_argument("dh_points must be odd and >= 3");
    if (refine_rounds < 0) throw std::invalid_argument("refine_rounds must be >= 0");
}

GridSpec GridSpec::around_mmse(const Model &m, const Belief &b) {
    const Vector2<double> centre = mse_form(m, b.h_est()).minimizer();
    const double half = 5.0 * std::max({std::abs(centre(0)), std::abs(centre(1)), 1.0});
    GridSpec g;
    g.w_lo = centre(0) - half;
    g.w_hi = centre(0) + half;
    g.l_lo = centre(1) - half;
    g.l_hi = centre(1) + half;
    return g;
}

GridSearchResult grid_minimize(const std::function<double(const Vector2<double> &)> &objective,
                               const GridSpec &g) {
    g.validate();
    const int n = g.coarse_points;
    GridSearchResult r{Vector2<double>::Zero(), std::numeric_limits<double>::infinity(), 0, 0};
    auto eval = [&](double w, double l) {
        ++r.evaluations;
        return objective(Vector2<double>(w, l));
    };
    auto node = [](double lo, double hi, int i, int count) {
        return i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1);
    };

    for (int i = 0; i < n; ++i) {
        const double w = node(g.w_lo, g.w_hi, i, n);
        for (int j = 0; j < n; ++j) {
            const double l = node(g.l_lo, g.l_hi, j, n);
            const double v = eval(w, l);
            if (v < r.value) {
                r.value = v;
                r.argmin = Vector2<double>(w, l);
            }
        }
    }
    r.coarse_value = r.value;

    // Zooming 1D scan; the first index wins ties. Returns (argmin, value).
    auto line = [&](double lo, double hi, const std::function<double(double)> &f) {
        double best_x = lo, best_v = std::numeric_limits<double>::infinity();
        for (int round = 0; round < g.refine_rounds; ++round) {
            for (int i = 0; i < kLinePoints; ++i) {
                const double x = node(lo, hi, i, kLinePoints);
                const double v = f(x);
                if (v < best_v) {
                    best_v = v;
                    best_x = x;
                }
            }
            const double step = (hi - lo) / (kLinePoints - 1);
            const double nlo = std::max(lo, best_x - step), nhi = std::min(hi, best_x + step);
            lo = nlo;
            hi = nhi;
        }
        return std::pair{best_x, best_v};
    };

    if (g.refine_rounds > 0) {
        const Vector2<double> half(2 * (g.w_hi - g.w_lo) / (n - 1),
                                   2 * (g.l_hi - g.l_lo) / (n - 1));
        Vector2<double> centre = r.argmin;
        for (int k = 0; k < kMaxRecentres; ++k) {
            const double w0 = std::max(centre(0) - half(0), g.w_lo);
            const double w1 = std::min(centre(0) + half(0), g.w_hi);
            const double l0 = std::max(centre(1) - half(1), g.l_lo);
            const double l1 = std::min(centre(1) + half(1), g.l_hi);
            auto inner = [&](double w) {
                return line(l0, l1, [&](double l) { return eval(w, l); });
            };
            const auto [w, v] = line(w0, w1, [&](double w) { return inner(w).second; });
            const double l = inner(w).first;
            const double value = eval(w, l);
            if (value < r.value) {
                r.value = value;
                r.argmin = Vector2<double>(w, l);
            }
            const double tw = kEdgeFraction * (w1 - w0), tl = kEdgeFraction * (l1 - l0);
            const bool at_window_edge =
                (w - w0 <= tw && w0 > g.w_lo) || (w1 - w <= tw && w1 < g.w_hi) ||
                (l - l0 <= tl && l0 > g.l_lo) || (l1 - l <= tl && l1 < g.l_hi);
            if (!at_window_edge) break;
            centre = Vector2<double>(w, l);
        }
    }
    if (!std::isfinite(r.value)) throw std::domain_error("grid objective is not finite");
    if (on_outer_edge(r.argmin, g))
        throw BracketTooNarrow("grid incumbent on the search box edge");
    return r;
}

Report oracle_minimax(const Model &m, const Belief &b, const GridSpec &g) {
    const auto lo = mse_form(m, b.lower());
    const auto hi = mse_form(m, b.upper());
    const auto r = grid_minimize(
        [&](const Vector2<double> &u) { return std::max(lo(u), hi(u)); }, g);
    return finish(Method::Minimax, Branch::OracleGrid, Equalizer(r.argmin), m, b);
}

Report oracle_minimax_regret(const Model &m, const Belief &b, const GridSpec &g) {
    const double e = b.epsilon();
    const auto minus = linearized_regret_form(m, b, -e);
    const auto centre = linearized_regret_form(m, b, 0.0);
    const auto plus = linearized_regret_form(m, b, e);
    const auto r = grid_minimize(
        [&](const Vector2<double> &u) { return std::max({minus(u), centre(u), plus(u)}); }, g);
    return finish(Method::MinimaxRegret, Branch::OracleGrid, Equalizer(r.argmin), m, b);
}

// Interchanges the two minimizations: scan dh, minimize the quadratic in
// (w, l) exactly for each, keep the best dh and zoom.
Report oracle_minimin(const Model &m, const Belief &b, const GridSpec &g) {
    g.validate();
    const double e = b.epsilon(), h0 = b.h_est();
    const int k = g.dh_points;
    auto inner = [&](double dh) { return mse_form(m, h0 + dh).minimum(); };

    double best_dh = 0, best_v = std::numeric_limits<double>::infinity();
    double lo = -e, hi = e;
    for (int round = 0; round <= g.refine_rounds; ++round) {
        for (int i = 0; i < k; ++i) {
            const double dh = i == k - 1 ? hi : lo + (hi - lo) * i / (k - 1);
            const double v = inner(dh);
            if (v < best_v) {
                best_v = v;
                best_dh = dh;
            }
        }
        const double step = (hi - lo) / (k - 1);
        lo = std::max(-e, best_dh - step);
        hi = std::min(e, best_dh + step);
    }
    const Vector2<double> u = mse_form(m, h0 + best_dh).minimizer();
    if (on_outer_edge(u, g) || u(0) < g.w_lo || u(0) > g.w_hi || u(1) < g.l_lo || u(1) > g.l_hi)
        throw BracketTooNarrow("minimin oracle solution outside the search box");
    return finish(Method::Minimin, Branch::OracleDhScan, Equalizer(u), m, b);
}

Report oracle_for(Method method, const Model &m, const Belief &b) {
    switch (method) {
    case Method::Minimax: return oracle_minimax(m, b);
    case Method::Minimin: return oracle_minimin(m, b);
    case Method::MinimaxRegret: return oracle_minimax_regret(m, b);
    case Method::MMSE: {
        const auto q = mse_form(m, b.h_est());
        const auto r = grid_minimize(q, GridSpec::around_mmse(m, b));
        return finish(Method::MMSE, Branch::OracleGrid, Equalizer(r.argmin), m, b);
    }
    }
    throw std::invalid_argument("unknown method");
}

} // namespace robeq::oracle
