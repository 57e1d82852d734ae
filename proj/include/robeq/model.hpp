// Scalar channel model y = h x + n with an affine equalizer x_hat = w y + l.
//
// Everything here is an exact population quantity: the MSE of an affine
// equalizer depends on the signal only through its mean and variance, so no
// sample statistics appear in this header.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace robeq {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

namespace detail {
template <typename Scalar> bool finite(Scalar v) { return std::isfinite(v); }
} // namespace detail

/**
 * Second-order statistics of the transmitted symbol and the additive noise.
 *
 * The noise is zero mean and independent of the symbol.
 */
template <typename Scalar = double> class SignalModel {
  public:
    SignalModel(Scalar mean_x, Scalar var_x, Scalar var_n)
        : mean_x_(mean_x), var_x_(var_x), var_n_(var_n) {
        if (!detail::finite(mean_x))
            throw std::invalid_argument("mean_x must be finite");
        if (!detail::finite(var_x) || !(var_x > Scalar(0)))
            throw std::invalid_argument("var_x must be finite and > 0");
        if (!detail::finite(var_n) || !(var_n > Scalar(0)))
            throw std::invalid_argument("var_n must be finite and > 0");
    }

    Scalar mean_x() const { return mean_x_; }
    Scalar var_x() const { return var_x_; }
    Scalar var_n() const { return var_n_; }

    /// E[x^2] = var_x + mean_x^2.
    Scalar second_moment_x() const { return var_x_ + mean_x_ * mean_x_; }

    /// var_x / var_n.
    Scalar snr() const { return var_x_ / var_n_; }

    bool operator==(const SignalModel &) const = default;

  private:
    Scalar mean_x_;
    Scalar var_x_;
    Scalar var_n_;
};

/// Channel estimate and the radius of the interval [h_est - eps, h_est + eps]
/// known to contain the true channel. A zero radius is the perfectly-known case.
template <typename Scalar = double> class ChannelBelief {
  public:
    ChannelBelief(Scalar h_est, Scalar epsilon) : h_est_(h_est), epsilon_(epsilon) {
        if (!detail::finite(h_est))
            throw std::invalid_argument("h_est must be finite");
        if (!detail::finite(epsilon) || epsilon < Scalar(0))
            throw std::invalid_argument("epsilon must be finite and >= 0");
    }

    Scalar h_est() const { return h_est_; }
    Scalar epsilon() const { return epsilon_; }
    Scalar lower() const { return h_est_ - epsilon_; }
    Scalar upper() const { return h_est_ + epsilon_; }

    bool operator==(const ChannelBelief &) const = default;

  private:
    Scalar h_est_;
    Scalar epsilon_;
};

/// Coefficients (w, l) of x_hat = w * y + l.
template <typename Scalar = double> class AffineEqualizer {
  public:
    AffineEqualizer(Scalar w, Scalar l) : coeffs_(w, l) {
        if (!detail::finite(w) || !detail::finite(l))
            throw std::invalid_argument("equalizer coefficients must be finite");
    }
    explicit AffineEqualizer(const Vector2<Scalar> &u) : AffineEqualizer(u(0), u(1)) {}

    Scalar w() const { return coeffs_(0); }
    Scalar l() const { return coeffs_(1); }
    const Vector2<Scalar> &coeffs() const { return coeffs_; }

    Scalar operator()(Scalar y) const { return coeffs_(0) * y + coeffs_(1); }

    bool operator==(const AffineEqualizer &other) const { return coeffs_ == other.coeffs_; }

  private:
    Vector2<Scalar> coeffs_;
};

enum class Method { MMSE, Minimax, Minimin, MinimaxRegret };

inline constexpr Method kAllMethods[] = {Method::MMSE, Method::Minimax, Method::Minimin,
                                         Method::MinimaxRegret};

/// Short CLI / CSV name: mmse, minimax, minimin, minimax-regret.
inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::MMSE: return "mmse";
    case Method::Minimax: return "minimax";
    case Method::Minimin: return "minimin";
    case Method::MinimaxRegret: return "minimax-regret";
    }
    return "?";
}

inline Method parse_method(std::string_view name) {
    for (Method m : kAllMethods)
        if (method_name(m) == name) return m;
    if (name == "regret") return Method::MinimaxRegret;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

/// Which closed-form branch (or numerical route) produced a solution.
enum class Branch {
    Mmse,
    MinimaxBranch1,
    MinimaxBranch2,
    MinimaxZeroInSet,
    Minimin,
    RegretCase1,
    RegretCase2,
    RegretCase3,
    RegretCase4,
    OracleGrid,
    OracleDhScan,
};

inline std::string_view branch_label(Branch b) {
    switch (b) {
    case Branch::Mmse: return "mmse";
    case Branch::MinimaxBranch1: return "Thm1-branch1";
    case Branch::MinimaxBranch2: return "Thm1-branch2";
    case Branch::MinimaxZeroInSet: return "Thm1-zero-in-set";
    case Branch::Minimin: return "Thm2";
    case Branch::RegretCase1: return "Thm3-case1";
    case Branch::RegretCase2: return "Thm3-case2";
    case Branch::RegretCase3: return "Thm3-case3";
    case Branch::RegretCase4: return "Thm3-case4";
    case Branch::OracleGrid: return "oracle-grid";
    case Branch::OracleDhScan: return "oracle-dh-scan";
    }
    return "?";
}

template <typename Scalar = double> struct SolveReport {
    AffineEqualizer<Scalar> equalizer;
    Method method;
    Branch branch;
    Scalar objective;
};

/**
 * Quadratic u^T H u - 2 b^T u + c in u = (w, l).
 *
 * Non-negative combinations of forms stay forms, which is how the tie-curve
 * solver builds its Lagrangian.
 */
template <typename Scalar = double> struct QuadraticForm {
    Matrix2<Scalar> hessian;
    Vector2<Scalar> linear;
    Scalar constant;

    Scalar operator()(const Vector2<Scalar> &u) const {
        return u.dot(hessian * u) - Scalar(2) * linear.dot(u) + constant;
    }

    /// Unique minimizer; requires hessian positive definite.
    Vector2<Scalar> minimizer() const { return hessian.ldlt().solve(linear); }

    Scalar minimum() const { return (*this)(minimizer()); }

    friend QuadraticForm operator+(const QuadraticForm &a, const QuadraticForm &b) {
        return {a.hessian + b.hessian, a.linear + b.linear, a.constant + b.constant};
    }
    friend QuadraticForm operator*(Scalar s, const QuadraticForm &q) {
        return {s * q.hessian, s * q.linear, s * q.constant};
    }
};

/// MSE(w, l; h) as a quadratic form in (w, l).
template <typename Scalar>
QuadraticForm<Scalar> mse_form(const SignalModel<Scalar> &m, Scalar h) {
    const Scalar x2 = m.second_moment_x();
    QuadraticForm<Scalar> q;
    q.hessian << h * h * x2 + m.var_n(), h * m.mean_x(), h * m.mean_x(), Scalar(1);
    q.linear << h * x2, m.mean_x();
    q.constant = x2;
    return q;
}

/// Exact E[(x - w(h x + n) - l)^2].
template <typename Scalar>
Scalar mse(const AffineEqualizer<Scalar> &eq, const SignalModel<Scalar> &m, Scalar h) {
    const Scalar w = eq.w(), l = eq.l();
    const Scalar x2 = m.second_moment_x(), xm = m.mean_x();
    return x2 + w * w * (h * h * x2 + m.var_n()) + l * l - Scalar(2) * l * xm -
           Scalar(2) * w * h * x2 + Scalar(2) * w * l * h * xm;
}

/// MSE of the MMSE equalizer matched to a perfectly known channel h.
template <typename Scalar> Scalar mmse_mse_at(const SignalModel<Scalar> &m, Scalar h) {
    return m.var_n() * m.var_x() / (h * h * m.var_x() + m.var_n());
}

/// -d/dh of mmse_mse_at, i.e. 2 h var_n var_x^2 / (h^2 var_x + var_n)^2.
template <typename Scalar> Scalar mmse_mse_slope(const SignalModel<Scalar> &m, Scalar h) {
    const Scalar d = h * h * m.var_x() + m.var_n();
    return Scalar(2) * h * m.var_n() * m.var_x() * m.var_x() / (d * d);
}

/// Excess MSE over the MMSE equalizer matched to the true channel h.
template <typename Scalar>
Scalar regret(const AffineEqualizer<Scalar> &eq, const SignalModel<Scalar> &m, Scalar h) {
    return mse(eq, m, h) - mmse_mse_at(m, h);
}

/**
 * Regret with the MMSE term replaced by its first-order expansion about the
 * estimate: mse(h_est + dh) - mmse_mse_at(h_est) + dh * mmse_mse_slope(h_est).
 *
 * This surrogate can go negative away from dh = 0.
 */
template <typename Scalar>
Scalar linearized_regret(const AffineEqualizer<Scalar> &eq, const SignalModel<Scalar> &m,
                         const ChannelBelief<Scalar> &b, Scalar dh) {
    if (!(std::abs(dh) <= b.epsilon()))
        throw std::out_of_range("|dh| exceeds the uncertainty radius");
    const Scalar h0 = b.h_est();
    return mse(eq, m, h0 + dh) - mmse_mse_at(m, h0) + dh * mmse_mse_slope(m, h0);
}

/// linearized_regret as a quadratic form in (w, l) for a fixed dh.
template <typename Scalar>
QuadraticForm<Scalar> linearized_regret_form(const SignalModel<Scalar> &m,
                                             const ChannelBelief<Scalar> &b, Scalar dh) {
    const Scalar h0 = b.h_est();
    auto q = mse_form(m, h0 + dh);
    q.constant += -mmse_mse_at(m, h0) + dh * mmse_mse_slope(m, h0);
    return q;
}

} // namespace robeq
