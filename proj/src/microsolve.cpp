#include "eqfree/microsolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eqfree {

namespace {

bool all_finite(const Vec& u) { return u.allFinite(); }

}  // namespace

Trajectory rk4_fixed(const OdeRhs& f, double t0, double t1, const Vec& u0, double h) {
    const double span = t1 - t0;
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h", "step must be positive and finite");
    Trajectory traj;
    traj.push(t0, u0);
    if (span == 0.0) return traj;
    const double nreal = std::abs(span) / h;
    const long n = std::lround(nreal);
    if (n < 1 || std::abs(n * h - std::abs(span)) > 1e-9 * std::abs(span)) {
        throw ConfigError("h", "step " + std::to_string(h) + " does not divide the span " +
                                   std::to_string(std::abs(span)));
    }
    const double dt = span / static_cast<double>(n);
    Vec u = u0;
    traj.times.reserve(static_cast<std::size_t>(n) + 1);
    traj.states.reserve(static_cast<std::size_t>(n) + 1);
    for (long s = 0; s < n; ++s) {
        const double t = t0 + s * dt;
        const Vec k1 = f(t, u);
        const Vec k2 = f(t + 0.5 * dt, u + (0.5 * dt) * k1);
        const Vec k3 = f(t + 0.5 * dt, u + (0.5 * dt) * k2);
        const Vec k4 = f(t + dt, u + dt * k3);
        Vec un = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!all_finite(un)) {
            throw NumericError("rk4_fixed: non-finite state after t = " + std::to_string(t), t,
                               static_cast<std::size_t>(s));
        }
        u = std::move(un);
        traj.push(s + 1 == n ? t1 : t0 + (s + 1) * dt, u);
    }
    return traj;
}

Trajectory rk45_adaptive(const OdeRhs& f, double t0, double t1, const Vec& u0,
                         const SolverOptions& opts) {
    if (t1 == t0) throw ConfigError("tspan", "integration span must be non-empty");
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) {
        throw ConfigError("rtol", "tolerances must be positive");
    }
    if (!all_finite(u0)) throw NumericError("rk45_adaptive: non-finite initial state", t0);

    // Dormand--Prince coefficients.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    // Error coefficients: 5th order minus embedded 4th order weights.
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double hmin = 1e-12 * span;
    const double hmax = std::min(opts.max_step, span);

    auto scale = [&](const Vec& a, const Vec& b) {
        return (opts.atol + opts.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
    };

    const std::vector<double>& outs = opts.output_times;
    std::size_t next_out = 0;
    for (std::size_t q = 0; q < outs.size(); ++q) {
        const double s = (outs[q] - t0) * dir;
        if (s < -1e-14 * span || s > span * (1 + 1e-14) ||
            (q > 0 && (outs[q] - outs[q - 1]) * dir <= 0.0)) {
            throw ConfigError("output_times", "output times must be monotone inside the span");
        }
    }

    Trajectory traj;
    double t = t0;
    Vec u = u0;
    Vec k1 = f(t, u);
    if (!all_finite(k1)) throw NumericError("rk45_adaptive: non-finite derivative", t);

    if (outs.empty()) {
        traj.push(t, u);
    } else {
        while (next_out < outs.size() && std::abs(outs[next_out] - t0) <= 1e-14 * span) {
            traj.push(outs[next_out], u);
            ++next_out;
        }
    }

    // Initial step from the problem scales (after Hairer, Norsett & Wanner).
    double h = opts.initial_step;
    if (!(h > 0.0)) {
        const Vec sc = scale(u, u);
        const double d0 = (u.array() / sc.array()).matrix().lpNorm<Eigen::Infinity>();
        const double d1 = (k1.array() / sc.array()).matrix().lpNorm<Eigen::Infinity>();
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h0 = std::min(h0, hmax);
        const Vec u1 = u + dir * h0 * k1;
        const Vec f1 = f(t + dir * h0, u1);
        const double d2 = ((f1 - k1).array() / sc.array()).matrix().lpNorm<Eigen::Infinity>() / h0;
        double h1;
        if (std::max(d1, d2) <= 1e-15) {
            // Locally constant solution: try the whole span and let the
            // error estimate decide.
            h1 = hmax;
        } else {
            h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        }
        h = std::min({100.0 * h0, h1, hmax});
        if (std::max(d1, d2) <= 1e-15) h = hmax;
    }
    h = std::min(h, hmax);

    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 5.0;
    constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
    double err_prev = 1e-4;
    long steps = 0;
    bool rejected_last = false;

    while ((t1 - t) * dir > 0.0) {
        if (++steps > opts.max_steps) {
            throw NumericError("rk45_adaptive: exceeded max_steps", t, static_cast<std::size_t>(steps));
        }
        if (h < hmin) {
            throw NumericError("rk45_adaptive: step size underflow (stiff or singular problem) at t = " +
                                   std::to_string(t),
                               t, static_cast<std::size_t>(steps));
        }
        double target = t1;
        if (next_out < outs.size()) target = outs[next_out];
        bool land = false;
        double hs = h;
        const double remain = (target - t) * dir;
        if (hs >= remain * (1.0 - 1e-12)) {
            hs = remain;
            land = true;
        }
        const double dt = dir * hs;

        const Vec k2 = f(t + c2 * dt, u + dt * (a21 * k1));
        const Vec k3 = f(t + c3 * dt, u + dt * (a31 * k1 + a32 * k2));
        const Vec k4 = f(t + c4 * dt, u + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = f(t + c5 * dt, u + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = f(t + dt, u + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vec un = u + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double tn = land ? target : t + dt;
        Vec k7 = f(tn, un);

        double err;
        if (!all_finite(un) || !all_finite(k7)) {
            err = std::numeric_limits<double>::infinity();
        } else {
            const Vec ev = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            err = (ev.array() / scale(u, un).array()).matrix().lpNorm<Eigen::Infinity>();
        }

        if (err <= 1.0) {
            double fac = (err == 0.0) ? fac_max
                                      : safety * std::pow(err, -alpha) * std::pow(err_prev, beta);
            fac = std::clamp(fac, fac_min, fac_max);
            if (rejected_last) fac = std::min(fac, 1.0);
            err_prev = std::max(err, 1e-4);
            t = tn;
            u = std::move(un);
            k1 = std::move(k7);
            if (land && next_out < outs.size()) {
                traj.push(t, u);
                ++next_out;
            } else if (outs.empty()) {
                traj.push(t, u);
            }
            // A landing step shortened only to hit a target keeps the
            // controller's previous proposal.
            const double hprop = std::min(hs * fac, hmax);
            h = (land && hs < h) ? std::min(h, hmax) : hprop;
            rejected_last = false;
        } else {
            const double fac = std::isfinite(err)
                                   ? std::max(fac_min, safety * std::pow(err, -alpha))
                                   : fac_min;
            h = hs * fac;
            rejected_last = true;
        }
    }
    return traj;
}

Vec interpolate(const Trajectory& traj, double t) {
    if (traj.empty()) throw ConfigError("trajectory", "cannot interpolate an empty trajectory");
    const auto& ts = traj.times;
    if (ts.size() == 1) {
        if (t == ts[0]) return traj.states[0];
        throw ConfigError("t", "time outside the trajectory range");
    }
    const bool fwd = ts.back() > ts.front();
    const double lo = fwd ? ts.front() : ts.back();
    const double hi = fwd ? ts.back() : ts.front();
    if (t < lo || t > hi) throw ConfigError("t", "time outside the trajectory range");
    // Find the bracketing interval in the direction of the time axis.
    std::size_t k;
    if (fwd) {
        k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    } else {
        k = static_cast<std::size_t>(
            std::upper_bound(ts.begin(), ts.end(), t, [](double a, double b) { return a > b; }) -
            ts.begin());
    }
    if (k >= ts.size()) return traj.states.back();
    if (k == 0) return traj.states.front();
    const double ta = ts[k - 1], tb = ts[k];
    const double w = (t - ta) / (tb - ta);
    return (1.0 - w) * traj.states[k - 1] + w * traj.states[k];
}

}  // namespace eqfree
