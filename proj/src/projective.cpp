#include "eqfree/projective.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "eqfree/io.hpp"

namespace eqfree {

double growth_factor(double lambda_dt, double r) {
    return std::exp(lambda_dt * r) * (1.0 + lambda_dt * (1.0 - r));
}

double min_burst_length(double beta, double Delta) {
    if (!(beta > 0.0)) throw ConfigError("beta", "fast rate must be positive");
    if (!(beta * Delta > 1.0)) {
        throw ConfigError("Delta", "beta*Delta must exceed 1 for projection to need damping");
    }
    return std::log(std::abs(beta * Delta)) / beta;
}

double sup_growth(double r) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("r", "burst ratio must lie in (0,1)");
    // G < 0 for x < x0 = −1/(1−r); |G| → 0 as x → −∞.  The extremum of the lobe
    // lies well inside [50·x0/r, x0].
    const double x0 = -1.0 / (1.0 - r);
    const double lo = 50.0 * x0 / r;
    auto negabs = [r](double x) { return -std::abs(growth_factor(x, r)); };
    std::uintmax_t iters = 500;
    const auto res = boost::math::tools::brent_find_minima(negabs, lo, x0,
                                                           std::numeric_limits<double>::digits, iters);
    return -res.second;
}

double stability_threshold() {
    // sup_growth decreases through 1 on (0.1, 0.5); bisect to full precision.
    auto h = [](double r) { return sup_growth(r) - 1.0; };
    auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16; };
    std::uintmax_t iters = 200;
    const auto br = boost::math::tools::bisect(h, 0.1, 0.5, tol, iters);
    return 0.5 * (br.first + br.second);
}

Vec slow_derivative_estimate(const Trajectory& traj, int q) {
    if (q < 2) throw ConfigError("q", "derivative window needs at least two points");
    if (traj.size() < static_cast<std::size_t>(q)) {
        throw ConfigError("q", "trajectory has " + std::to_string(traj.size()) +
                                   " samples, fewer than the window " + std::to_string(q));
    }
    const std::size_t n = traj.size();
    const std::size_t first = n - static_cast<std::size_t>(q);
    double tbar = 0.0;
    Vec ubar = Vec::Zero(traj.states[first].size());
    for (std::size_t s = first; s < n; ++s) {
        tbar += traj.times[s];
        ubar += traj.states[s];
    }
    tbar /= q;
    ubar /= q;
    double stt = 0.0;
    Vec stu = Vec::Zero(ubar.size());
    for (std::size_t s = first; s < n; ++s) {
        const double dt = traj.times[s] - tbar;
        stt += dt * dt;
        stu += dt * (traj.states[s] - ubar);
    }
    if (!(stt > 0.0)) throw NumericError("slow_derivative_estimate: coincident sample times");
    return stu / stt;
}

namespace {

/// Burst bookkeeping shared by the schemes.
class BurstRunner {
public:
    BurstRunner(const BurstFn& burst, DerivativeRule rule, int q, BurstLevel level, PIRun& run)
        : burst_(burst), rule_(std::move(rule)), q_(q), level_(level), run_(run) {}

    Trajectory operator()(double t0, const Vec& x0, double bT, bool accurate, std::size_t step) {
        Trajectory tr;
        try {
            tr = burst_(t0, x0, bT);
        } catch (const NumericError& e) {
            throw NumericError(std::string("burst failed in macro step ") + std::to_string(step) +
                                   ": " + e.what(),
                               t0, step);
        }
        check(tr, t0, bT, step);
        ++run_.burst_count;
        if (level_ == BurstLevel::All || (level_ == BurstLevel::Accurate && accurate)) {
            run_.bursts.push_back({tr, accurate, step});
        }
        return tr;
    }

    Vec slope(const Trajectory& tr) const {
        return rule_ ? rule_(tr) : slow_derivative_estimate(tr, q_);
    }

private:
    void check(const Trajectory& tr, double t0, double bT, std::size_t step) const {
        const double tol = 1e-9 * bT + 1e-14 * std::abs(t0);
        if (tr.size() < 2 || std::abs(tr.times.front() - t0) > tol ||
            std::abs(tr.times.back() - (t0 + bT)) > tol) {
            throw ConfigError("burst", "burst must return samples spanning [t0, t0+bT] (macro step " +
                                           std::to_string(step) + ")");
        }
        for (const Vec& s : tr.states) {
            if (!s.allFinite()) {
                throw NumericError("burst produced non-finite state in macro step " +
                                       std::to_string(step),
                                   t0, step);
            }
        }
    }

    const BurstFn& burst_;
    DerivativeRule rule_;
    int q_;
    BurstLevel level_;
    PIRun& run_;
};

void check_schedule(const std::vector<double>& ts, double bT) {
    if (ts.size() < 2) throw ConfigError("ts", "need at least two macro times");
    const double dir = ts[1] > ts[0] ? 1.0 : -1.0;
    for (std::size_t n = 1; n < ts.size(); ++n) {
        if (!((ts[n] - ts[n - 1]) * dir > 0.0)) {
            throw ConfigError("ts", "macro times must be strictly monotone");
        }
    }
    if (!(bT > 0.0)) throw ConfigError("bT", "burst length must be positive");
}

/// Stage burst that ends at time tau near the target state Y.
///
/// Starts a burst bT earlier from Y − bT·slope and, for `corrections`
/// iterations, shifts the start by the miss distance at the burst end.
Vec anchored_stage(BurstRunner& run, double tau, const Vec& Y, const Vec& slope, double bT,
                   int corrections, std::size_t step) {
    Vec z = Y - bT * slope;
    Trajectory tr = run(tau - bT, z, bT, false, step);
    for (int c = 0; c < corrections; ++c) {
        z -= tr.end() - Y;
        tr = run(tau - bT, z, bT, false, step);
    }
    return run.slope(tr);
}

}  // namespace

Vec projective_euler_step(const BurstFn& burst, double t, const Vec& x, double Delta, double bT,
                          const DerivativeRule& derivative) {
    PIRun scratch;
    BurstRunner run(burst, derivative, 2, BurstLevel::None, scratch);
    const Trajectory tr = run(t, x, bT, true, 0);
    return tr.end() + (Delta - bT) * run.slope(tr);
}

PIRun pirk2(const BurstFn& burst, const std::vector<double>& ts, const Vec& x0, double bT,
            const PIOptions& opts) {
    check_schedule(ts, bT);
    const int corrections = opts.anchor_corrections < 0 ? 0 : opts.anchor_corrections;
    PIRun out;
    BurstRunner run(burst, opts.derivative, opts.q, opts.record, out);
    out.times = ts;
    out.states.reserve(ts.size());
    out.states.push_back(x0);
    Vec x = x0;
    for (std::size_t n = 0; n + 1 < ts.size(); ++n) {
        const double b1 = (n == 0 && opts.double_first) ? 2.0 * bT : bT;
        const Trajectory first = run(ts[n], x, b1, true, n);
        const Vec y0 = first.end();
        const Vec g1 = run.slope(first);
        const double h = ts[n + 1] - (ts[n] + b1);
        if (h == 0.0) {
            x = y0;
        } else {
            const Vec Y = y0 + h * g1;
            const Vec g2 = anchored_stage(run, ts[n + 1], Y, g1, bT, corrections, n);
            x = y0 + (0.5 * h) * (g1 + g2);
        }
        out.states.push_back(x);
    }
    return out;
}

PIRun pirk4(const BurstFn& burst, const std::vector<double>& ts, const Vec& x0, double bT,
            const PIOptions& opts) {
    check_schedule(ts, bT);
    const int corrections = opts.anchor_corrections < 0 ? 2 : opts.anchor_corrections;
    PIRun out;
    BurstRunner run(burst, opts.derivative, opts.q, opts.record, out);
    out.times = ts;
    out.states.reserve(ts.size());
    out.states.push_back(x0);
    Vec x = x0;
    for (std::size_t n = 0; n + 1 < ts.size(); ++n) {
        const double b1 = (n == 0 && opts.double_first) ? 2.0 * bT : bT;
        const Trajectory first = run(ts[n], x, b1, true, n);
        const Vec y0 = first.end();
        const double s0 = ts[n] + b1;
        const double h = ts[n + 1] - s0;
        if (h == 0.0) {
            x = y0;
        } else {
            const Vec k1 = run.slope(first);
            const Vec k2 = anchored_stage(run, s0 + 0.5 * h, y0 + (0.5 * h) * k1, k1, bT, corrections, n);
            const Vec k3 = anchored_stage(run, s0 + 0.5 * h, y0 + (0.5 * h) * k2, k2, bT, corrections, n);
            const Vec k4 = anchored_stage(run, s0 + h, y0 + h * k3, k3, bT, corrections, n);
            x = y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.states.push_back(x);
    }
    return out;
}

PIRun pig(const BurstFn& burst, std::pair<double, double> tspan, const Vec& x0,
          const LiftRestrict& lr, double bT, const PIGOptions& opts) {
    if (!lr.restrict || !lr.lift) throw ConfigError("lift_restrict", "restrict and lift are required");
    if (!(bT > 0.0)) throw ConfigError("bT", "burst length must be positive");
    if (opts.nBursts != 1 && opts.nBursts != 2) throw ConfigError("nBursts", "must be 1 or 2");
    if (tspan.first == tspan.second) throw ConfigError("tspan", "macro span must be non-empty");

    const Vec X0 = lr.restrict(x0);
    const Vec check = lr.restrict(lr.lift(X0, x0));
    if (check.size() != X0.size() || check != X0) {
        throw ConfigError("lift_restrict", "restrict(lift(X, cache)) must reproduce X exactly");
    }

    PIRun out;
    BurstRunner run(burst, opts.derivative, opts.q, opts.record, out);
    Vec cache = x0;
    std::size_t evals = 0;

    auto restricted = [&lr](const Trajectory& tr) {
        Trajectory m;
        m.times = tr.times;
        m.states.reserve(tr.size());
        for (const Vec& s : tr.states) m.states.push_back(lr.restrict(s));
        return m;
    };

    const OdeRhs slow = [&](double t, const Vec& X) -> Vec {
        const std::size_t k = evals++;
        const Trajectory b1 = run(t, lr.lift(X, cache), bT, true, k);
        const Vec g1 = run.slope(restricted(b1));
        if (opts.nBursts == 1) {
            cache = b1.end();
            return g1;
        }
        // The burst end is on the slow manifold but bT late: step back two
        // burst lengths and burst again to land at t.
        const Vec Xp = lr.restrict(b1.end()) - (2.0 * bT) * g1;
        const Trajectory b2 = run(t - bT, lr.lift(Xp, b1.end()), bT, false, k);
        cache = b2.end();
        return run.slope(restricted(b2));
    };

    Trajectory macro;
    if (opts.macro_integrator) {
        macro = opts.macro_integrator(slow, tspan, X0);
    } else {
        macro = rk45_adaptive(slow, tspan.first, tspan.second, X0, opts.macro_solver);
    }
    out.times = std::move(macro.times);
    out.states = std::move(macro.states);
    return out;
}

void write_pirun(const PIRun& run, const std::string& stem, const nlohmann::json& meta) {
    Trajectory macro{run.times, run.states};
    write_text_file(stem + ".csv", trajectory_csv(macro));

    std::ostringstream bs;
    const std::size_t dim = run.states.empty() ? 0 : static_cast<std::size_t>(run.states[0].size());
    bs << "burst,step,accurate,t";
    for (std::size_t c = 0; c < dim; ++c) bs << ",u" << c;
    bs << '\n';
    nlohmann::json blist = nlohmann::json::array();
    for (std::size_t b = 0; b < run.bursts.size(); ++b) {
        const BurstRecord& rec = run.bursts[b];
        for (std::size_t s = 0; s < rec.traj.size(); ++s) {
            bs << b << ',' << rec.step << ',' << (rec.accurate ? 1 : 0) << ',' << fmt_real(rec.traj.times[s]);
            for (Eigen::Index c = 0; c < rec.traj.states[s].size(); ++c) bs << ',' << fmt_real(rec.traj.states[s][c]);
            bs << '\n';
        }
        blist.push_back({{"index", b},
                         {"step", rec.step},
                         {"class", rec.accurate ? "accurate" : "auxiliary"},
                         {"samples", rec.traj.size()},
                         {"t0", rec.traj.times.front()},
                         {"t1", rec.traj.times.back()}});
    }
    write_text_file(stem + "_bursts.csv", bs.str());

    nlohmann::json j = meta.is_object() ? meta : nlohmann::json::object();
    j["macro_steps"] = run.times.size();
    j["burst_count"] = run.burst_count;
    j["bursts"] = blist;
    j["files"] = {{"macro", stem + ".csv"}, {"bursts", stem + "_bursts.csv"}};
    write_json_file(stem + ".json", j);
}

}  // namespace eqfree
