#include "eqfree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "eqfree/io.hpp"

namespace eqfree {

using cd = std::complex<double>;

std::vector<cd> Spectrum::slow_eigenvalues() const {
    std::vector<cd> out;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        if (slow[i]) out.push_back(eigenvalues[i]);
    return out;
}

std::vector<cd> Spectrum::fast_eigenvalues() const {
    std::vector<cd> out;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        if (!slow[i]) out.push_back(eigenvalues[i]);
    return out;
}

cd Spectrum::fast_leader() const {
    cd best(std::numeric_limits<double>::quiet_NaN(), 0.0);
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        if (slow[i]) continue;
        if (std::isnan(best.real()) || std::abs(eigenvalues[i].real()) < std::abs(best.real()))
            best = eigenvalues[i];
    }
    return best;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& u0, double h) {
    const Eigen::Index n = u0.size();
    const double sqeps = std::sqrt(std::numeric_limits<double>::epsilon());
    Mat J;
    Vec u = u0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double hk = h > 0.0 ? h : sqeps * std::max(1.0, std::abs(u0[k]));
        u[k] = u0[k] + hk;
        const Vec fp = f(u);
        u[k] = u0[k] - hk;
        const Vec fm = f(u);
        u[k] = u0[k];
        if (!fp.allFinite() || !fm.allFinite()) {
            throw NumericError("fd_jacobian: non-finite function value perturbing component " +
                                   std::to_string(k),
                               std::numeric_limits<double>::quiet_NaN(), static_cast<std::size_t>(k));
        }
        if (k == 0) J.resize(fp.size(), n);
        J.col(k) = (fp - fm) / (2.0 * hk);
    }
    return J;
}

namespace {

/// Slow/fast split at the largest multiplicative gap of |Re λ|.
void split_clusters(Spectrum& s) {
    const std::size_t n = s.eigenvalues.size();
    s.slow.assign(n, true);
    s.n_slow = n;
    const double zero_tol = 1e-10 * std::max(1.0, s.norm);
    std::vector<double> mags;
    for (const cd& l : s.eigenvalues) {
        const double m = std::abs(l.real());
        if (m > zero_tol) mags.push_back(m);
    }
    std::sort(mags.begin(), mags.end());
    mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
    if (mags.size() < 2) return;
    double best = 0.0;
    double threshold = mags.back();
    for (std::size_t i = 0; i + 1 < mags.size(); ++i) {
        const double ratio = mags[i + 1] / mags[i];
        if (ratio > best) {
            best = ratio;
            threshold = mags[i];
        }
    }
    s.gap = best;
    s.n_slow = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s.slow[i] = std::abs(s.eigenvalues[i].real()) <= threshold;
        if (s.slow[i]) ++s.n_slow;
    }
}

double inverse_iteration_residual(const Mat& A, cd lambda) {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXcd Ac = A.cast<cd>();
    // Shift slightly off the eigenvalue so the factorisation stays regular.
    const double pert = 1e-10 * std::max(1.0, std::abs(lambda));
    Eigen::MatrixXcd S = Ac - (lambda + cd(pert, pert)) * Eigen::MatrixXcd::Identity(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(S);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cd(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
    for (int it = 0; it < 3; ++it) {
        v = lu.solve(v);
        const double nv = v.norm();
        if (!(nv > 0.0) || !std::isfinite(nv)) return std::numeric_limits<double>::infinity();
        v /= nv;
    }
    return (Ac * v - lambda * v).norm();
}

}  // namespace

Spectrum eig_dense(const Mat& A, int certify) {
    if (A.rows() != A.cols()) throw ConfigError("A", "matrix must be square");
    const Eigen::Index n = A.rows();
    Spectrum s;
    if (n == 0) return s;
    s.norm = A.cwiseAbs().colwise().sum().maxCoeff();
    Eigen::EigenSolver<Mat> es(A, true);
    if (es.info() != Eigen::Success) {
        throw NumericError("eig_dense: QR iteration did not converge");
    }
    const Eigen::VectorXcd ev = es.eigenvalues();
    const Eigen::MatrixXcd V = es.eigenvectors();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev[a].real() != ev[b].real()) return ev[a].real() > ev[b].real();
        return ev[a].imag() > ev[b].imag();
    });
    const Eigen::MatrixXcd Ac = A.cast<cd>();
    for (Eigen::Index q : order) {
        s.eigenvalues.push_back(ev[q]);
        const Eigen::VectorXcd v = V.col(q);
        s.residuals.push_back((Ac * v - ev[q] * v).norm() / v.norm());
    }
    split_clusters(s);

    s.certificates.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> sample;
    if (certify < 0 && n <= 64) {
        sample.resize(static_cast<std::size_t>(n));
        std::iota(sample.begin(), sample.end(), std::size_t{0});
    } else {
        const std::size_t cap = certify < 0 ? std::size_t{24} : static_cast<std::size_t>(certify);
        std::vector<std::size_t> cand;
        for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
            if (s.slow[i]) cand.push_back(i);
        for (std::size_t i = s.n_slow; i < std::min<std::size_t>(s.n_slow + 4, s.eigenvalues.size()); ++i)
            cand.push_back(i);
        for (std::size_t k = 0; k < 4 && k < s.eigenvalues.size(); ++k)
            cand.push_back(s.eigenvalues.size() - 1 - k);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (std::size_t i = 0; i < cand.size() && sample.size() < cap; ++i) sample.push_back(cand[i]);
    }
    for (std::size_t i : sample) s.certificates[i] = inverse_iteration_residual(A, s.eigenvalues[i]);
    return s;
}

Vec reduce_state(const Vec& u, const PatchProblem1D& prob) {
    const int n = prob.grid.nSubP, N = prob.grid.nPatch;
    Vec v((n - 2) * prob.nVars * N);
    Eigen::Index q = 0;
    for (int j = 0; j < N; ++j)
        for (int c = 0; c < prob.nVars; ++c)
            for (int i = 1; i + 1 < n; ++i) v[q++] = u[prob.index(i, c, j)];
    return v;
}

Vec expand_state(const Vec& v, const PatchProblem1D& prob) {
    const int n = prob.grid.nSubP, N = prob.grid.nPatch;
    if (v.size() != static_cast<Eigen::Index>((n - 2) * prob.nVars * N)) {
        throw ConfigError("state", "reduced state length differs from the grid interior");
    }
    Vec u = Vec::Zero(static_cast<Eigen::Index>(prob.size()));
    Eigen::Index q = 0;
    for (int j = 0; j < N; ++j)
        for (int c = 0; c < prob.nVars; ++c)
            for (int i = 1; i + 1 < n; ++i) u[prob.index(i, c, j)] = v[q++];
    refresh_edges(u, prob);
    return u;
}

Mat patch_jacobian(const PatchProblem1D& prob, const MicroRHS1D& rhs, const Vec& u_star, double h) {
    if (static_cast<std::size_t>(u_star.size()) != prob.size()) {
        throw ConfigError("u_star", "state length differs from the grid");
    }
    const double step = h > 0.0 ? h : 1e-4 * std::max(1.0, u_star.lpNorm<Eigen::Infinity>());
    auto reduced = [&](const Vec& v) {
        return reduce_state(patch_smooth_1(0.0, expand_state(v, prob), prob, rhs), prob);
    };
    return fd_jacobian(reduced, reduce_state(u_star, prob), step);
}

Spectrum patch_spectrum(const PatchProblem1D& prob, const MicroRHS1D& rhs, const Vec& u_star, double h) {
    return eig_dense(patch_jacobian(prob, rhs, u_star, h));
}

MacroMap macro_map(const LiftRestrict& lr, const Vec& cache, const BurstFn& burst, double bT,
                   bool backproject, const DerivativeRule& derivative, double t0) {
    if (!lr.restrict || !lr.lift) throw ConfigError("lift_restrict", "restrict and lift are required");
    if (!(bT > 0.0)) throw ConfigError("bT", "burst length must be positive");
    return [=](const Vec& U) -> Vec {
        const Trajectory tr = burst(t0, lr.lift(U, cache), bT);
        Trajectory R;
        R.times = tr.times;
        for (const Vec& s : tr.states) R.states.push_back(lr.restrict(s));
        Vec U1 = R.end();
        if (backproject) U1 -= bT * (derivative ? derivative(R) : slow_derivative_estimate(R, 2));
        return U1;
    };
}

Equilibrium macro_equilibrium(const MacroMap& F, const Vec& U0, const NewtonOptions& opts) {
    Vec U = U0;
    Vec G = F(U) - U;
    if (!G.allFinite()) throw NewtonFailure("macro_equilibrium: map not finite at start", U, 0);
    const Eigen::Index n = U.size();
    for (int it = 0; it <= opts.max_iter; ++it) {
        const double res = G.norm();
        if (res < opts.tol * (1.0 + U.norm())) {
            Equilibrium eq;
            eq.U = U;
            eq.iterations = it;
            eq.residual = res;
            eq.stability = eig_dense(fd_jacobian(F, U, opts.fd_step));
            return eq;
        }
        if (it == opts.max_iter) break;
        const Mat J = fd_jacobian(F, U, opts.fd_step) - Mat::Identity(n, n);
        const Vec step = J.colPivHouseholderQr().solve(-G);
        if (!step.allFinite()) throw NewtonFailure("macro_equilibrium: singular Newton system", U, it);
        double lam = 1.0;
        Vec Un, Gn;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            Un = U + lam * step;
            Gn = F(Un) - Un;
            if (Gn.allFinite() && Gn.norm() < (1.0 - 1e-4 * lam) * res) {
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if (!accepted) {
            // Accept the smallest trial anyway; persistent stagnation ends at max_iter.
            if (!Gn.allFinite()) throw NewtonFailure("macro_equilibrium: map not finite", U, it);
        }
        U = std::move(Un);
        G = std::move(Gn);
    }
    throw NewtonFailure("macro_equilibrium: Newton iteration did not converge", U, opts.max_iter);
}

std::string spectrum_csv(const Spectrum& s) {
    std::ostringstream os;
    os << "re,im,residual,certificate,cluster\n";
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        os << fmt_real(s.eigenvalues[i].real()) << ',' << fmt_real(s.eigenvalues[i].imag()) << ','
           << fmt_real(s.residuals[i]) << ','
           << (std::isnan(s.certificates[i]) ? std::string() : fmt_real(s.certificates[i])) << ','
           << (s.slow[i] ? "slow" : "fast") << '\n';
    }
    return os.str();
}

nlohmann::json spectrum_report(const Spectrum& s) {
    nlohmann::json slow = nlohmann::json::array();
    for (const cd& l : s.slow_eigenvalues()) slow.push_back({l.real(), l.imag()});
    const cd lead = s.fast_leader();
    double max_res = 0.0;
    for (double r : s.residuals) max_res = std::max(max_res, r);
    return nlohmann::json{{"size", s.eigenvalues.size()},
                          {"norm", s.norm},
                          {"n_slow", s.n_slow},
                          {"gap", std::isnan(s.gap) ? nlohmann::json(nullptr) : nlohmann::json(s.gap)},
                          {"slow", slow},
                          {"fast_leader", std::isnan(lead.real()) ? nlohmann::json(nullptr)
                                                                  : nlohmann::json{lead.real(), lead.imag()}},
                          {"max_residual", max_res}};
}

}  // namespace eqfree
