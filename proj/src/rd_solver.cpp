#include "crcca/rd_solver.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace crcca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_simplex(const Vector& p, const char* what) {
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (!(p(i) >= 0.0)) throw std::invalid_argument(std::string("channel: negative ") + what);
    if (std::abs(p.sum() - 1.0) > 1e-10)
        throw std::invalid_argument(std::string("channel: ") + what + " must sum to 1");
}

Matrix pairwise_sqdist(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < a.rows(); ++j)
        for (Eigen::Index k = 0; k < b.rows(); ++k)
            out(j, k) = (a.row(j) - b.row(k)).squaredNorm();
    return out;
}

// s_k = -tau'u_k - u_k' mu u_k
Vector multiplier_scores(const Matrix& repro, const Vector& tau, const Matrix& mu) {
    Vector s(repro.rows());
    for (Eigen::Index k = 0; k < repro.rows(); ++k) {
        const auto u = repro.row(k);
        s(k) = -u.dot(tau) - (u * mu * u.transpose()).value();
    }
    return s;
}

// Rows normalized in the log domain; marginal zeros stay zero.
Matrix build_conditional(const Matrix& dist2, const Vector& marginal, const Vector& scores,
                         double eta) {
    const Eigen::Index nj = dist2.rows();
    const Eigen::Index nk = dist2.cols();
    Vector log_m(nk);
    for (Eigen::Index k = 0; k < nk; ++k)
        log_m(k) = marginal(k) > 0.0 ? std::log(marginal(k)) : kNegInf;
    Matrix cond(nj, nk);
    for (Eigen::Index j = 0; j < nj; ++j) {
        double peak = kNegInf;
        for (Eigen::Index k = 0; k < nk; ++k) {
            const double w = log_m(k) + scores(k) - eta * dist2(j, k);
            cond(j, k) = w;
            peak = std::max(peak, w);
        }
        if (!(peak > kNegInf))
            throw std::runtime_error(
                "conditional update: all reproduction weights vanished for a source point; "
                "use a smaller eta or a denser reproduction support");
        double total = 0.0;
        for (Eigen::Index k = 0; k < nk; ++k) {
            const double e = std::isfinite(cond(j, k)) ? std::exp(cond(j, k) - peak) : 0.0;
            cond(j, k) = e;
            total += e;
        }
        cond.row(j) /= total;
    }
    return cond;
}

Vector induced_marginal(const Matrix& cond, const Vector& prior) {
    return cond.transpose() * prior;
}

// f must be non-increasing; find x with f(x) = target. Starts from x0 and
// expands the bracket geometrically before bisecting.
double bisect_decreasing(const std::function<double(double)>& f, double x0, double target,
                         double f_tol, const char* infeasible_msg) {
    double lo = x0;
    double hi = x0;
    const double f0 = f(x0);
    if (std::abs(f0 - target) <= f_tol) return x0;
    bool bracketed = false;
    double step = 1.0;
    if (f0 > target) {
        for (int t = 0; t < 80; ++t, step *= 2.0) {
            hi = x0 + step;
            const double fv = f(hi);
            if (std::abs(fv - target) <= f_tol) return hi;
            if (fv <= target) {
                bracketed = true;
                break;
            }
            lo = hi;
        }
    } else {
        for (int t = 0; t < 80; ++t, step *= 2.0) {
            lo = x0 - step;
            const double fv = f(lo);
            if (std::abs(fv - target) <= f_tol) return lo;
            if (fv >= target) {
                bracketed = true;
                break;
            }
            hi = lo;
        }
    }
    if (!bracketed) throw std::runtime_error(infeasible_msg);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm - target) <= f_tol) return mid;
        if (fm > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) return mid;
    }
    return 0.5 * (lo + hi);
}

struct FixedPointState {
    Matrix dist2;
};

// One full sweep in Algorithm-1 order: channel update, marginal update,
// then tau and diag(mu) root finds against the refreshed marginal.
void sweep(DiscreteChannel& ch, const FixedPointState& st, const FixedPointOptions& opts) {
    Vector scores = multiplier_scores(ch.repro, ch.tau, ch.mu);
    ch.conditional = build_conditional(st.dist2, ch.marginal, scores, ch.eta);
    ch.marginal = induced_marginal(ch.conditional, ch.prior);
    if (!opts.constrain_moments) return;

    const Eigen::Index dim = ch.repro.cols();
    for (Eigen::Index i = 0; i < dim; ++i) {
        // Feasible range of E(U_i) over reproduction points still carrying mass.
        double umin = std::numeric_limits<double>::infinity();
        double umax = -umin;
        for (Eigen::Index k = 0; k < ch.repro.rows(); ++k) {
            if (ch.marginal(k) <= 0.0) continue;
            umin = std::min(umin, ch.repro(k, i));
            umax = std::max(umax, ch.repro(k, i));
        }
        const auto mean_at = [&](double t) {
            Vector tau = ch.tau;
            tau(i) = t;
            const Matrix cond =
                build_conditional(st.dist2, ch.marginal, multiplier_scores(ch.repro, tau, ch.mu), ch.eta);
            return (induced_marginal(cond, ch.prior).transpose() * ch.repro)(0, i);
        };
        // The root finds land two orders tighter than the acceptance band so
        // a re-run lands where the last one did and the sweeps can settle.
        const double land_tol = 0.01 * opts.moment_tol;
        if (std::abs(mean_at(ch.tau(i)) - opts.target_mean) > opts.moment_tol) {
            // Boundary targets are reachable in the limit of a diverging
            // multiplier; only strictly-outside targets are hopeless.
            if (opts.target_mean < umin || opts.target_mean > umax)
                throw std::runtime_error("mean constraint infeasible on the reproduction support");
            ch.tau(i) = bisect_decreasing(mean_at, ch.tau(i), opts.target_mean, land_tol,
                                          "mean constraint infeasible on the reproduction support");
        }

        double smin = std::numeric_limits<double>::infinity();
        double smax = -smin;
        for (Eigen::Index k = 0; k < ch.repro.rows(); ++k) {
            if (ch.marginal(k) <= 0.0) continue;
            const double s = ch.repro(k, i) * ch.repro(k, i);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        const auto second_at = [&](double m) {
            Matrix mu = ch.mu;
            mu(i, i) = m;
            const Matrix cond =
                build_conditional(st.dist2, ch.marginal, multiplier_scores(ch.repro, ch.tau, mu), ch.eta);
            const Vector ind = induced_marginal(cond, ch.prior);
            double sm = 0.0;
            for (Eigen::Index k = 0; k < ch.repro.rows(); ++k)
                sm += ind(k) * ch.repro(k, i) * ch.repro(k, i);
            return sm;
        };
        if (std::abs(second_at(ch.mu(i, i)) - opts.target_second_moment) > opts.moment_tol) {
            if (opts.target_second_moment < smin || opts.target_second_moment > smax)
                throw std::runtime_error(
                    "second-moment constraint infeasible on the reproduction support");
            ch.mu(i, i) =
                bisect_decreasing(second_at, ch.mu(i, i), opts.target_second_moment, land_tol,
                                  "second-moment constraint infeasible on the reproduction support");
        }
    }
    // Re-realize the channel under the multipliers just found.
    scores = multiplier_scores(ch.repro, ch.tau, ch.mu);
    ch.conditional = build_conditional(st.dist2, ch.marginal, scores, ch.eta);
}

DiscreteChannel run_fixed_point(DiscreteChannel ch, const FixedPointOptions& opts) {
    ch.validate();
    FixedPointState st{pairwise_sqdist(ch.source, ch.repro)};
    double prev_dist = std::numeric_limits<double>::infinity();
    double prev_rate = prev_dist;
    Vector prev_mean, prev_second;
    int stalled = 0;
    for (int round = 0; round < opts.max_rounds; ++round) {
        const Matrix prev_cond = ch.conditional;
        const Vector prev_marg = ch.marginal;
        sweep(ch, st, opts);
        const double residual =
            std::max((ch.conditional - prev_cond).cwiseAbs().maxCoeff(),
                     (ch.marginal - prev_marg).cwiseAbs().maxCoeff());
        // Also require the stored marginal to reproduce itself, so a further
        // update pass moves the returned channel by no more than the
        // tolerance.
        const double drift =
            (induced_marginal(ch.conditional, ch.prior) - ch.marginal).cwiseAbs().maxCoeff();
        if (residual <= opts.fixed_point_tol && drift <= opts.fixed_point_tol) return ch;

        const double dist = channel_distortion(ch);
        const double rate = channel_rate_bits(ch);
        const Vector mean = channel_mean(ch);
        const Vector second = channel_second_moment(ch);
        double change = std::max(std::abs(dist - prev_dist), std::abs(rate - prev_rate));
        if (prev_mean.size() == mean.size()) {
            change = std::max(change, (mean - prev_mean).cwiseAbs().maxCoeff());
            change = std::max(change, (second - prev_second).cwiseAbs().maxCoeff());
        }
        prev_dist = dist;
        prev_rate = rate;
        prev_mean = mean;
        prev_second = second;
        stalled = change <= opts.stall_tol ? stalled + 1 : 0;
        if (stalled >= opts.stall_rounds) return ch;
    }
    throw std::runtime_error("fixed-point iteration did not converge; raise max_rounds");
}

}  // namespace

void DiscreteChannel::validate() const {
    const Eigen::Index nj = source.rows();
    const Eigen::Index nk = repro.rows();
    if (nj < 1 || nk < 1) throw std::invalid_argument("channel: empty support");
    if (source.cols() != repro.cols())
        throw std::invalid_argument("channel: source and reproduction dimension mismatch");
    if (prior.size() != nj) throw std::invalid_argument("channel: prior size mismatch");
    if (conditional.rows() != nj || conditional.cols() != nk)
        throw std::invalid_argument("channel: conditional shape mismatch");
    if (marginal.size() != nk) throw std::invalid_argument("channel: marginal size mismatch");
    if (tau.size() != source.cols() || mu.rows() != source.cols() || mu.cols() != source.cols())
        throw std::invalid_argument("channel: multiplier shape mismatch");
    if (!(eta >= 0.0)) throw std::invalid_argument("channel: eta must be non-negative");
    check_simplex(prior, "prior");
    check_simplex(marginal, "marginal");
    for (Eigen::Index j = 0; j < nj; ++j) {
        Vector row = conditional.row(j);
        check_simplex(row, "conditional row");
    }
}

DiscreteChannel make_channel(const Matrix& source, const Vector& prior, const Matrix& repro) {
    DiscreteChannel ch;
    ch.source = source;
    ch.prior = prior;
    ch.repro = repro;
    ch.conditional = Matrix::Constant(source.rows(), repro.rows(), 1.0 / double(repro.rows()));
    ch.marginal = Vector::Constant(repro.rows(), 1.0 / double(repro.rows()));
    ch.tau = Vector::Zero(source.cols());
    ch.mu = Matrix::Zero(source.cols(), source.cols());
    ch.validate();
    return ch;
}

DiscreteChannel conditional_update(const DiscreteChannel& ch) {
    DiscreteChannel out = ch;
    const Matrix dist2 = pairwise_sqdist(ch.source, ch.repro);
    out.conditional =
        build_conditional(dist2, ch.marginal, multiplier_scores(ch.repro, ch.tau, ch.mu), ch.eta);
    return out;
}

DiscreteChannel marginal_update(const DiscreteChannel& ch) {
    DiscreteChannel out = ch;
    out.marginal = induced_marginal(ch.conditional, ch.prior);
    return out;
}

Vector channel_mean(const DiscreteChannel& ch) {
    const Vector ind = induced_marginal(ch.conditional, ch.prior);
    return ch.repro.transpose() * ind;
}

Vector channel_second_moment(const DiscreteChannel& ch) {
    const Vector ind = induced_marginal(ch.conditional, ch.prior);
    Vector out = Vector::Zero(ch.repro.cols());
    for (Eigen::Index k = 0; k < ch.repro.rows(); ++k)
        out += ind(k) * ch.repro.row(k).cwiseAbs2().transpose();
    return out;
}

double channel_distortion(const DiscreteChannel& ch) {
    const Matrix dist2 = pairwise_sqdist(ch.source, ch.repro);
    double d = 0.0;
    for (Eigen::Index j = 0; j < ch.source.rows(); ++j)
        d += ch.prior(j) * ch.conditional.row(j).dot(dist2.row(j));
    return d;
}

double channel_rate_bits(const DiscreteChannel& ch) {
    const Vector ind = induced_marginal(ch.conditional, ch.prior);
    double nats = 0.0;
    for (Eigen::Index j = 0; j < ch.source.rows(); ++j) {
        if (ch.prior(j) <= 0.0) continue;
        for (Eigen::Index k = 0; k < ch.repro.rows(); ++k) {
            const double q = ch.conditional(j, k);
            if (q <= 0.0) continue;
            nats += ch.prior(j) * q * std::log(q / ind(k));
        }
    }
    double bits = nats / std::log(2.0);
    if (bits < 0.0 && bits > -1e-9) bits = 0.0;
    return bits;
}

double channel_rate_bits_entropy(const DiscreteChannel& ch) {
    const Vector ind = induced_marginal(ch.conditional, ch.prior);
    double h_u = 0.0;
    for (Eigen::Index k = 0; k < ind.size(); ++k)
        if (ind(k) > 0.0) h_u -= ind(k) * std::log(ind(k));
    double h_cond = 0.0;
    for (Eigen::Index j = 0; j < ch.source.rows(); ++j) {
        if (ch.prior(j) <= 0.0) continue;
        for (Eigen::Index k = 0; k < ch.repro.rows(); ++k) {
            const double q = ch.conditional(j, k);
            if (q > 0.0) h_cond -= ch.prior(j) * q * std::log(q);
        }
    }
    double bits = (h_u - h_cond) / std::log(2.0);
    if (bits < 0.0 && bits > -1e-9) bits = 0.0;
    return bits;
}

DiscreteChannel solve_multipliers(DiscreteChannel ch, double target_mean,
                                  double target_second_moment, const FixedPointOptions& opts) {
    FixedPointOptions o = opts;
    o.constrain_moments = true;
    o.target_mean = target_mean;
    o.target_second_moment = target_second_moment;
    return run_fixed_point(std::move(ch), o);
}

RdResult solve_rd(const Matrix& source, const Vector& prior, const Matrix& repro,
                  double distortion_bound, const RdOptions& opts) {
    if (!(distortion_bound > 0.0))
        throw std::invalid_argument("rd: distortion bound must be positive");

    FixedPointOptions fp = opts.fixed_point;
    fp.constrain_moments = opts.constrain_moments;
    fp.target_mean = opts.target_mean;
    fp.target_second_moment = opts.target_second_moment;

    RdResult res;
    const auto evaluate = [&](double eta, const DiscreteChannel& warm) {
        DiscreteChannel ch = warm;
        ch.eta = eta;
        // Keep every reproduction point alive on warm starts; zero-mass
        // points are absorbing under the updates.
        const Eigen::Index nk = ch.marginal.size();
        ch.marginal = 0.99 * ch.marginal + Vector::Constant(nk, 0.01 / double(nk));
        ch = run_fixed_point(std::move(ch), fp);
        res.eta_trace.push_back({eta, channel_distortion(ch), channel_rate_bits(ch)});
        return ch;
    };

    DiscreteChannel ch = evaluate(0.0, make_channel(source, prior, repro));
    double dist = res.eta_trace.back().distortion;
    if (dist > distortion_bound) {
        // Expand until the bound is met, then bisect into the window.
        double lo = 0.0;
        double hi = 1.0;
        DiscreteChannel ch_hi = evaluate(hi, ch);
        int steps = 0;
        while (res.eta_trace.back().distortion > distortion_bound) {
            if (++steps > 60)
                throw std::runtime_error(
                    "rd: distortion bound below the minimum achievable on the reproduction support");
            lo = hi;
            hi *= 2.0;
            ch_hi = evaluate(hi, ch_hi);
        }
        ch = ch_hi;
        dist = res.eta_trace.back().distortion;
        int iters = 0;
        while (dist < distortion_bound - opts.window) {
            if (++iters > opts.max_eta_steps)
                throw std::runtime_error("rd: eta bisection did not converge; widen the window");
            const double mid = 0.5 * (lo + hi);
            const DiscreteChannel ch_mid = evaluate(mid, ch);
            const double dist_mid = res.eta_trace.back().distortion;
            if (dist_mid > distortion_bound) {
                lo = mid;
            } else {
                hi = mid;
                ch = ch_mid;
                dist = dist_mid;
            }
            if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
        }
    }

    res.channel = ch;
    res.rate_bits = channel_rate_bits(ch);
    res.distortion = channel_distortion(ch);
    res.mean = channel_mean(ch);
    res.second_moment = channel_second_moment(ch);
    return res;
}

Matrix default_repro_grid(const Matrix& source, const Vector& prior, int count) {
    if (source.cols() != 1)
        throw std::invalid_argument(
            "rd: the default reproduction grid is one-dimensional; supply a support "
            "for multidimensional sources");
    if (count < 2) throw std::invalid_argument("rd: grid needs at least 2 points");
    const double mean = source.col(0).dot(prior);
    double var = 0.0;
    for (Eigen::Index j = 0; j < source.rows(); ++j)
        var += prior(j) * (source(j, 0) - mean) * (source(j, 0) - mean);
    const double sd = std::sqrt(std::max(var, 0.0));
    const double lo = source.col(0).minCoeff() - sd;
    const double hi = source.col(0).maxCoeff() + sd;
    Matrix grid(count, 1);
    for (int k = 0; k < count; ++k)
        grid(k, 0) = lo + (hi - lo) * double(k) / double(count - 1);
    return grid;
}

}  // namespace crcca
