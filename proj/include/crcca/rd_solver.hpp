#pragma once

#include <vector>

#include "crcca/dataset.hpp"

namespace crcca {

// Finite-support channel between a source distribution on ~v and a
// reproduction alphabet u, together with the Lagrange multipliers of the
// moment-constrained rate-distortion problem. `conditional(j, k)` is
// q(u_k | ~v_j). The per-source normalizers are folded into the
// conditional rows rather than stored.
struct DiscreteChannel {
    Matrix source;       // J x dim support points ~v_j
    Vector prior;        // J, sums to 1
    Matrix repro;        // K x dim reproduction points u_k
    Matrix conditional;  // J x K, rows sum to 1
    Vector marginal;     // K, sums to 1
    double eta = 0.0;    // distortion multiplier, >= 0
    Vector tau;          // mean multiplier, one per coordinate
    Matrix mu;           // second-moment multiplier; only the diagonal is
                         // searched, off-diagonal entries are carried as-is
    void validate() const;
};

// Uniform conditional and marginal, zero multipliers.
DiscreteChannel make_channel(const Matrix& source, const Vector& prior, const Matrix& repro);

// q(u_k|~v_j) proportional to p(u_k) exp(-eta ||u_k - ~v_j||^2 - tau'u_k - u_k' mu u_k),
// normalized over k for each j.
DiscreteChannel conditional_update(const DiscreteChannel& ch);

// p(u_k) <- sum_j q(u_k|~v_j) p(~v_j)
DiscreteChannel marginal_update(const DiscreteChannel& ch);

// Moments and objective under the joint prior x conditional. The
// reproduction marginal used is the one induced by the conditional, not
// the stored field, so these are meaningful mid-iteration too.
Vector channel_mean(const DiscreteChannel& ch);
Vector channel_second_moment(const DiscreteChannel& ch);  // per coordinate E(U_i^2)
double channel_distortion(const DiscreteChannel& ch);     // E ||U - ~V||^2
double channel_rate_bits(const DiscreteChannel& ch);          // KL form
double channel_rate_bits_entropy(const DiscreteChannel& ch);  // H(U) - H(U|~V)

struct FixedPointOptions {
    bool constrain_moments = true;
    double target_mean = 0.0;
    double target_second_moment = 1.0;
    double fixed_point_tol = 1e-10;  // max-abs channel change per sweep
    int max_rounds = 500000;
    double moment_tol = 1e-9;  // root-find stop on the moment residual
    // Dense reproduction grids approach the fixed point along nearly
    // degenerate directions: rate, distortion, and moments settle long
    // before the channel entries stop moving. The iteration also stops once
    // all four have changed by at most stall_tol for stall_rounds
    // consecutive sweeps.
    double stall_tol = 1e-9;
    int stall_rounds = 50;
};

// Alternate conditional/marginal updates with per-sweep bisection of tau
// (restoring the target mean) and of diag(mu) (restoring the target second
// moment), at fixed eta, until the channel is a joint fixed point.
DiscreteChannel solve_multipliers(DiscreteChannel ch, double target_mean = 0.0,
                                  double target_second_moment = 1.0,
                                  const FixedPointOptions& opts = FixedPointOptions{});

struct EtaPoint {
    double eta = 0.0;
    double distortion = 0.0;
    double rate_bits = 0.0;
};

struct RdOptions {
    bool constrain_moments = true;
    double target_mean = 0.0;
    double target_second_moment = 1.0;
    double window = 1e-4;  // accept achieved distortion in [D - window, D]
    int max_eta_steps = 200;
    FixedPointOptions fixed_point = FixedPointOptions{};
};

struct RdResult {
    DiscreteChannel channel;
    double rate_bits = 0.0;
    double distortion = 0.0;
    Vector mean;
    Vector second_moment;
    std::vector<EtaPoint> eta_trace;
};

// Minimize I(~V;U) over channels meeting E||U-~V||^2 <= D (and the moment
// constraints unless disabled): outer bisection on eta around the inner
// fixed-point solve, stopping when achieved distortion lands in
// [D - window, D] or the constraint is slack at eta = 0.
RdResult solve_rd(const Matrix& source, const Vector& prior, const Matrix& repro,
                  double distortion_bound, const RdOptions& opts = RdOptions{});

// Uniform one-dimensional grid covering the prior support widened by one
// standard deviation on each side.
Matrix default_repro_grid(const Matrix& source, const Vector& prior, int count);

}  // namespace crcca
