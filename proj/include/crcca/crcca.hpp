#pragma once

#include <string>
#include <vector>

#include "crcca/quantizer.hpp"

namespace crcca {

struct CrccaConfig {
    int levels = 13;   // quantization levels N per dimension, both views
    int dim = 2;       // output dimension d
    int max_iters = 100;
    double tol = 1e-5;  // relative objective change
    std::uint64_t seed = 0;
    double ridge = 0.0;  // ridge for the linear-CCA initialization

    void validate(Eigen::Index dx, Eigen::Index dy) const;
};

struct CrccaModel {
    QuantizedMap map_u;  // over X-space
    QuantizedMap map_v;  // over Y-space
    Matrix align_u;      // d x d orthogonal; aligned U = U_raw * align_u^T
    Matrix align_v;
    std::vector<double> objective_trace;  // per iteration, final entry post-alignment
    std::vector<double> whitening_mean_trace;  // per iteration: max |mean| over U and V
    std::vector<double> whitening_cov_trace;   // per iteration: max |cov - I| over U and V
    double entropy_u = 0.0;  // bits, train cell occupancy
    double entropy_v = 0.0;
    bool converged = false;
    CrccaConfig config;
};

// Alternating remote-source quantization: V starts at the linear-CCA
// projection of Y; each half-step refits one view's quantizer against the
// other's current output and re-whitens. A final orthogonal rotation pair
// diagonalizes the cross-covariance of the converged outputs.
CrccaModel fit_crcca(const PairedDataset& train, const CrccaConfig& config);

struct EvalReport {
    double objective = 0.0;
    Vector correlations;      // per component
    double distortion = 0.0;  // E||U - V||^2
    double entropy_u = 0.0;   // bits on the evaluated data
    double entropy_v = 0.0;
};

EvalReport evaluate(const CrccaModel& model, const PairedDataset& data);

// Aligned representations for arbitrary inputs.
Matrix transform_u(const CrccaModel& model, const Matrix& x);
Matrix transform_v(const CrccaModel& model, const Matrix& y);

struct SweepPoint {
    int levels = 0;
    bool ok = false;
    std::string error;
    double eval_objective = 0.0;
    double entropy_u = 0.0;
    double entropy_v = 0.0;
};

// One fit per level count; failures are recorded and the sweep continues.
std::vector<SweepPoint> sweep_levels(const PairedDataset& train, const PairedDataset& eval,
                                     const std::vector<int>& levels_list, CrccaConfig config);

}  // namespace crcca
