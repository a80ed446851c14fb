#include "crcca/good_turing.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace crcca {

GoodTuringEstimate good_turing(const std::map<std::int64_t, std::int64_t>& counts) {
    if (counts.empty()) throw std::invalid_argument("good_turing: empty counts");
    GoodTuringEstimate est;
    est.counts = counts;
    for (const auto& [symbol, r] : counts) {
        (void)symbol;
        if (r < 1) throw std::invalid_argument("good_turing: counts must be positive");
        est.total += r;
        ++est.count_of_counts[r];
    }
    const auto n1_it = est.count_of_counts.find(1);
    const double n1 = n1_it == est.count_of_counts.end() ? 0.0 : double(n1_it->second);
    est.missing_mass = n1 / double(est.total);

    std::map<std::int64_t, double> rstar;
    if (est.count_of_counts.size() == 1) {
        const std::int64_t r = est.count_of_counts.begin()->first;
        rstar[r] = double(r);
    } else {
        std::vector<std::int64_t> rs;
        rs.reserve(est.count_of_counts.size());
        for (const auto& [r, nr] : est.count_of_counts) {
            (void)nr;
            rs.push_back(r);
        }
        const size_t m = rs.size();
        // Z-transform spreads each N_r over the gap to its neighbors, then a
        // line is fit through (log r, log Z).
        std::vector<double> logr(m), logz(m);
        for (size_t j = 0; j < m; ++j) {
            const double q = j == 0 ? 0.0 : double(rs[j - 1]);
            const double t = j + 1 < m ? double(rs[j + 1]) : 2.0 * double(rs[j]) - q;
            logr[j] = std::log(double(rs[j]));
            logz[j] = std::log(double(est.count_of_counts.at(rs[j])) / (0.5 * (t - q)));
        }
        double mean_r = 0.0, mean_z = 0.0;
        for (size_t j = 0; j < m; ++j) {
            mean_r += logr[j];
            mean_z += logz[j];
        }
        mean_r /= double(m);
        mean_z /= double(m);
        double sxx = 0.0, sxy = 0.0;
        for (size_t j = 0; j < m; ++j) {
            sxx += (logr[j] - mean_r) * (logr[j] - mean_r);
            sxy += (logr[j] - mean_r) * (logz[j] - mean_z);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        const double intercept = mean_z - slope * mean_r;
        const auto smooth = [&](double r) { return std::exp(intercept + slope * std::log(r)); };

        bool use_smooth = false;
        for (size_t j = 0; j < m; ++j) {
            const std::int64_t r = rs[j];
            const double lgt = double(r + 1) * smooth(double(r + 1)) / smooth(double(r));
            if (!use_smooth) {
                const auto next = est.count_of_counts.find(r + 1);
                if (next == est.count_of_counts.end()) {
                    use_smooth = true;
                } else {
                    const double nr = double(est.count_of_counts.at(r));
                    const double nr1 = double(next->second);
                    const double turing = double(r + 1) * nr1 / nr;
                    const double halfwidth = 1.65 * std::sqrt(double(r + 1) * double(r + 1) *
                                                              (nr1 / (nr * nr)) * (1.0 + nr1 / nr));
                    if (std::abs(turing - lgt) > halfwidth) {
                        rstar[r] = turing;
                        continue;
                    }
                    use_smooth = true;
                }
            }
            rstar[r] = lgt;
        }
    }

    double unnormalized = 0.0;
    for (const auto& [r, nr] : est.count_of_counts) unnormalized += double(nr) * rstar.at(r);
    const double observed_mass = 1.0 - est.missing_mass;
    for (const auto& [symbol, r] : counts)
        est.probability[symbol] = observed_mass * rstar.at(r) / unnormalized;
    return est;
}

double entropy_bits(const GoodTuringEstimate& est) {
    double bits = 0.0;
    for (const auto& [symbol, p] : est.probability) {
        (void)symbol;
        if (p > 0.0) bits -= p * std::log2(p);
    }
    return bits;
}

}  // namespace crcca
