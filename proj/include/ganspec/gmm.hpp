#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ganspec/error.hpp"
#include "ganspec/features.hpp"
#include "ganspec/rng.hpp"

namespace ganspec {

inline constexpr double kVarianceFloor = 1e-9;

/// Two-component diagonal-covariance Gaussian mixture.
/// real_component indexes the component whose mean in dimension 0 is smaller;
/// lower descriptive values indicate real images.
struct GmmModel {
    int dim = 0;
    std::array<double, 2> weights{};
    std::array<std::vector<double>, 2> means;
    std::array<std::vector<double>, 2> variances;
    int real_component = 0;
};

struct GmmConfig {
    int max_iters = 500;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int n_restarts = 0; // extra seeded random initializations; best likelihood wins
};

namespace detail {

struct GmmParams {
    std::array<double, 2> weights;
    std::array<std::vector<double>, 2> means;
    std::array<std::vector<double>, 2> variances;
};

inline double log_gaussian_diag(const double* x, const std::vector<double>& mean,
                                const std::vector<double>& var) {
    double acc = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
        const double diff = x[d] - mean[d];
        acc += std::log(2.0 * std::numbers::pi * var[d]) + diff * diff / var[d];
    }
    return -0.5 * acc;
}

/// One EM run from the given parameters. Returns final log-likelihood and
/// appends the per-iteration likelihood sequence when a trace is supplied.
inline double run_em(const std::vector<double>& data, int dim, GmmParams& p, const GmmConfig& config,
                     std::vector<double>* ll_trace) {
    const std::size_t n = data.size() / dim;
    std::vector<double> resp0(n);
    double ll_prev = -std::numeric_limits<double>::infinity();
    double ll = ll_prev;

    for (int iter = 0; iter < config.max_iters; ++iter) {
        // E-step: responsibilities via log-sum-exp
        ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = data.data() + i * dim;
            const double l0 = std::log(p.weights[0]) + log_gaussian_diag(x, p.means[0], p.variances[0]);
            const double l1 = std::log(p.weights[1]) + log_gaussian_diag(x, p.means[1], p.variances[1]);
            const double m = std::max(l0, l1);
            const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
            resp0[i] = std::exp(l0 - lse);
            ll += lse;
        }
        if (ll_trace)
            ll_trace->push_back(ll);
        if (ll - ll_prev < config.tol && iter > 0)
            break;
        ll_prev = ll;

        // M-step
        double sum0 = 0.0;
        for (double r : resp0)
            sum0 += r;
        const double sum1 = static_cast<double>(n) - sum0;
        sum0 = std::max(sum0, 1e-12);
        const double safe_sum1 = std::max(sum1, 1e-12);

        for (int k = 0; k < 2; ++k) {
            const double norm = (k == 0) ? sum0 : safe_sum1;
            for (int d = 0; d < dim; ++d) {
                double mu = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = (k == 0) ? resp0[i] : 1.0 - resp0[i];
                    mu += r * data[i * dim + d];
                }
                mu /= norm;
                double var = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = (k == 0) ? resp0[i] : 1.0 - resp0[i];
                    const double diff = data[i * dim + d] - mu;
                    var += r * diff * diff;
                }
                var /= norm;
                p.means[k][d] = mu;
                p.variances[k][d] = std::max(var, kVarianceFloor);
            }
        }
        p.weights[0] = std::clamp(sum0 / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
        p.weights[1] = 1.0 - p.weights[0];
    }
    return ll;
}

inline GmmParams moments_of_split(const std::vector<double>& data, int dim,
                                  const std::vector<std::size_t>& low, const std::vector<std::size_t>& high) {
    GmmParams p;
    const std::array<const std::vector<std::size_t>*, 2> groups = {&low, &high};
    const std::size_t n = data.size() / dim;
    for (int k = 0; k < 2; ++k) {
        const auto& idx = *groups[k];
        p.means[k].assign(dim, 0.0);
        p.variances[k].assign(dim, 0.0);
        for (std::size_t i : idx)
            for (int d = 0; d < dim; ++d)
                p.means[k][d] += data[i * dim + d];
        for (int d = 0; d < dim; ++d)
            p.means[k][d] /= static_cast<double>(idx.size());
        for (std::size_t i : idx)
            for (int d = 0; d < dim; ++d) {
                const double diff = data[i * dim + d] - p.means[k][d];
                p.variances[k][d] += diff * diff;
            }
        for (int d = 0; d < dim; ++d)
            p.variances[k][d] = std::max(p.variances[k][d] / static_cast<double>(idx.size()), kVarianceFloor);
        p.weights[k] = static_cast<double>(idx.size()) / static_cast<double>(n);
    }
    return p;
}

} // namespace detail

/// Fit a two-component mixture by EM. Initialization is a quantile split on
/// dimension 0 (lower half seeds component 0), so fits are reproducible;
/// config.n_restarts adds seeded random initializations on top.
/// ll_trace, when given, receives the log-likelihood after every E-step.
inline GmmModel em_fit(const std::vector<double>& data, int dim, const GmmConfig& config = {},
                       std::vector<double>* ll_trace = nullptr) {
    if (dim < 1)
        throw DataError("gmm dimension must be >= 1");
    if (data.size() % dim != 0)
        throw DataError("data length is not a multiple of dim");
    const std::size_t n = data.size() / dim;
    if (n < 4)
        throw DataError("em_fit needs at least 4 samples, got " + std::to_string(n));
    for (double v : data)
        if (!std::isfinite(v))
            throw DataError("em_fit input contains a non-finite value");

    bool all_identical = true;
    for (std::size_t i = 1; i < n && all_identical; ++i)
        for (int d = 0; d < dim; ++d)
            if (data[i * dim + d] != data[d]) {
                all_identical = false;
                break;
            }
    if (all_identical)
        throw DegenerateFitError("all samples are identical; mixture fit is degenerate");

    // quantile split on dimension 0, stable in input order for ties
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data[a * dim] < data[b * dim];
    });
    const std::vector<std::size_t> low(order.begin(), order.begin() + n / 2);
    const std::vector<std::size_t> high(order.begin() + n / 2, order.end());

    detail::GmmParams best = detail::moments_of_split(data, dim, low, high);
    std::vector<double> trace;
    double best_ll = detail::run_em(data, dim, best, config, &trace);

    Rng rng(config.seed);
    for (int r = 0; r < config.n_restarts; ++r) {
        detail::GmmParams p;
        // two distinct random rows as means, global variance as spread
        const std::size_t i0 = static_cast<std::size_t>(rng.next_u64() % n);
        std::size_t i1 = static_cast<std::size_t>(rng.next_u64() % n);
        if (i1 == i0)
            i1 = (i1 + 1) % n;
        std::vector<double> global_var(dim, 0.0), global_mean(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (int d = 0; d < dim; ++d)
                global_mean[d] += data[i * dim + d];
        for (int d = 0; d < dim; ++d)
            global_mean[d] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (int d = 0; d < dim; ++d) {
                const double diff = data[i * dim + d] - global_mean[d];
                global_var[d] += diff * diff;
            }
        for (int d = 0; d < dim; ++d)
            global_var[d] = std::max(global_var[d] / static_cast<double>(n), kVarianceFloor);
        for (int k = 0; k < 2; ++k) {
            const std::size_t src = (k == 0) ? i0 : i1;
            p.means[k].assign(data.begin() + src * dim, data.begin() + (src + 1) * dim);
            p.variances[k] = global_var;
            p.weights[k] = 0.5;
        }
        std::vector<double> restart_trace;
        const double ll = detail::run_em(data, dim, p, config, &restart_trace);
        if (ll > best_ll) {
            best_ll = ll;
            best = p;
            trace = restart_trace;
        }
    }
    if (ll_trace)
        *ll_trace = trace;

    GmmModel model;
    model.dim = dim;
    model.weights = best.weights;
    model.means = best.means;
    model.variances = best.variances;
    model.real_component = (best.means[0][0] <= best.means[1][0]) ? 0 : 1;
    return model;
}

/// Posterior responsibilities of the two components at x.
inline std::array<double, 2> responsibilities(const GmmModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.dim)
        throw DataError("feature dimension " + std::to_string(x.size()) + " does not match model dim " +
                        std::to_string(model.dim));
    const double l0 = std::log(model.weights[0]) + detail::log_gaussian_diag(x.data(), model.means[0], model.variances[0]);
    const double l1 = std::log(model.weights[1]) + detail::log_gaussian_diag(x.data(), model.means[1], model.variances[1]);
    const double m = std::max(l0, l1);
    const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    return {std::exp(l0 - lse), std::exp(l1 - lse)};
}

struct GmmPrediction {
    int label = 0;          // 0 = real, 1 = fake
    double posterior = 0.0; // responsibility of the predicted component
};

/// Label of the higher-responsibility component; real_component maps to real.
inline GmmPrediction classify(const GmmModel& model, const std::vector<double>& x) {
    const std::array<double, 2> resp = responsibilities(model, x);
    const int winner = (resp[0] >= resp[1]) ? 0 : 1;
    GmmPrediction pred;
    pred.label = (winner == model.real_component) ? 0 : 1;
    pred.posterior = resp[winner];
    return pred;
}

inline GmmPrediction classify(const GmmModel& model, const FeatureVector& f) {
    const std::array<double, 6> a = f.as_array();
    return classify(model, std::vector<double>(a.begin(), a.end()));
}

/// 1-D two-component fit of one feature column; returns the component means
/// ordered smaller-first (Algorithm-style per-feature expectation values).
/// The column is standardized before fitting so the variance floor and
/// convergence tolerance are scale-free; the returned means therefore
/// transform exactly under any positive affine map of the column.
inline std::pair<double, double> feature_expectations(const std::vector<double>& values,
                                                      const GmmConfig& config = {}) {
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(values.empty() ? 1 : values.size());
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.empty() ? 1 : values.size());

    if (var == 0.0) {
        // constant column; em_fit produces the canonical degenerate error
        em_fit(values, 1, config);
    }
    const double sigma = std::sqrt(var);
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        z[i] = (values[i] - mean) / sigma;

    const GmmModel m = em_fit(z, 1, config);
    const double a = mean + sigma * m.means[0][0];
    const double b = mean + sigma * m.means[1][0];
    return (a <= b) ? std::make_pair(a, b) : std::make_pair(b, a);
}

// ---- persistence ----

inline nlohmann::json gmm_to_json(const GmmModel& model) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "gmm";
    j["dim"] = model.dim;
    j["weights"] = model.weights;
    j["means"] = model.means;
    j["variances"] = model.variances;
    j["real_component"] = model.real_component;
    return j;
}

inline GmmModel gmm_from_json(const nlohmann::json& j) {
    if (!j.contains("kind") || j["kind"] != "gmm")
        throw DataError("not a gmm model file");
    if (j.value("format_version", 0) != 1)
        throw DataError("unsupported gmm format_version");
    GmmModel m;
    m.dim = j.at("dim").get<int>();
    m.weights = j.at("weights").get<std::array<double, 2>>();
    m.means = j.at("means").get<std::array<std::vector<double>, 2>>();
    m.variances = j.at("variances").get<std::array<std::vector<double>, 2>>();
    m.real_component = j.at("real_component").get<int>();
    if (m.dim < 1 || m.real_component < 0 || m.real_component > 1)
        throw DataError("gmm model file has invalid fields");
    for (int k = 0; k < 2; ++k)
        if (m.means[k].size() != static_cast<std::size_t>(m.dim) ||
            m.variances[k].size() != static_cast<std::size_t>(m.dim))
            throw DataError("gmm model parameter arrays do not match dim");
    if (std::abs(m.weights[0] + m.weights[1] - 1.0) > 1e-12)
        throw DataError("gmm weights do not sum to 1");
    for (int k = 0; k < 2; ++k)
        for (double v : m.variances[k])
            if (!(v >= kVarianceFloor))
                throw DataError("gmm variance below floor");
    if (m.means[m.real_component][0] > m.means[1 - m.real_component][0])
        throw DataError("real_component does not have the smaller dimension-0 mean");
    return m;
}

} // namespace ganspec
