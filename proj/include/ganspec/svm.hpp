#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganspec/error.hpp"
#include "ganspec/features.hpp"

namespace ganspec {

/// exp(-gamma * ||a - b||^2)
inline double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    if (a.size() != b.size())
        throw DataError("rbf_kernel vectors differ in length");
    double dist2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        dist2 += d * d;
    }
    return std::exp(-gamma * dist2);
}

/// Per-feature standardization learned at training time and replayed at
/// inference: z = (x - shift) / scale.
struct FeatureScaling {
    std::vector<double> shift;
    std::vector<double> scale;

    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != shift.size())
            throw DataError("feature dimension does not match model scaling");
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            z[i] = (x[i] - shift[i]) / scale[i];
        return z;
    }
};

/// Soft-margin RBF SVM. Labels are encoded real = -1, fake = +1, so a
/// positive decision value means fake.
struct SvmModel {
    int dim = 0;
    double gamma = 0.0;
    double c = 0.0;
    double bias = 0.0;
    FeatureScaling scaling;
    std::vector<std::vector<double>> support_vectors; // already standardized
    std::vector<double> dual_coefs;                   // alpha_i * y_i

    /// Decision value for raw (unstandardized) features.
    double decision(const std::vector<double>& x) const {
        const std::vector<double> z = scaling.apply(x);
        double f = bias;
        for (std::size_t i = 0; i < support_vectors.size(); ++i)
            f += dual_coefs[i] * rbf_kernel(support_vectors[i], z, gamma);
        return f;
    }

    double decision(const FeatureVector& x) const {
        const std::array<double, 6> a = x.as_array();
        return decision(std::vector<double>(a.begin(), a.end()));
    }

    /// 1 = fake (positive decision), 0 = real.
    int predict(const std::vector<double>& x) const { return decision(x) > 0.0 ? 1 : 0; }
};

struct SvmConfig {
    double c = 1.0;
    std::optional<double> gamma;  // unset -> 1 / (dim * Var(standardized features))
    double tol = 1e-3;            // KKT tolerance
    int max_passes = 1000;        // cap on examine-all sweeps
};

/// Per-point diagnostics of one SMO run, for KKT and dual-objective checks.
struct SmoDiagnostics {
    std::vector<double> alpha;
    std::vector<double> train_decision; // f(x_i) at convergence
    int sweeps = 0;
};

namespace detail {

// Full kernel matrix caching cutoff; beyond this rows are recomputed on
// demand so training stays inside a sane memory budget.
inline constexpr std::size_t kKernelCacheLimit = 4096;

class SmoSolver {
public:
    SmoSolver(const std::vector<double>& x, const std::vector<int>& y, std::size_t n, int dim,
              double c, double gamma, double tol)
        : x_(x), y_(y), n_(n), dim_(dim), c_(c), gamma_(gamma), tol_(tol) {
        if (n_ <= kKernelCacheLimit) {
            kernel_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i; j < n_; ++j) {
                    const double k = eval_kernel(i, j);
                    kernel_[i * n_ + j] = k;
                    kernel_[j * n_ + i] = k;
                }
        } else {
            row1_.resize(n_);
            row2_.resize(n_);
        }
        alpha_.assign(n_, 0.0);
        error_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            error_[i] = -static_cast<double>(y_[i]); // f = 0 initially
        bias_ = 0.0;
    }

    int solve(int max_passes) {
        int sweeps = 0;
        bool examine_all = true;
        while (sweeps < max_passes) {
            ++sweeps;
            int changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (!examine_all && !is_unbound(i))
                    continue;
                changed += examine(i);
            }
            if (examine_all) {
                if (changed == 0)
                    break;
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        return sweeps;
    }

    double bias() const { return bias_; }
    const std::vector<double>& alpha() const { return alpha_; }
    double decision_at(std::size_t i) const { return error_[i] + y_[i]; }

private:
    bool is_unbound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }

    double eval_kernel(std::size_t i, std::size_t j) const {
        double dist2 = 0.0;
        for (int d = 0; d < dim_; ++d) {
            const double diff = x_[i * dim_ + d] - x_[j * dim_ + d];
            dist2 += diff * diff;
        }
        return std::exp(-gamma_ * dist2);
    }

    /// Row i of the kernel matrix, either cached or filled into scratch.
    const double* kernel_row(std::size_t i, std::vector<double>& scratch) const {
        if (!kernel_.empty())
            return kernel_.data() + i * n_;
        for (std::size_t j = 0; j < n_; ++j)
            scratch[j] = eval_kernel(i, j);
        return scratch.data();
    }

    int examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double a2 = alpha_[i2];
        const double e2 = error_[i2];
        const double r2 = e2 * y2; // y2*f(x2) - 1

        const bool violates = (r2 < -tol_ && a2 < c_) || (r2 > tol_ && a2 > 0.0);
        if (!violates)
            return 0;

        // first choice: largest |E1 - E2| among unbound points, lowest index wins ties
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (i == i2 || !is_unbound(i))
                continue;
            const double gap = std::abs(error_[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n_ && take_step(best, i2))
            return 1;

        // fallbacks: all unbound in index order, then everything
        for (std::size_t i = 0; i < n_; ++i)
            if (i != i2 && is_unbound(i) && take_step(i, i2))
                return 1;
        for (std::size_t i = 0; i < n_; ++i)
            if (i != i2 && !is_unbound(i) && take_step(i, i2))
                return 1;
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2)
            return false;
        const double a1_old = alpha_[i1], a2_old = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = error_[i1], e2 = error_[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s < 0) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(c_, c_ + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - c_);
            hi = std::min(c_, a1_old + a2_old);
        }
        if (lo >= hi)
            return false;

        const double* k1 = kernel_row(i1, row1_);
        const double* k2 = kernel_row(i2, row2_);
        const double k11 = k1[i1];
        const double k12 = k1[i2];
        const double k22 = k2[i2];
        const double eta = 2.0 * k12 - k11 - k22;

        double a2_new;
        if (eta < 0.0) {
            a2_new = a2_old - y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // flat direction: evaluate the dual objective at both clip bounds
            const double f1 = y1 * (e1 + bias_) - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * (e2 + bias_) - s * a1_old * k12 - a2_old * k22;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - 1e-12)
                a2_new = lo;
            else if (obj_lo > obj_hi + 1e-12)
                a2_new = hi;
            else
                return false;
        }
        if (std::abs(a2_new - a2_old) < 1e-8 * (a2_new + a2_old + 1e-8))
            return false;

        const double a1_new = a1_old + s * (a2_old - a2_new);

        // threshold update (Platt's b1/b2 rule)
        const double b1 = e1 + y1 * (a1_new - a1_old) * k11 + y2 * (a2_new - a2_old) * k12 + bias_;
        const double b2 = e2 + y1 * (a1_new - a1_old) * k12 + y2 * (a2_new - a2_old) * k22 + bias_;
        double b_new;
        if (a1_new > 0.0 && a1_new < c_)
            b_new = b1;
        else if (a2_new > 0.0 && a2_new < c_)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        const double d1 = y1 * (a1_new - a1_old);
        const double d2 = y2 * (a2_new - a2_old);
        const double db = b_new - bias_;
        for (std::size_t i = 0; i < n_; ++i)
            error_[i] += d1 * k1[i] + d2 * k2[i] - db;

        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        bias_ = b_new;
        // exact refresh of the two active points to limit cache drift
        error_[i1] = decision_from_row(k1) - y1;
        error_[i2] = decision_from_row(k2) - y2;
        return true;
    }

    double decision_from_row(const double* row) const {
        double f = -bias_;
        for (std::size_t j = 0; j < n_; ++j)
            if (alpha_[j] > 0.0)
                f += alpha_[j] * y_[j] * row[j];
        return f;
    }

    const std::vector<double>& x_;
    const std::vector<int>& y_;
    std::size_t n_;
    int dim_;
    double c_, gamma_, tol_;
    std::vector<double> kernel_; // full matrix when n fits the cache budget
    mutable std::vector<double> row1_, row2_;
    std::vector<double> alpha_;
    std::vector<double> error_;
    double bias_ = 0.0;
};

} // namespace detail

/// Train by sequential minimal optimization. features is row-major N x dim;
/// labels are -1 (real) / +1 (fake), both classes required. Features are
/// standardized per column before solving; the transform is stored in the
/// model and replayed at inference.
inline SvmModel smo_train(const std::vector<double>& features, const std::vector<int>& labels, int dim,
                          const SvmConfig& config = {}, SmoDiagnostics* diag = nullptr) {
    if (dim < 1)
        throw DataError("svm dimension must be >= 1");
    if (features.size() % dim != 0)
        throw DataError("feature matrix length is not a multiple of dim");
    const std::size_t n = features.size() / dim;
    if (n != labels.size())
        throw DataError("label count does not match feature rows");
    if (n < 2)
        throw DataError("smo_train needs at least 2 samples");
    if (config.c <= 0.0)
        throw DataError("svm c must be positive");
    for (double v : features)
        if (!std::isfinite(v))
            throw DataError("smo_train input contains a non-finite value");

    std::size_t pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1)
            ++pos;
        else if (y == -1)
            ++neg;
        else
            throw DataError("labels must be -1 (real) or +1 (fake)");
    }
    if (pos == 0)
        throw DataError("training data contains no fake (+1) samples");
    if (neg == 0)
        throw DataError("training data contains no real (-1) samples");

    // per-column standardization; constant columns pass through unscaled
    FeatureScaling scaling;
    scaling.shift.assign(dim, 0.0);
    scaling.scale.assign(dim, 1.0);
    for (int d = 0; d < dim; ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mean += features[i * dim + d];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = features[i * dim + d] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        scaling.shift[d] = mean;
        scaling.scale[d] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    std::vector<double> z(features.size());
    for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < dim; ++d)
            z[i * dim + d] = (features[i * dim + d] - scaling.shift[d]) / scaling.scale[d];

    double gamma;
    if (config.gamma) {
        gamma = *config.gamma;
        if (gamma <= 0.0)
            throw DataError("svm gamma must be positive");
    } else {
        // "scale" heuristic: 1 / (dim * pooled variance of standardized features)
        double pooled_mean = 0.0;
        for (double v : z)
            pooled_mean += v;
        pooled_mean /= static_cast<double>(z.size());
        double pooled_var = 0.0;
        for (double v : z) {
            const double diff = v - pooled_mean;
            pooled_var += diff * diff;
        }
        pooled_var /= static_cast<double>(z.size());
        gamma = pooled_var > 0.0 ? 1.0 / (dim * pooled_var) : 1.0 / dim;
    }

    detail::SmoSolver solver(z, labels, n, dim, config.c, gamma, config.tol);
    const int sweeps = solver.solve(config.max_passes);

    SvmModel model;
    model.dim = dim;
    model.gamma = gamma;
    model.c = config.c;
    model.bias = -solver.bias();
    model.scaling = scaling;
    for (std::size_t i = 0; i < n; ++i) {
        if (solver.alpha()[i] > 0.0) {
            model.support_vectors.emplace_back(z.begin() + i * dim, z.begin() + (i + 1) * dim);
            model.dual_coefs.push_back(solver.alpha()[i] * labels[i]);
        }
    }
    if (diag) {
        diag->alpha = solver.alpha();
        diag->sweeps = sweeps;
        diag->train_decision.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            diag->train_decision[i] = solver.decision_at(i);
    }
    return model;
}

/// f(x) = sum_i dual_coef_i * K(sv_i, scaled x) + bias.
inline double decision(const SvmModel& model, const std::vector<double>& x) {
    return model.decision(x);
}

inline double decision(const SvmModel& model, const FeatureVector& x) {
    return model.decision(x);
}

// ---- persistence ----

inline nlohmann::json svm_to_json(const SvmModel& model) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "svm";
    j["dim"] = model.dim;
    j["gamma"] = model.gamma;
    j["c"] = model.c;
    j["bias"] = model.bias;
    j["scaling"] = {{"shift", model.scaling.shift}, {"scale", model.scaling.scale}};
    j["support_vectors"] = model.support_vectors;
    j["dual_coefs"] = model.dual_coefs;
    return j;
}

inline SvmModel svm_from_json(const nlohmann::json& j) {
    if (!j.contains("kind") || j["kind"] != "svm")
        throw DataError("not an svm model file");
    if (j.value("format_version", 0) != 1)
        throw DataError("unsupported svm format_version");
    SvmModel m;
    m.dim = j.at("dim").get<int>();
    m.gamma = j.at("gamma").get<double>();
    m.c = j.at("c").get<double>();
    m.bias = j.at("bias").get<double>();
    m.scaling.shift = j.at("scaling").at("shift").get<std::vector<double>>();
    m.scaling.scale = j.at("scaling").at("scale").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
    if (m.dim < 1 || m.gamma <= 0.0 || m.c <= 0.0)
        throw DataError("svm model file has invalid fields");
    if (m.scaling.shift.size() != static_cast<std::size_t>(m.dim) ||
        m.scaling.scale.size() != static_cast<std::size_t>(m.dim))
        throw DataError("svm scaling arrays do not match dim");
    if (m.support_vectors.size() != m.dual_coefs.size())
        throw DataError("svm support vector and dual coefficient counts differ");
    for (const auto& sv : m.support_vectors)
        if (sv.size() != static_cast<std::size_t>(m.dim))
            throw DataError("svm support vector does not match dim");
    for (double a : m.dual_coefs)
        if (std::abs(a) > m.c + 1e-9)
            throw DataError("svm dual coefficient exceeds the box constraint");
    return m;
}

} // namespace ganspec
