#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganspec/error.hpp"
#include "ganspec/evalkit.hpp"
#include "ganspec/features.hpp"
#include "ganspec/gmm.hpp"
#include "ganspec/svm.hpp"

namespace ganspec {

/// Per-feature mixture-component means (m0 < m1), the prior knowledge used to
/// rescale one domain's features onto a shared [0, 1]-anchored coordinate.
struct ExpectationTable {
    std::array<std::pair<double, double>, 6> pairs; // feature order as feature_names()
};

inline constexpr double kExpectationGapFloor = 1e-9;

inline void validate_expectations(const ExpectationTable& table) {
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& [m0, m1] = table.pairs[i];
        if (!(m1 - m0 >= kExpectationGapFloor))
            throw DegenerateFitError("expectation pair for feature '" + feature_names()[i] +
                                     "' is degenerate (gap " + format_g17(m1 - m0) + " < 1e-9)");
    }
}

/// One feature column of a table.
inline std::vector<double> feature_column(const FeatureTable& table, std::size_t column) {
    std::vector<double> out;
    out.reserve(table.size());
    for (const FeatureRow& r : table)
        out.push_back(r.features.as_array()[column]);
    return out;
}

/// Fit a 1-D two-component mixture per feature column and collect the
/// ordered component means. Label-free by construction.
inline ExpectationTable compute_expectations(const FeatureTable& table, const GmmConfig& config = {}) {
    if (table.size() < 4)
        throw DataError("expectation estimation needs at least 4 rows, got " +
                        std::to_string(table.size()));
    ExpectationTable out;
    for (std::size_t i = 0; i < 6; ++i) {
        try {
            out.pairs[i] = feature_expectations(feature_column(table, i), config);
        } catch (const DegenerateFitError& e) {
            throw DegenerateFitError("feature '" + feature_names()[i] + "': " + e.what());
        }
    }
    validate_expectations(out);
    return out;
}

/// Columnwise affine map f -> (f - m0) / (m1 - m0). No clipping; outliers may
/// land outside [0, 1].
inline FeatureTable scale_features(const FeatureTable& table, const ExpectationTable& expectations) {
    validate_expectations(expectations);
    FeatureTable out = table;
    for (FeatureRow& row : out) {
        std::array<double, 6> f = row.features.as_array();
        for (std::size_t i = 0; i < 6; ++i) {
            const auto& [m0, m1] = expectations.pairs[i];
            f[i] = (f[i] - m0) / (m1 - m0);
        }
        row.features = FeatureVector::from_array(f);
    }
    return out;
}

struct AdaptConfig {
    SvmConfig svm;
    GmmConfig gmm;
    // externally supplied prior knowledge; computed from the data when unset
    std::optional<ExpectationTable> source_expectations;
    std::optional<ExpectationTable> target_expectations;
};

struct AdaptResult {
    std::vector<int> predictions;        // 0 = real, 1 = fake, one per target row
    std::vector<double> decision_values; // signed SVM decisions
    ExpectationTable source_expectations;
    ExpectationTable target_expectations;
    SvmModel model;
    std::optional<Metrics> metrics;      // only when every target row is labeled
    std::optional<ConfusionCounts> counts;
};

/// Scale source and target by their own per-feature expectations, train on
/// the scaled source, predict the scaled target. Target labels, when present,
/// feed only the metrics block; they never influence scaling or training.
inline AdaptResult adapt_and_predict(const FeatureTable& source, const FeatureTable& target,
                                     const AdaptConfig& config = {}) {
    if (source.size() < 4 || target.size() < 4)
        throw DataError("adaptation needs at least 4 rows in both source and target");
    std::size_t real_count = 0, fake_count = 0;
    for (const FeatureRow& r : source) {
        if (!r.label)
            throw DataError("source row '" + r.path + "' is unlabeled");
        (*r.label == 0 ? real_count : fake_count)++;
    }
    if (real_count == 0)
        throw DataError("source contains no real (label 0) rows");
    if (fake_count == 0)
        throw DataError("source contains no fake (label 1) rows");

    AdaptResult result;
    result.source_expectations =
        config.source_expectations ? *config.source_expectations : compute_expectations(source, config.gmm);
    result.target_expectations =
        config.target_expectations ? *config.target_expectations : compute_expectations(target, config.gmm);

    const FeatureTable scaled_source = scale_features(source, result.source_expectations);
    const FeatureTable scaled_target = scale_features(target, result.target_expectations);

    std::vector<double> x;
    std::vector<int> y;
    x.reserve(scaled_source.size() * 6);
    for (const FeatureRow& r : scaled_source) {
        const std::array<double, 6> f = r.features.as_array();
        x.insert(x.end(), f.begin(), f.end());
        y.push_back(*r.label == 1 ? 1 : -1);
    }
    result.model = smo_train(x, y, 6, config.svm);

    result.predictions.reserve(scaled_target.size());
    result.decision_values.reserve(scaled_target.size());
    for (const FeatureRow& r : scaled_target) {
        const double value = result.model.decision(r.features);
        result.decision_values.push_back(value);
        result.predictions.push_back(value > 0.0 ? 1 : 0);
    }

    bool all_labeled = !target.empty();
    for (const FeatureRow& r : target)
        if (!r.label)
            all_labeled = false;
    if (all_labeled) {
        ConfusionCounts counts;
        for (std::size_t i = 0; i < target.size(); ++i)
            counts.add(*target[i].label, result.predictions[i]);
        result.counts = counts;
        result.metrics = metrics(counts);
    }
    return result;
}

// ---- persistence ----

inline nlohmann::json expectations_to_json(const ExpectationTable& table) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "expectations";
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t i = 0; i < 6; ++i)
        features.push_back({{"name", feature_names()[i]},
                            {"m0", table.pairs[i].first},
                            {"m1", table.pairs[i].second}});
    j["features"] = features;
    return j;
}

inline ExpectationTable expectations_from_json(const nlohmann::json& j) {
    if (!j.contains("kind") || j["kind"] != "expectations")
        throw DataError("not an expectation table file");
    if (j.value("format_version", 0) != 1)
        throw DataError("unsupported expectations format_version");
    const auto& features = j.at("features");
    if (!features.is_array() || features.size() != 6)
        throw DataError("expectation table must list exactly 6 features");
    ExpectationTable table;
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& f = features[i];
        if (f.at("name").get<std::string>() != feature_names()[i])
            throw DataError("expectation feature " + std::to_string(i) + " must be named '" +
                            feature_names()[i] + "'");
        table.pairs[i] = {f.at("m0").get<double>(), f.at("m1").get<double>()};
    }
    validate_expectations(table);
    return table;
}

} // namespace ganspec
