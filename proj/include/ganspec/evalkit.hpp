#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganspec/error.hpp"
#include "ganspec/text.hpp"

namespace ganspec {

/// Positive class = fake throughout.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }

    void add(int truth, int predicted) {
        if (truth == 1)
            predicted == 1 ? ++tp : ++fn;
        else
            predicted == 1 ? ++fp : ++tn;
    }
};

struct Metrics {
    double accuracy = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    std::vector<std::string> degenerate; // metrics whose 0/0 quotient was defined as 0
};

inline Metrics metrics(const ConfusionCounts& c) {
    if (c.total() == 0)
        throw DataError("metrics need at least one evaluated sample");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fn == 0) {
        m.recall = 0.0;
        m.degenerate.push_back("recall");
    } else {
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (c.tp + c.fp == 0) {
        m.precision = 0.0;
        m.degenerate.push_back("precision");
    } else {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (m.precision + m.recall == 0.0) {
        m.f1 = 0.0;
        m.degenerate.push_back("f1");
    } else {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

inline nlohmann::json metrics_to_json(const Metrics& m, const ConfusionCounts& c) {
    nlohmann::json j;
    j["accuracy"] = m.accuracy;
    j["recall"] = m.recall;
    j["precision"] = m.precision;
    j["f1"] = m.f1;
    j["counts"] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
    j["positive_class"] = "fake";
    j["degenerate_metrics"] = m.degenerate;
    return j;
}

/// Table-style 4-decimal summary for terminal output.
inline std::string format_metrics_human(const Metrics& m, const ConfusionCounts& c) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "accuracy %.4f  recall %.4f  precision %.4f  f1 %.4f  (positive class: fake; "
                  "tp %llu fp %llu tn %llu fn %llu)",
                  m.accuracy, m.recall, m.precision, m.f1,
                  static_cast<unsigned long long>(c.tp), static_cast<unsigned long long>(c.fp),
                  static_cast<unsigned long long>(c.tn), static_cast<unsigned long long>(c.fn));
    std::string out = buf;
    if (!m.degenerate.empty()) {
        out += "  [degenerate:";
        for (const std::string& name : m.degenerate)
            out += " " + name;
        out += "]";
    }
    return out;
}

struct Histogram {
    std::vector<double> edges;       // bins + 1 ascending values
    std::vector<std::uint64_t> counts; // one per bin; rightmost bin closed
};

/// Equal-width bins spanning [min, max]. An all-identical sample gets a unit
/// span so the single occupied bin has nonzero width.
inline Histogram histogram(const std::vector<double>& values, int bins) {
    if (values.empty())
        throw DataError("histogram needs at least one value");
    if (bins < 1)
        throw DataError("histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo)
        hi = lo + 1.0;

    Histogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : values) {
        int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[idx];
    }
    return h;
}

/// CSV rows bin_left,bin_right,count.
inline void write_histogram_csv(const Histogram& h, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + file);
    out << "bin_left,bin_right,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << format_g17(h.edges[b]) << ',' << format_g17(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
}

} // namespace ganspec
