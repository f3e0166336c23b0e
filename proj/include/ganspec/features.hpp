#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ganspec/error.hpp"
#include "ganspec/image.hpp"
#include "ganspec/imageio.hpp"
#include "ganspec/manifest.hpp"
#include "ganspec/spectral.hpp"
#include "ganspec/text.hpp"

namespace ganspec {

/// The six descriptive scalars of one image. mean/max/min summarize the
/// pairwise mean-absolute spectrum differences; icorr_* are 1 - Pearson
/// correlation between two channels' spectra (0 = perfect synchrony).
struct FeatureVector {
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    double icorr_rg = 0.0;
    double icorr_rb = 0.0;
    double icorr_gb = 0.0;

    std::array<double, 6> as_array() const {
        return {mean, max, min, icorr_rg, icorr_rb, icorr_gb};
    }
    static FeatureVector from_array(const std::array<double, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
};

inline const std::array<std::string, 6>& feature_names() {
    static const std::array<std::string, 6> names = {
        "mean", "max", "min", "icorr_rg", "icorr_rb", "icorr_gb"};
    return names;
}

namespace detail {
inline void check_same_dims(const Plane& a, const Plane& b) {
    if (a.width != b.width || a.height != b.height)
        throw DataError("plane dimensions differ: " + std::to_string(a.width) + "x" +
                        std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                        std::to_string(b.height));
}
} // namespace detail

/// Mean absolute difference over all bins: (1/(W*H)) * sum |a - b|.
inline double pairwise_diff(const Plane& a, const Plane& b) {
    detail::check_same_dims(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += std::abs(a.values[i] - b.values[i]);
    return acc / static_cast<double>(a.values.size());
}

/// Pearson correlation over the flattened planes, all bins included.
/// A plane with variance below 1e-12 yields 0 instead of an error so batch
/// extraction never aborts on degenerate pixels.
inline double pearson(const Plane& a, const Plane& b) {
    detail::check_same_dims(a, b);
    const std::size_t n = a.values.size();
    if (n < 2)
        throw DataError("pearson needs at least 2 bins");
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a.values[i];
        mean_b += b.values[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.values[i] - mean_a;
        const double db = b.values[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    cov /= static_cast<double>(n);
    var_a /= static_cast<double>(n);
    var_b /= static_cast<double>(n);
    if (var_a < 1e-12 || var_b < 1e-12)
        return 0.0;
    return cov / (std::sqrt(var_a) * std::sqrt(var_b));
}

/// Reduce one spectrum set to the six features.
inline FeatureVector extract(const SpectrumSet& s) {
    const double d_rg = pairwise_diff(s.spec_r, s.spec_g);
    const double d_rb = pairwise_diff(s.spec_r, s.spec_b);
    const double d_gb = pairwise_diff(s.spec_g, s.spec_b);

    FeatureVector f;
    f.mean = (d_rg + d_rb + d_gb) / 3.0;
    f.max = std::max({d_rg, d_rb, d_gb});
    f.min = std::min({d_rg, d_rb, d_gb});
    f.icorr_rg = -pearson(s.spec_r, s.spec_g) + 1.0;
    f.icorr_rb = -pearson(s.spec_r, s.spec_b) + 1.0;
    f.icorr_gb = -pearson(s.spec_g, s.spec_b) + 1.0;
    return f;
}

inline FeatureVector extract_from_image(const RgbImage& img) {
    return extract(spectrum(img));
}

/// One feature-table row: source path, optional label, six features.
struct FeatureRow {
    std::string path;
    std::optional<int> label;
    FeatureVector features;
};

using FeatureTable = std::vector<FeatureRow>;

struct ExtractOptions {
    int jobs = 1;            // worker threads; output order is manifest order regardless
    bool permissive = false; // skip unreadable entries instead of aborting
};

struct ExtractReport {
    std::vector<std::string> skipped; // "path: reason" for each skipped entry
};

/// Extract features for every manifest entry, order-preserving. Load failures
/// abort with the offending path unless options.permissive is set, in which
/// case the row is skipped and reported.
inline FeatureTable extract_batch(const Manifest& manifest, const ExtractOptions& options = {},
                                  ExtractReport* report = nullptr) {
    const std::size_t n = manifest.size();
    std::vector<std::optional<FeatureRow>> slots(n);
    std::vector<std::string> failures(n);

    const int jobs = std::max(1, options.jobs);
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> stop{false};

    auto worker = [&]() {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= n)
                return;
            try {
                FeatureRow row;
                row.path = manifest[i].path;
                row.label = manifest[i].label;
                row.features = extract_from_image(load_image(manifest[i].path));
                slots[i] = std::move(row);
            } catch (const std::exception& e) {
                failures[i] = e.what();
                if (!options.permissive)
                    stop.store(true, std::memory_order_relaxed);
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    FeatureTable rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            rows.push_back(std::move(*slots[i]));
        } else if (!failures[i].empty()) {
            if (!options.permissive)
                throw DataError(manifest[i].path + ": " + failures[i]);
            if (report)
                report->skipped.push_back(manifest[i].path + ": " + failures[i]);
        } else if (!options.permissive) {
            // entry never processed because an earlier failure stopped the pool
            continue;
        }
    }
    return rows;
}

inline const char* kFeatureCsvHeader = "path,label,mean,max,min,icorr_rg,icorr_rb,icorr_gb";

namespace detail {
inline std::string csv_quote_path(const std::string& path) {
    if (path.find_first_of(",\"\n") == std::string::npos)
        return path;
    std::string quoted = "\"";
    for (char c : path) {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}
} // namespace detail

/// Feature CSV with 17-significant-digit floats, lossless on round-trip.
inline void write_feature_csv(const FeatureTable& rows, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + file);
    out << kFeatureCsvHeader << '\n';
    for (const FeatureRow& r : rows) {
        out << detail::csv_quote_path(r.path) << ',';
        if (r.label)
            out << *r.label;
        const std::array<double, 6> f = r.features.as_array();
        for (double v : f)
            out << ',' << format_g17(v);
        out << '\n';
    }
}

inline FeatureTable read_feature_csv(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + file);
    std::string line;
    if (!std::getline(in, line) || line != kFeatureCsvHeader)
        throw DataError(file + ": bad or missing feature CSV header");

    FeatureTable rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const std::string where = file + ":" + std::to_string(lineno);

        FeatureRow row;
        std::size_t pos = 0;
        if (!line.empty() && line[0] == '"') {
            std::string path;
            pos = 1;
            while (pos < line.size()) {
                if (line[pos] == '"') {
                    if (pos + 1 < line.size() && line[pos + 1] == '"') {
                        path += '"';
                        pos += 2;
                    } else {
                        ++pos;
                        break;
                    }
                } else {
                    path += line[pos++];
                }
            }
            if (pos >= line.size() || line[pos] != ',')
                throw DataError(where + ": malformed quoted path");
            ++pos;
            row.path = path;
        } else {
            const std::size_t comma = line.find(',');
            if (comma == std::string::npos)
                throw DataError(where + ": expected 8 columns");
            row.path = line.substr(0, comma);
            pos = comma + 1;
        }

        const std::vector<std::string> cols = split(line.substr(pos), ',');
        if (cols.size() != 7)
            throw DataError(where + ": expected 8 columns, got " + std::to_string(cols.size() + 1));
        if (!cols[0].empty()) {
            const long label = parse_long(cols[0], where);
            if (label != 0 && label != 1)
                throw DataError(where + ": label must be 0 or 1");
            row.label = static_cast<int>(label);
        }
        std::array<double, 6> f{};
        for (std::size_t i = 0; i < 6; ++i)
            f[i] = parse_double(cols[i + 1], where);
        row.features = FeatureVector::from_array(f);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace ganspec
