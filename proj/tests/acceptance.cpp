// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier than the unit tests; everything is seeded.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "ganspec/ganspec.hpp"

using namespace ganspec;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %-28s %s\n", pass ? "PASS" : "FAIL", index, name.c_str(), detail.c_str());
    if (!pass)
        ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Plane random_plane(int w, int h, Rng& rng) {
    Plane p(w, h);
    for (double& v : p.values)
        v = rng.uniform(0.0, 255.0);
    return p;
}

double rel_frobenius_error(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

struct LabeledFeatures {
    std::vector<double> x; // N x 6
    std::vector<int> y01;  // 0 = real, 1 = fake
};

void append_image_features(LabeledFeatures& out, const RgbImage& img, int label) {
    const auto f = extract_from_image(img).as_array();
    out.x.insert(out.x.end(), f.begin(), f.end());
    out.y01.push_back(label);
}

LabeledFeatures synth_features(const SynthConfig& cfg, int n_real, int n_fake, std::uint64_t stream) {
    LabeledFeatures out;
    for (int i = 0; i < n_real; ++i) {
        Rng rng(derive_seed(stream, static_cast<std::uint64_t>(i)));
        append_image_features(out, gen_real_like(cfg.size, rng, cfg), 0);
    }
    for (int i = 0; i < n_fake; ++i) {
        Rng rng(derive_seed(stream, static_cast<std::uint64_t>(1000000 + i)));
        append_image_features(out, gen_fake_like(cfg.size, rng, cfg), 1);
    }
    return out;
}

FeatureTable to_table(const LabeledFeatures& data) {
    FeatureTable table;
    for (std::size_t i = 0; i < data.y01.size(); ++i) {
        FeatureRow row;
        row.path = "row_" + std::to_string(i);
        row.label = data.y01[i];
        std::array<double, 6> f;
        std::copy(data.x.begin() + i * 6, data.x.begin() + (i + 1) * 6, f.begin());
        row.features = FeatureVector::from_array(f);
        table.push_back(row);
    }
    return table;
}

std::vector<int> pm1_labels(const std::vector<int>& y01) {
    std::vector<int> y;
    y.reserve(y01.size());
    for (int v : y01)
        y.push_back(v == 1 ? 1 : -1);
    return y;
}

double svm_accuracy(const SvmModel& m, const LabeledFeatures& data) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.y01.size(); ++i) {
        const std::vector<double> row(data.x.begin() + i * 6, data.x.begin() + (i + 1) * 6);
        if (m.predict(row) == data.y01[i])
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.y01.size());
}

// ---- criteria ----

void criterion_1_dft_oracle() {
    const auto t0 = Clock::now();
    Rng rng(101);
    const std::pair<int, int> sizes[] = {{2, 2}, {3, 3}, {8, 8}, {16, 16}, {17, 32}};
    double worst = 0.0;
    for (const auto& [w, h] : sizes)
        for (int rep = 0; rep < 50; ++rep) {
            const Plane p = random_plane(w, h, rng);
            worst = std::max(worst, rel_frobenius_error(dft2_fast(p), dft2_naive(p)));
        }
    const double elapsed = seconds_since(t0);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "worst rel error %.3e (tol 1e-9), %.2f s (limit 10 s)",
                  worst, elapsed);
    report(1, "dft oracle equivalence", worst < 1e-9 && elapsed < 10.0, detail);
}

void criterion_2_parseval_symmetry() {
    Rng rng(202);
    double worst_parseval = 0.0, worst_symmetry = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int w = 2 + static_cast<int>(rng.next_u64() % 30);
        const int h = 2 + static_cast<int>(rng.next_u64() % 30);
        const Plane p = random_plane(w, h, rng);
        const auto f = dft2_fast(p);

        double spatial = 0.0;
        for (double v : p.values)
            spatial += v * v;
        double spectral = 0.0;
        for (const Complex& v : f)
            spectral += std::norm(v);
        worst_parseval = std::max(worst_parseval,
                                  std::abs(spectral - w * h * spatial) / (w * h * spatial));

        for (int v = 0; v < h; ++v)
            for (int u = 0; u < w; ++u) {
                const double a = std::abs(f[static_cast<std::size_t>(v) * w + u]);
                const double b = std::abs(f[static_cast<std::size_t>((h - v) % h) * w + (w - u) % w]);
                worst_symmetry = std::max(worst_symmetry, std::abs(a - b) / (1.0 + a));
            }
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "parseval %.3e, symmetry %.3e (tol 1e-6)", worst_parseval,
                  worst_symmetry);
    report(2, "parseval + conjugate symmetry", worst_parseval < 1e-6 && worst_symmetry < 1e-6, detail);
}

void criterion_3_zero_case() {
    Rng rng(303);
    bool pass = true;
    double worst_icorr = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        RgbImage img;
        img.red = random_plane(4 + rep % 13, 4 + rep % 7, rng);
        img.green = img.red;
        img.blue = img.red;
        const FeatureVector f = extract_from_image(img);
        pass = pass && f.mean == 0.0 && f.max == 0.0 && f.min == 0.0;
        worst_icorr = std::max({worst_icorr, std::abs(f.icorr_rg), std::abs(f.icorr_rb),
                                std::abs(f.icorr_gb)});
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "d exactly 0: %s, worst icorr %.3e (tol 1e-12)",
                  pass ? "yes" : "no", worst_icorr);
    report(3, "feature zero-case", pass && worst_icorr <= 1e-12, detail);
}

void criterion_4_hand_fixture() {
    RgbImage img;
    img.red = Plane(2, 2);
    img.red.values = {1, 2, 3, 4};
    img.green = Plane(2, 2, 2.5);
    img.blue = Plane(2, 2, 2.5);
    const SpectrumSet s = spectrum(img);
    const bool spec_ok = s.spec_r.values[0] == 10.0 && s.spec_r.values[1] == 2.0 &&
                         s.spec_r.values[2] == 4.0 && s.spec_r.values[3] == 0.0;
    const double d_rg = pairwise_diff(s.spec_r, s.spec_g);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "spec_r [[10,2],[4,0]]: %s, d_RG = %.17g (want 1.5 exactly)",
                  spec_ok ? "exact" : "NOT exact", d_rg);
    report(4, "hand-computed feature fixture", spec_ok && d_rg == 1.5, detail);
}

void criterion_5_em_behavior() {
    std::vector<double> fixture = {-0.1, 0.0, 0.1, 4.9, 5.0, 5.1};
    std::vector<double> trace;
    const GmmModel m = em_fit(fixture, 1, {}, &trace);
    const int lo = m.real_component;
    const bool means_ok = std::abs(m.means[lo][0] - 0.0) < 0.2 && std::abs(m.means[1 - lo][0] - 5.0) < 0.2;

    bool monotone = true;
    double worst_drop = 0.0;
    auto check_trace = [&](const std::vector<double>& t) {
        for (std::size_t i = 1; i < t.size(); ++i) {
            worst_drop = std::max(worst_drop, t[i - 1] - t[i]);
            if (t[i] < t[i - 1] - 1e-10)
                monotone = false;
        }
    };
    check_trace(trace);
    Rng rng(505);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> data;
        const int n = 20 + static_cast<int>(rng.next_u64() % 60);
        for (int i = 0; i < n; ++i)
            data.push_back((rng.next_bool() ? 0.0 : 4.0 + rng.uniform(0.0, 4.0)) + rng.uniform(-1.0, 1.0));
        std::vector<double> t;
        em_fit(data, 1, {}, &t);
        check_trace(t);
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "means (%.3f, %.3f) vs (0, 5), worst ll drop %.2e",
                  m.means[lo][0], m.means[1 - lo][0], worst_drop);
    report(5, "em fixture + monotonicity", means_ok && monotone, detail);
}

void criterion_6_smo_correctness() {
    Rng rng(606);
    bool kkt_ok = true;
    auto kkt_point_ok = [](double alpha, double margin, double c, double tol) {
        if (alpha <= 1e-9)
            return margin >= 1.0 - tol;
        if (alpha >= c - 1e-9)
            return margin <= 1.0 + tol;
        return std::abs(margin - 1.0) <= tol;
    };
    for (int rep = 0; rep < 20; ++rep) {
        const double gap = (rep % 2 == 0) ? 6.0 : 0.8; // separable and heavily overlapping
        std::vector<double> x;
        std::vector<int> y;
        for (int i = 0; i < 30; ++i) {
            const int label = (i < 15) ? -1 : 1;
            for (int d = 0; d < 6; ++d)
                x.push_back((label < 0 ? 0.0 : gap) + rng.uniform(-1.0, 1.0));
            y.push_back(label);
        }
        SvmConfig config;
        SmoDiagnostics diag;
        smo_train(x, y, 6, config, &diag);
        for (std::size_t i = 0; i < y.size(); ++i)
            if (!kkt_point_ok(diag.alpha[i], y[i] * diag.train_decision[i], config.c, config.tol))
                kkt_ok = false;
    }

    // XOR
    std::vector<double> xor_x;
    std::vector<int> xor_y;
    const double pattern[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    const int labels[4] = {1, -1, -1, 1};
    for (int i = 0; i < 4; ++i) {
        xor_x.push_back(pattern[i][0]);
        xor_x.push_back(pattern[i][1]);
        for (int d = 2; d < 6; ++d)
            xor_x.push_back(0.0);
        xor_y.push_back(labels[i]);
    }
    const SvmModel xor_model = smo_train(xor_x, xor_y, 6);
    bool xor_ok = true;
    for (int i = 0; i < 4; ++i) {
        const std::vector<double> row(xor_x.begin() + i * 6, xor_x.begin() + (i + 1) * 6);
        if (xor_model.predict(row) != (xor_y[i] > 0 ? 1 : 0))
            xor_ok = false;
    }

    // dual objective vs random feasible points
    std::vector<double> x;
    std::vector<int> y;
    for (int i = 0; i < 24; ++i) {
        const int label = (i < 12) ? -1 : 1;
        for (int d = 0; d < 6; ++d)
            x.push_back((label < 0 ? 0.0 : 2.0) + rng.uniform(-1.0, 1.0));
        y.push_back(label);
    }
    SvmConfig config;
    SmoDiagnostics diag;
    const SvmModel m = smo_train(x, y, 6, config, &diag);
    std::vector<std::vector<double>> z;
    for (std::size_t i = 0; i < y.size(); ++i)
        z.push_back(m.scaling.apply(std::vector<double>(x.begin() + i * 6, x.begin() + (i + 1) * 6)));
    auto objective = [&](const std::vector<double>& alpha) {
        double obj = 0.0;
        for (double a : alpha)
            obj += a;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            for (std::size_t j = 0; j < alpha.size(); ++j)
                obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * rbf_kernel(z[i], z[j], m.gamma);
        return obj;
    };
    const double smo_obj = objective(diag.alpha);
    bool dual_ok = true;
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> alpha(y.size());
        for (double& a : alpha)
            a = rng.uniform(0.0, config.c);
        double sp = 0.0, sn = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            (y[i] > 0 ? sp : sn) += alpha[i];
        const double target = std::min(sp, sn);
        for (std::size_t i = 0; i < y.size(); ++i)
            alpha[i] *= target / (y[i] > 0 ? sp : sn);
        if (objective(alpha) > smo_obj + 1e-9)
            dual_ok = false;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "kkt %s, xor %s, dual-vs-random %s", kkt_ok ? "ok" : "BAD",
                  xor_ok ? "1.0" : "BAD", dual_ok ? "ok" : "BAD");
    report(6, "smo correctness", kkt_ok && xor_ok && dual_ok, detail);
}

void criterion_7_end_to_end() {
    const auto t0 = Clock::now();
    SynthConfig cfg;
    cfg.size = 64;
    const LabeledFeatures train = synth_features(cfg, 500, 500, 904001);
    const LabeledFeatures test = synth_features(cfg, 500, 500, 904002);

    const SvmModel svm = smo_train(train.x, pm1_labels(train.y01), 6);
    const double svm_accuracy_value = svm_accuracy(svm, test);

    const GmmModel gmm = em_fit(train.x, 6);
    std::size_t gmm_correct = 0;
    for (std::size_t i = 0; i < test.y01.size(); ++i) {
        const std::vector<double> row(test.x.begin() + i * 6, test.x.begin() + (i + 1) * 6);
        if (classify(gmm, row).label == test.y01[i])
            ++gmm_correct;
    }
    const double gmm_accuracy = static_cast<double>(gmm_correct) / test.y01.size();
    const double elapsed = seconds_since(t0);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "svm %.4f (>= 0.95), gmm %.4f (>= 0.85), %.1f s (limit 300 s)", svm_accuracy_value,
                  gmm_accuracy, elapsed);
    report(7, "synthetic end-to-end", svm_accuracy_value >= 0.95 && gmm_accuracy >= 0.85 && elapsed < 300.0,
           detail);
}

void criterion_8_unbalanced() {
    SynthConfig cfg;
    cfg.size = 64;
    const LabeledFeatures reals = synth_features(cfg, 2000, 0, 905001);
    const LabeledFeatures test = synth_features(cfg, 500, 500, 905002);

    const double fractions[] = {0.25, 0.05, 0.01};
    double worst_f1 = 1.0;
    char per_fraction[96] = "";
    for (double fraction : fractions) {
        SynthConfig counting = cfg;
        counting.count = 2000;
        counting.fake_fraction = fraction;
        const int n_fake = corpus_counts(counting).second;
        const LabeledFeatures fakes = synth_features(cfg, 0, n_fake, 905003);

        LabeledFeatures train = reals;
        train.x.insert(train.x.end(), fakes.x.begin(), fakes.x.end());
        train.y01.insert(train.y01.end(), fakes.y01.begin(), fakes.y01.end());

        const SvmModel m = smo_train(train.x, pm1_labels(train.y01), 6);
        ConfusionCounts counts;
        for (std::size_t i = 0; i < test.y01.size(); ++i) {
            const std::vector<double> row(test.x.begin() + i * 6, test.x.begin() + (i + 1) * 6);
            counts.add(test.y01[i], m.predict(row));
        }
        const Metrics metric_values = metrics(counts);
        worst_f1 = std::min(worst_f1, metric_values.f1);
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %g%%:%.4f", fraction * 100.0, metric_values.f1);
        std::strncat(per_fraction, buf, sizeof(per_fraction) - std::strlen(per_fraction) - 1);
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "f1 per fraction%s (all >= 0.90)", per_fraction);
    report(8, "unbalanced training regimes", worst_f1 >= 0.90, detail);
}

void criterion_9_domain_adaptation() {
    SynthConfig source_cfg;
    source_cfg.size = 64;
    source_cfg.noise_amplitude = 8.0;
    SynthConfig target_cfg = source_cfg;
    target_cfg.noise_amplitude = 16.0;

    const FeatureTable source = to_table(synth_features(source_cfg, 400, 400, 906001));
    const FeatureTable target = to_table(synth_features(target_cfg, 400, 400, 906002));

    const AdaptResult base = adapt_and_predict(source, target);
    const double accuracy = base.metrics ? base.metrics->accuracy : 0.0;

    FeatureTable transformed = target;
    const double gains[6] = {3.0, 0.5, 2.0, 12.0, 0.75, 5.0};
    const double offsets[6] = {10.0, -2.0, 0.5, 1.0, -0.25, 3.0};
    for (FeatureRow& r : transformed) {
        auto f = r.features.as_array();
        for (int c = 0; c < 6; ++c)
            f[c] = gains[c] * f[c] + offsets[c];
        r.features = FeatureVector::from_array(f);
    }
    const AdaptResult moved = adapt_and_predict(source, transformed);
    bool invariant = moved.predictions == base.predictions;
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < base.decision_values.size(); ++i)
        worst_gap = std::max(worst_gap, std::abs(moved.decision_values[i] - base.decision_values[i]));
    invariant = invariant && worst_gap <= 1e-9;

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "accuracy %.4f (>= 0.80), affine invariance gap %.2e (tol 1e-9)", accuracy, worst_gap);
    report(9, "domain adaptation", accuracy >= 0.80 && invariant, detail);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void criterion_10_determinism() {
    const std::string cli = GANSPEC_CLI_PATH;
    const std::string dir = (std::filesystem::temp_directory_path() /
                             ("ganspec_accept_" + std::to_string(::getpid()))).string();
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto shell = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };

    bool ok = shell("synth --count 12 --size 32 --seed 10 --out " + dir + "/corpus") == 0;
    ok = ok && shell("extract --manifest " + dir + "/corpus/manifest.jsonl --jobs 1 --out " + dir + "/j1.csv") == 0;
    ok = ok && shell("extract --manifest " + dir + "/corpus/manifest.jsonl --jobs 8 --out " + dir + "/j8.csv") == 0;
    const bool extract_identical = ok && slurp(dir + "/j1.csv") == slurp(dir + "/j8.csv");

    ok = ok && shell("train gmm --features " + dir + "/j1.csv --out " + dir + "/g1.json") == 0;
    ok = ok && shell("train gmm --features " + dir + "/j1.csv --out " + dir + "/g2.json") == 0;
    ok = ok && shell("train svm --features " + dir + "/j1.csv --out " + dir + "/s1.json") == 0;
    ok = ok && shell("train svm --features " + dir + "/j1.csv --out " + dir + "/s2.json") == 0;
    const bool training_identical =
        ok && slurp(dir + "/g1.json") == slurp(dir + "/g2.json") && slurp(dir + "/s1.json") == slurp(dir + "/s2.json");

    std::filesystem::remove_all(dir);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "extract jobs 1 vs 8: %s, repeated training: %s",
                  extract_identical ? "identical" : "DIFFER", training_identical ? "identical" : "DIFFER");
    report(10, "cli determinism", extract_identical && training_identical, detail);
}

void criterion_11_persistence() {
    SynthConfig cfg;
    cfg.size = 32;
    const LabeledFeatures data = synth_features(cfg, 60, 60, 907001);

    const SvmModel svm = smo_train(data.x, pm1_labels(data.y01), 6);
    const SvmModel svm_loaded = svm_from_json(nlohmann::json::parse(svm_to_json(svm).dump()));
    const GmmModel gmm = em_fit(data.x, 6);
    const GmmModel gmm_loaded = gmm_from_json(nlohmann::json::parse(gmm_to_json(gmm).dump()));
    const ExpectationTable expectations = compute_expectations(to_table(data));
    const ExpectationTable expectations_loaded =
        expectations_from_json(nlohmann::json::parse(expectations_to_json(expectations).dump()));

    Rng rng(908);
    bool exact = true;
    FeatureTable random_rows;
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> x(6);
        for (double& v : x)
            v = rng.uniform(-5.0, 500.0);
        if (svm.decision(x) != svm_loaded.decision(x))
            exact = false;
        const GmmPrediction a = classify(gmm, x);
        const GmmPrediction b = classify(gmm_loaded, x);
        if (a.label != b.label || a.posterior != b.posterior)
            exact = false;
        FeatureRow row;
        row.features = FeatureVector::from_array({x[0], x[1], x[2], x[3], x[4], x[5]});
        random_rows.push_back(row);
    }
    const FeatureTable scaled_a = scale_features(random_rows, expectations);
    const FeatureTable scaled_b = scale_features(random_rows, expectations_loaded);
    for (std::size_t i = 0; i < scaled_a.size(); ++i)
        if (scaled_a[i].features.as_array() != scaled_b[i].features.as_array())
            exact = false;

    report(11, "persistence round-trip", exact,
           exact ? "500 random vectors match exactly" : "reloaded predictions DIFFER");
}

} // namespace

int main() {
    std::printf("ganspec acceptance suite\n");
    const auto t0 = Clock::now();
    criterion_1_dft_oracle();
    criterion_2_parseval_symmetry();
    criterion_3_zero_case();
    criterion_4_hand_fixture();
    criterion_5_em_behavior();
    criterion_6_smo_correctness();
    criterion_7_end_to_end();
    criterion_8_unbalanced();
    criterion_9_domain_adaptation();
    criterion_10_determinism();
    criterion_11_persistence();
    std::printf("%d of 11 criteria passed in %.1f s\n", 11 - g_failures, seconds_since(t0));
    return g_failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
