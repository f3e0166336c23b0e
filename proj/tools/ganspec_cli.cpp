// ganspec: classify images as real or GAN-generated from the asynchrony of
// their per-channel frequency spectra.
//
// Subcommands: synth, extract, train gmm, train svm, eval, adapt,
// spectrum-dump, histogram. See README.md for the file formats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ganspec/ganspec.hpp"

namespace {

using nlohmann::json;

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ganspec::IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// FNV-1a 64-bit content digest, recorded in model provenance blocks.
std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ganspec::IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ganspec::IoError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ganspec::DataError(path + ": invalid JSON: " + e.what());
    }
}

/// Flat feature matrix plus +-1 labels; every row must be labeled.
void labeled_matrix(const ganspec::FeatureTable& table, std::vector<double>& x, std::vector<int>& y) {
    x.clear();
    y.clear();
    for (const ganspec::FeatureRow& r : table) {
        if (!r.label)
            throw ganspec::DataError("row '" + r.path + "' is unlabeled");
        const std::array<double, 6> f = r.features.as_array();
        x.insert(x.end(), f.begin(), f.end());
        y.push_back(*r.label == 1 ? 1 : -1);
    }
}

void write_predictions_csv(const std::string& path, const ganspec::FeatureTable& rows,
                           const std::vector<int>& predictions, const std::vector<double>& decisions) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ganspec::IoError("cannot write " + path);
    out << "path,predicted_label,decision_value\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << ganspec::detail::csv_quote_path(rows[i].path) << ',' << predictions[i] << ','
            << ganspec::format_g17(decisions[i]) << '\n';
}

std::optional<double> parse_gamma_flag(const std::string& raw) {
    if (raw == "scale")
        return std::nullopt;
    return ganspec::parse_double(raw, "--gamma");
}

struct SynthArgs {
    ganspec::SynthConfig cfg;
    std::string out_dir;
};

struct ExtractArgs {
    std::string manifest, out;
    bool permissive = false;
    int jobs = 1;
};

struct TrainArgs {
    std::string features, out;
    std::uint64_t seed = 0;
    int restarts = 0;
    double c = 1.0;
    std::string gamma = "scale";
};

struct EvalArgs {
    std::string model, features, out, predictions;
};

struct AdaptArgs {
    std::string source, target, out, metrics_out, expectations, dump_expectations;
    double c = 1.0;
    std::string gamma = "scale";
    std::uint64_t seed = 0;
};

struct SpectrumArgs {
    std::string image, out_prefix;
};

struct HistogramArgs {
    std::string features, column = "mean", out;
    int bins = 50;
    int label = -1; // -1 = all rows
};

int run_synth(const SynthArgs& a) {
    const std::string manifest = ganspec::gen_corpus(a.cfg, a.out_dir);
    const auto [n_real, n_fake] = ganspec::corpus_counts(a.cfg);
    std::cout << "wrote " << n_real << " real + " << n_fake << " fake images, manifest " << manifest
              << "\n";
    return 0;
}

int run_extract(const ExtractArgs& a) {
    const ganspec::Manifest manifest = ganspec::read_manifest(a.manifest);
    ganspec::ExtractOptions options;
    options.jobs = a.jobs;
    options.permissive = a.permissive;
    ganspec::ExtractReport report;
    const ganspec::FeatureTable rows = ganspec::extract_batch(manifest, options, &report);
    for (const std::string& warning : report.skipped)
        std::cerr << "warning: skipped " << warning << "\n";
    ganspec::write_feature_csv(rows, a.out);
    std::cout << "extracted " << rows.size() << " rows to " << a.out << "\n";
    return 0;
}

json provenance_block(const std::string& features_path, const json& config) {
    json p;
    p["input"] = std::filesystem::path(features_path).filename().string();
    p["input_digest_fnv1a64"] = fnv1a64_hex(read_file_bytes(features_path));
    p["config"] = config;
    return p;
}

int run_train_gmm(const TrainArgs& a) {
    const ganspec::FeatureTable table = ganspec::read_feature_csv(a.features);
    if (table.empty())
        throw ganspec::DataError(a.features + " has no rows");
    std::vector<double> x;
    x.reserve(table.size() * 6);
    for (const ganspec::FeatureRow& r : table) {
        const std::array<double, 6> f = r.features.as_array();
        x.insert(x.end(), f.begin(), f.end());
    }
    ganspec::GmmConfig config;
    config.seed = a.seed;
    config.n_restarts = a.restarts;
    const ganspec::GmmModel model = ganspec::em_fit(x, 6, config);

    json j = ganspec::gmm_to_json(model);
    j["provenance"] =
        provenance_block(a.features, {{"seed", a.seed}, {"n_restarts", a.restarts}});
    write_json_file(j, a.out);
    std::cout << "trained gmm on " << table.size() << " rows -> " << a.out << "\n";
    return 0;
}

int run_train_svm(const TrainArgs& a) {
    const ganspec::FeatureTable table = ganspec::read_feature_csv(a.features);
    if (table.empty())
        throw ganspec::DataError(a.features + " has no rows");
    std::vector<double> x;
    std::vector<int> y;
    labeled_matrix(table, x, y);
    ganspec::SvmConfig config;
    config.c = a.c;
    config.gamma = parse_gamma_flag(a.gamma);
    const ganspec::SvmModel model = ganspec::smo_train(x, y, 6, config);

    json j = ganspec::svm_to_json(model);
    j["provenance"] = provenance_block(a.features, {{"c", a.c}, {"gamma", a.gamma}});
    write_json_file(j, a.out);
    std::cout << "trained svm on " << table.size() << " rows, " << model.support_vectors.size()
              << " support vectors -> " << a.out << "\n";
    return 0;
}

int run_eval(const EvalArgs& a) {
    const json model_json = read_json_file(a.model);
    const ganspec::FeatureTable table = ganspec::read_feature_csv(a.features);
    if (table.empty())
        throw ganspec::DataError(a.features + " has no rows");

    std::vector<int> predictions;
    std::vector<double> decisions;
    const std::string kind = model_json.value("kind", "");
    if (kind == "gmm") {
        const ganspec::GmmModel model = ganspec::gmm_from_json(model_json);
        for (const ganspec::FeatureRow& r : table) {
            const ganspec::GmmPrediction p = ganspec::classify(model, r.features);
            predictions.push_back(p.label);
            // signed score, positive = fake, so the column reads like an SVM decision
            decisions.push_back(p.label == 1 ? p.posterior - 0.5 : 0.5 - p.posterior);
        }
    } else if (kind == "svm") {
        const ganspec::SvmModel model = ganspec::svm_from_json(model_json);
        for (const ganspec::FeatureRow& r : table) {
            const double value = model.decision(r.features);
            decisions.push_back(value);
            predictions.push_back(value > 0.0 ? 1 : 0);
        }
    } else {
        throw ganspec::DataError(a.model + ": unknown model kind '" + kind + "'");
    }

    ganspec::ConfusionCounts counts;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!table[i].label)
            throw ganspec::DataError("row '" + table[i].path + "' is unlabeled; eval needs labels");
        counts.add(*table[i].label, predictions[i]);
    }
    const ganspec::Metrics m = ganspec::metrics(counts);
    write_json_file(ganspec::metrics_to_json(m, counts), a.out);
    if (!a.predictions.empty())
        write_predictions_csv(a.predictions, table, predictions, decisions);
    std::cout << ganspec::format_metrics_human(m, counts) << "\n";
    return 0;
}

int run_adapt(const AdaptArgs& a) {
    const ganspec::FeatureTable source = ganspec::read_feature_csv(a.source);
    const ganspec::FeatureTable target = ganspec::read_feature_csv(a.target);

    ganspec::AdaptConfig config;
    config.svm.c = a.c;
    config.svm.gamma = parse_gamma_flag(a.gamma);
    config.gmm.seed = a.seed;
    if (!a.expectations.empty())
        config.target_expectations = ganspec::expectations_from_json(read_json_file(a.expectations));

    const ganspec::AdaptResult result = ganspec::adapt_and_predict(source, target, config);
    write_predictions_csv(a.out, target, result.predictions, result.decision_values);
    if (!a.dump_expectations.empty()) {
        write_json_file(ganspec::expectations_to_json(result.source_expectations),
                        a.dump_expectations + "_source.json");
        write_json_file(ganspec::expectations_to_json(result.target_expectations),
                        a.dump_expectations + "_target.json");
    }
    if (result.metrics) {
        if (!a.metrics_out.empty())
            write_json_file(ganspec::metrics_to_json(*result.metrics, *result.counts), a.metrics_out);
        std::cout << ganspec::format_metrics_human(*result.metrics, *result.counts) << "\n";
    } else {
        if (!a.metrics_out.empty())
            throw ganspec::DataError("--metrics-out needs a fully labeled target set");
        std::cout << "predicted " << result.predictions.size() << " rows -> " << a.out << "\n";
    }
    return 0;
}

int run_spectrum_dump(const SpectrumArgs& a) {
    const ganspec::RgbImage img = ganspec::load_image(a.image);
    const ganspec::SpectrumSet s = ganspec::spectrum(img);
    ganspec::write_spectrum_csv(s, a.out_prefix);
    std::cout << "wrote " << a.out_prefix << "_{r,g,b}.csv (" << s.width << "x" << s.height << ")\n";
    return 0;
}

int run_histogram(const HistogramArgs& a) {
    const ganspec::FeatureTable table = ganspec::read_feature_csv(a.features);
    const auto& names = ganspec::feature_names();
    std::size_t column = names.size();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == a.column)
            column = i;
    if (column == names.size())
        throw ganspec::DataError("unknown feature column '" + a.column + "'");

    std::vector<double> values;
    for (const ganspec::FeatureRow& r : table) {
        if (a.label >= 0 && (!r.label || *r.label != a.label))
            continue;
        values.push_back(r.features.as_array()[column]);
    }
    if (values.empty())
        throw ganspec::DataError("no rows selected for histogram");
    ganspec::write_histogram_csv(ganspec::histogram(values, a.bins), a.out);
    std::cout << "histogram of " << values.size() << " values -> " << a.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-image detection from channel-wise spectrum asynchrony"};
    app.require_subcommand(1);

    SynthArgs synth;
    CLI::App* cmd_synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    cmd_synth->add_option("--count", synth.cfg.count, "real images (fakes follow --fake-fraction)")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--size", synth.cfg.size, "square side length in pixels")
        ->check(CLI::Range(8, 1 << 14));
    cmd_synth->add_option("--fake-fraction", synth.cfg.fake_fraction, "fake share of the corpus")
        ->check(CLI::Range(0.0, 1.0));
    cmd_synth->add_option("--seed", synth.cfg.seed, "corpus seed")->envname("FORENSICS_SEED");
    cmd_synth->add_option("--noise-amplitude", synth.cfg.noise_amplitude,
                          "strength of the fake-image perturbation")
        ->check(CLI::NonNegativeNumber);
    cmd_synth->add_option("--smoothing", synth.cfg.base_smoothing, "base plane box-blur radius")
        ->check(CLI::NonNegativeNumber);
    cmd_synth->add_option("--out", synth.out_dir, "output directory")->required();

    ExtractArgs extract;
    CLI::App* cmd_extract = app.add_subcommand("extract", "compute feature CSV from a manifest");
    cmd_extract->add_option("--manifest", extract.manifest, "dataset manifest (JSON lines)")->required();
    cmd_extract->add_option("--out", extract.out, "output feature CSV")->required();
    cmd_extract->add_flag("--permissive", extract.permissive, "skip unreadable entries with a warning");
    cmd_extract->add_option("--jobs", extract.jobs, "worker threads")->check(CLI::Range(1, 256));

    TrainArgs train;
    CLI::App* cmd_train = app.add_subcommand("train", "fit a classifier on a feature CSV");
    cmd_train->require_subcommand(1);
    CLI::App* cmd_train_gmm = cmd_train->add_subcommand("gmm", "unsupervised two-component mixture");
    cmd_train_gmm->add_option("--features", train.features, "feature CSV")->required();
    cmd_train_gmm->add_option("--out", train.out, "model JSON path")->required();
    cmd_train_gmm->add_option("--seed", train.seed, "seed for --restarts")->envname("FORENSICS_SEED");
    cmd_train_gmm->add_option("--restarts", train.restarts, "extra random EM initializations")
        ->check(CLI::NonNegativeNumber);
    CLI::App* cmd_train_svm = cmd_train->add_subcommand("svm", "supervised soft-margin RBF SVM");
    cmd_train_svm->add_option("--features", train.features, "labeled feature CSV")->required();
    cmd_train_svm->add_option("--out", train.out, "model JSON path")->required();
    cmd_train_svm->add_option("--c", train.c, "box constraint")->check(CLI::PositiveNumber);
    cmd_train_svm->add_option("--gamma", train.gamma, "RBF bandwidth, or 'scale'");

    EvalArgs eval;
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a model on a labeled feature CSV");
    cmd_eval->add_option("--model", eval.model, "model JSON")->required();
    cmd_eval->add_option("--features", eval.features, "labeled feature CSV")->required();
    cmd_eval->add_option("--out", eval.out, "metrics JSON path")->required();
    cmd_eval->add_option("--predictions", eval.predictions, "optional per-row predictions CSV");

    AdaptArgs adapt;
    CLI::App* cmd_adapt = app.add_subcommand(
        "adapt", "train on a source domain, predict a target domain after expectation scaling");
    cmd_adapt->add_option("--source", adapt.source, "labeled source feature CSV")->required();
    cmd_adapt->add_option("--target", adapt.target, "target feature CSV")->required();
    cmd_adapt->add_option("--out", adapt.out, "predictions CSV path")->required();
    cmd_adapt->add_option("--metrics-out", adapt.metrics_out,
                          "metrics JSON (target must be fully labeled)");
    cmd_adapt->add_option("--expectations", adapt.expectations,
                          "externally supplied target expectation table JSON");
    cmd_adapt->add_option("--dump-expectations", adapt.dump_expectations,
                          "write computed expectation tables to PREFIX_{source,target}.json");
    cmd_adapt->add_option("--c", adapt.c, "SVM box constraint")->check(CLI::PositiveNumber);
    cmd_adapt->add_option("--gamma", adapt.gamma, "SVM RBF bandwidth, or 'scale'");
    cmd_adapt->add_option("--seed", adapt.seed, "seed for the per-feature mixture fits")
        ->envname("FORENSICS_SEED");

    SpectrumArgs spectrum_dump;
    CLI::App* cmd_spectrum = app.add_subcommand("spectrum-dump", "write per-channel spectrum CSVs");
    cmd_spectrum->add_option("--image", spectrum_dump.image, "PNG or JPEG file")->required();
    cmd_spectrum->add_option("--out-prefix", spectrum_dump.out_prefix, "output path prefix")->required();

    HistogramArgs hist;
    CLI::App* cmd_hist = app.add_subcommand("histogram", "bin one feature column to CSV");
    cmd_hist->add_option("--features", hist.features, "feature CSV")->required();
    cmd_hist->add_option("--column", hist.column, "feature name (default mean)");
    cmd_hist->add_option("--bins", hist.bins, "bin count")->check(CLI::PositiveNumber);
    cmd_hist->add_option("--label", hist.label, "restrict to label 0 or 1")->check(CLI::Range(0, 1));
    cmd_hist->add_option("--out", hist.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_synth->parsed())
            return run_synth(synth);
        if (cmd_extract->parsed())
            return run_extract(extract);
        if (cmd_train->parsed())
            return cmd_train_gmm->parsed() ? run_train_gmm(train) : run_train_svm(train);
        if (cmd_eval->parsed())
            return run_eval(eval);
        if (cmd_adapt->parsed())
            return run_adapt(adapt);
        if (cmd_spectrum->parsed())
            return run_spectrum_dump(spectrum_dump);
        if (cmd_hist->parsed())
            return run_histogram(hist);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
