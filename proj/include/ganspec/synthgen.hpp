#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "ganspec/error.hpp"
#include "ganspec/image.hpp"
#include "ganspec/imageio.hpp"
#include "ganspec/manifest.hpp"
#include "ganspec/rng.hpp"

namespace ganspec {

/// Corpus parameters. Identical configs produce bitwise-identical corpora.
struct SynthConfig {
    int count = 100;              // real images; fake count follows fake_fraction
    int size = 64;                // square side length in pixels
    double fake_fraction = 0.5;   // fake share of the combined corpus
    std::uint64_t seed = 0;
    double noise_amplitude = 8.0; // peak strength of the per-channel perturbation
    int base_smoothing = 2;       // box kernel radius for the shared base plane
};

inline void validate_config(const SynthConfig& cfg) {
    if (cfg.count < 1)
        throw DataError("synth count must be >= 1");
    if (cfg.size < 8)
        throw DataError("synth size must be >= 8");
    if (!(cfg.fake_fraction >= 0.0 && cfg.fake_fraction <= 1.0))
        throw DataError("fake_fraction must lie in [0, 1]");
    if (!(cfg.noise_amplitude >= 0.0))
        throw DataError("noise_amplitude must be >= 0");
    if (cfg.base_smoothing < 0)
        throw DataError("base_smoothing must be >= 0");
}

namespace detail {

/// Separable box blur with wraparound, so the field stays stationary and the
/// averages stay inside the input range.
inline Plane box_smooth(const Plane& src, int radius) {
    if (radius <= 0)
        return src;
    const int w = src.width, h = src.height;
    Plane tmp(w, h), out(w, h);
    const double norm = 1.0 / (2 * radius + 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += src.at(((x + k) % w + w) % w, y);
            tmp.at(x, y) = acc * norm;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += tmp.at(x, ((y + k) % h + h) % h);
            out.at(x, y) = acc * norm;
        }
    return out;
}

inline double clamp_intensity(double v) { return v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v); }

/// Images are quantized to the 8-bit grid at generation time so the PNG
/// write/read cycle is exactly lossless.
inline double quantize(double v) { return std::nearbyint(clamp_intensity(v)); }

inline Plane noise_field(int size, Rng& rng) {
    Plane field(size, size);
    for (double& v : field.values)
        v = rng.uniform(-1.0, 1.0);
    Plane smooth = box_smooth(field, 1);
    double rms = 0.0;
    for (double v : smooth.values)
        rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(smooth.values.size()));
    if (rms > 1e-12)
        for (double& v : smooth.values)
            v /= rms;
    return smooth;
}

} // namespace detail

/// Channel-correlated image: one smoothed random base plane, each channel an
/// affine function of it (gain in [0.8, 1.2], offset in [-10, 10]). Pre-clamp
/// spectra of the three channels are pairwise perfectly correlated off-DC.
inline RgbImage gen_real_like(int size, Rng& rng, const SynthConfig& cfg) {
    Plane base(size, size);
    for (double& v : base.values)
        v = rng.uniform(0.0, 255.0);
    base = detail::box_smooth(base, cfg.base_smoothing);

    RgbImage img;
    Plane* channels[] = {&img.red, &img.green, &img.blue};
    for (Plane* channel : channels) {
        const double gain = rng.uniform(0.8, 1.2);
        const double offset = rng.uniform(-10.0, 10.0);
        *channel = Plane(size, size);
        for (std::size_t i = 0; i < base.values.size(); ++i)
            channel->values[i] = detail::quantize(gain * base.values[i] + offset);
    }
    return img;
}

/// Channel-asynchronous image: the real-like construction plus an independent
/// checkerboard-modulated noise field per channel (random checker phase,
/// amplitude in [0.5, 1.0] * noise_amplitude), concentrating the disagreement
/// in high-frequency bins.
inline RgbImage gen_fake_like(int size, Rng& rng, const SynthConfig& cfg) {
    RgbImage img = gen_real_like(size, rng, cfg);
    Plane* channels[] = {&img.red, &img.green, &img.blue};
    for (Plane* channel : channels) {
        const double amplitude = rng.uniform(0.5, 1.0) * cfg.noise_amplitude;
        const int checker_phase = rng.next_bool() ? 1 : 0;
        const Plane field = detail::noise_field(size, rng);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double sign = ((x + y + checker_phase) & 1) ? -1.0 : 1.0;
                channel->at(x, y) =
                    detail::quantize(channel->at(x, y) + amplitude * sign * field.at(x, y));
            }
    }
    return img;
}

/// Class sizes under a fake fraction f: the corpus always carries `count`
/// real images, and enough fakes that fake/(real+fake) is as close to f as
/// integer counts allow, never dropping the minority class to zero.
inline std::pair<int, int> corpus_counts(const SynthConfig& cfg) {
    if (cfg.fake_fraction == 0.0)
        return {cfg.count, 0};
    if (cfg.fake_fraction == 1.0)
        return {0, cfg.count};
    const double exact = cfg.count * cfg.fake_fraction / (1.0 - cfg.fake_fraction);
    if (exact > 1e8)
        throw DataError("fake_fraction is too close to 1 for this count");
    const long long fakes = std::max(1ll, std::llround(exact));
    return {cfg.count, static_cast<int>(fakes)};
}

/// Write the corpus PNGs plus a line-oriented JSON manifest (label 0 = real,
/// 1 = fake). Returns the manifest path. Each image is generated from a
/// sub-seed derived from (seed, index), so regeneration is byte-identical.
inline std::string gen_corpus(const SynthConfig& cfg, const std::string& out_dir) {
    validate_config(cfg);
    std::filesystem::create_directories(out_dir);
    const auto [n_real, n_fake] = corpus_counts(cfg);

    Manifest entries;
    char name[64];
    for (int i = 0; i < n_real; ++i) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const RgbImage img = gen_real_like(cfg.size, rng, cfg);
        std::snprintf(name, sizeof(name), "real_%05d.png", i);
        save_png(img, (std::filesystem::path(out_dir) / name).string());
        entries.push_back({name, 0});
    }
    for (int i = 0; i < n_fake; ++i) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n_real + i)));
        const RgbImage img = gen_fake_like(cfg.size, rng, cfg);
        std::snprintf(name, sizeof(name), "fake_%05d.png", i);
        save_png(img, (std::filesystem::path(out_dir) / name).string());
        entries.push_back({name, 1});
    }
    const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.jsonl").string();
    write_manifest(entries, manifest_path);
    return manifest_path;
}

} // namespace ganspec
