#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ganspec/error.hpp"

namespace ganspec {

/// One channel of pixel intensities, row-major, values in [0, 255].
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> values; // size width*height, index y*width + x

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }
};

/// Three equally sized channel planes. Minimum 2x2 so the spectrum always has
/// enough bins for a defined Pearson correlation downstream.
struct RgbImage {
    Plane red, green, blue;

    int width() const { return red.width; }
    int height() const { return red.height; }
};

inline void validate_image(const RgbImage& img) {
    const Plane* planes[] = {&img.red, &img.green, &img.blue};
    for (const Plane* p : planes) {
        if (p->width != img.red.width || p->height != img.red.height)
            throw DataError("image planes differ in size");
        if (p->values.size() != static_cast<std::size_t>(p->width) * p->height)
            throw DataError("plane buffer does not match its dimensions");
    }
    if (img.width() < 2 || img.height() < 2)
        throw DataError("image must be at least 2x2, got " + std::to_string(img.width()) +
                        "x" + std::to_string(img.height()));
    for (const Plane* p : planes)
        for (double v : p->values)
            if (!std::isfinite(v) || v < 0.0 || v > 255.0)
                throw DataError("pixel intensity outside [0, 255]");
}

/// Channels in fixed R, G, B order.
inline std::array<const Plane*, 3> to_planes(const RgbImage& img) {
    return {&img.red, &img.green, &img.blue};
}

} // namespace ganspec
