#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "ganspec/error.hpp"
#include "ganspec/image.hpp"
#include "ganspec/text.hpp"

namespace ganspec {

using Complex = std::complex<double>;

/// Per-channel magnitude spectra, same layout as the source image:
/// bin (u, v) lives at index v*width + u.
struct SpectrumSet {
    int width = 0;
    int height = 0;
    Plane spec_r, spec_g, spec_b;
};

namespace detail {

inline void check_finite(const Plane& p) {
    for (double v : p.values)
        if (!std::isfinite(v))
            throw DataError("transform input contains a non-finite value");
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Forward 1-D transform of a fixed length. Radix-2 for powers of two,
/// Bluestein's chirp-z otherwise, so any length works. Summation order is
/// fixed, results do not depend on thread count.
class Fft1d {
public:
    explicit Fft1d(std::size_t n) : n_(n) {
        if (n_ == 0)
            throw DataError("transform length must be positive");
        if (is_pow2(n_)) {
            build_pow2_tables(n_, twiddle_);
        } else {
            // chirp c_k = exp(-i*pi*k^2/n); k^2 is reduced mod 2n to keep the
            // angle argument small for large k
            chirp_.resize(n_);
            for (std::size_t k = 0; k < n_; ++k) {
                const std::size_t k2 = (k * k) % (2 * n_);
                const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n_);
                chirp_[k] = Complex(std::cos(angle), std::sin(angle));
            }
            m_ = 1;
            while (m_ < 2 * n_ - 1) m_ <<= 1;
            build_pow2_tables(m_, twiddle_);
            // transform of the conjugate chirp, reused for every convolution
            kernel_fft_.assign(m_, Complex(0.0, 0.0));
            kernel_fft_[0] = std::conj(chirp_[0]);
            for (std::size_t k = 1; k < n_; ++k) {
                kernel_fft_[k] = std::conj(chirp_[k]);
                kernel_fft_[m_ - k] = std::conj(chirp_[k]);
            }
            pow2_forward(kernel_fft_.data(), m_);
        }
    }

    std::size_t length() const { return n_; }

    void forward(Complex* data) const {
        if (is_pow2(n_)) {
            pow2_forward(data, n_);
            return;
        }
        std::vector<Complex> a(m_, Complex(0.0, 0.0));
        for (std::size_t k = 0; k < n_; ++k)
            a[k] = data[k] * chirp_[k];
        pow2_forward(a.data(), m_);
        for (std::size_t k = 0; k < m_; ++k)
            a[k] *= kernel_fft_[k];
        pow2_inverse(a.data(), m_);
        for (std::size_t k = 0; k < n_; ++k)
            data[k] = a[k] * chirp_[k];
    }

private:
    static void build_pow2_tables(std::size_t n, std::vector<Complex>& tw) {
        tw.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            tw[k] = Complex(std::cos(angle), std::sin(angle));
        }
    }

    void pow2_forward(Complex* data, std::size_t n) const {
        // bit-reversal permutation
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(data[i], data[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n / len;
            for (std::size_t start = 0; start < n; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const Complex w = twiddle_[k * step];
                    const Complex u = data[start + k];
                    const Complex t = data[start + k + half] * w;
                    data[start + k] = u + t;
                    data[start + k + half] = u - t;
                }
            }
        }
    }

    void pow2_inverse(Complex* data, std::size_t n) const {
        for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
        pow2_forward(data, n);
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]) * inv;
    }

    std::size_t n_ = 0;
    std::size_t m_ = 0;                // pow2 convolution size (Bluestein only)
    std::vector<Complex> twiddle_;     // tables for length n_ (pow2) or m_
    std::vector<Complex> chirp_;
    std::vector<Complex> kernel_fft_;
};

} // namespace detail

/// Direct O((WH)^2) double sum, zero-based indices:
/// F(u,v) = sum_x sum_y p(x,y) * exp(-i*2*pi*(u*x/W + v*y/H)).
/// Slow by construction; it is the correctness oracle for dft2_fast.
inline std::vector<Complex> dft2_naive(const Plane& plane) {
    detail::check_finite(plane);
    const int w = plane.width, h = plane.height;
    std::vector<Complex> out(static_cast<std::size_t>(w) * h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            Complex acc(0.0, 0.0);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double angle = -2.0 * std::numbers::pi *
                        (static_cast<double>(u) * x / w + static_cast<double>(v) * y / h);
                    acc += plane.at(x, y) * Complex(std::cos(angle), std::sin(angle));
                }
            }
            out[static_cast<std::size_t>(v) * w + u] = acc;
        }
    }
    return out;
}

/// Row-column fast transform, same values as dft2_naive to ~1e-9 relative.
inline std::vector<Complex> dft2_fast(const Plane& plane) {
    detail::check_finite(plane);
    const int w = plane.width, h = plane.height;
    std::vector<Complex> data(plane.values.begin(), plane.values.end());

    const detail::Fft1d row_fft(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y)
        row_fft.forward(data.data() + static_cast<std::size_t>(y) * w);

    const detail::Fft1d col_fft(static_cast<std::size_t>(h));
    std::vector<Complex> column(static_cast<std::size_t>(h));
    for (int u = 0; u < w; ++u) {
        for (int y = 0; y < h; ++y)
            column[y] = data[static_cast<std::size_t>(y) * w + u];
        col_fft.forward(column.data());
        for (int v = 0; v < h; ++v)
            data[static_cast<std::size_t>(v) * w + u] = column[v];
    }
    return data;
}

/// Elementwise modulus of one channel's fast transform.
inline Plane magnitude_spectrum(const Plane& plane) {
    const std::vector<Complex> f = dft2_fast(plane);
    Plane out(plane.width, plane.height);
    for (std::size_t i = 0; i < f.size(); ++i)
        out.values[i] = std::abs(f[i]);
    return out;
}

/// Per-channel magnitude spectra. No shift, no log scaling, no normalization.
inline SpectrumSet spectrum(const RgbImage& img) {
    validate_image(img);
    SpectrumSet s;
    s.width = img.width();
    s.height = img.height();
    s.spec_r = magnitude_spectrum(img.red);
    s.spec_g = magnitude_spectrum(img.green);
    s.spec_b = magnitude_spectrum(img.blue);
    return s;
}

/// Debug dump: prefix_r.csv / _g.csv / _b.csv, H rows of W values each.
inline void write_spectrum_csv(const SpectrumSet& s, const std::string& prefix) {
    const std::pair<const Plane*, const char*> channels[] = {
        {&s.spec_r, "_r.csv"}, {&s.spec_g, "_g.csv"}, {&s.spec_b, "_b.csv"}};
    for (const auto& [plane, suffix] : channels) {
        std::ofstream out(prefix + suffix, std::ios::binary);
        if (!out)
            throw IoError("cannot write " + prefix + suffix);
        for (int v = 0; v < plane->height; ++v) {
            for (int u = 0; u < plane->width; ++u) {
                if (u) out << ',';
                out << format_g17(plane->at(u, v));
            }
            out << '\n';
        }
    }
}

} // namespace ganspec
