#pragma once

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "ganspec/error.hpp"
#include "ganspec/image.hpp"

namespace ganspec {

namespace detail {

inline RgbImage planes_from_rgb8(const std::vector<std::uint8_t>& rgb, int w, int h, int stride) {
    RgbImage img;
    img.red = Plane(w, h);
    img.green = Plane(w, h);
    img.blue = Plane(w, h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = rgb.data() + static_cast<std::size_t>(y) * stride;
        for (int x = 0; x < w; ++x) {
            img.red.at(x, y) = row[x * 3 + 0];
            img.green.at(x, y) = row[x * 3 + 1];
            img.blue.at(x, y) = row[x * 3 + 2];
        }
    }
    return img;
}

inline RgbImage read_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw IoError("png decode failed for " + path + ": " + image.message);

    // Decode to RGBA and drop alpha ourselves; palette, grayscale and 16-bit
    // sources are normalized by libpng.
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("png decode failed for " + path + ": " + image.message);
    }
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);

    RgbImage img;
    img.red = Plane(w, h);
    img.green = Plane(w, h);
    img.blue = Plane(w, h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = rgba.data() + static_cast<std::size_t>(y) * w * 4;
        for (int x = 0; x < w; ++x) {
            img.red.at(x, y) = row[x * 4 + 0];
            img.green.at(x, y) = row[x * 4 + 1];
            img.blue.at(x, y) = row[x * 4 + 2];
        }
    }
    return img;
}

struct JpegErrorHandler {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_trampoline(j_common_ptr cinfo) {
    auto* handler = reinterpret_cast<JpegErrorHandler*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, handler->message);
    std::longjmp(handler->jump, 1);
}

inline RgbImage read_jpeg(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp)
        throw IoError("cannot open " + path);

    jpeg_decompress_struct cinfo;
    JpegErrorHandler err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_trampoline;

    std::vector<std::uint8_t> rgb;
    int w = 0, h = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::fclose(fp);
        throw IoError("jpeg decode failed for " + path + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB; // grayscale sources are replicated
    jpeg_start_decompress(&cinfo);
    w = static_cast<int>(cinfo.output_width);
    h = static_cast<int>(cinfo.output_height);
    rgb.resize(static_cast<std::size_t>(w) * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        std::uint8_t* rowp = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &rowp, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    return planes_from_rgb8(rgb, w, h, w * 3);
}

} // namespace detail

/// Decode a PNG or JPEG file (sniffed by magic bytes, not extension) into
/// channel planes. Grayscale becomes three identical planes; alpha is dropped.
inline RgbImage load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw IoError("cannot open " + path);
    unsigned char magic[4] = {0, 0, 0, 0};
    probe.read(reinterpret_cast<char*>(magic), sizeof(magic));
    probe.close();

    RgbImage img;
    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
        img = detail::read_png(path);
    else if (magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF)
        img = detail::read_jpeg(path);
    else
        throw IoError("unsupported image format in " + path + " (need PNG or JPEG)");

    if (img.width() < 2 || img.height() < 2)
        throw DataError(path + " is " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + "; images must be at least 2x2");
    validate_image(img);
    return img;
}

/// Write planes as 8-bit RGB PNG. Values are rounded to the nearest integer
/// and clamped, so integer-valued planes round-trip exactly.
inline void save_png(const RgbImage& img, const std::string& path) {
    validate_image(img);
    const int w = img.width(), h = img.height();
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
            auto quantize = [](double v) {
                const long q = std::lround(v);
                return static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
            };
            rgb[i + 0] = quantize(img.red.at(x, y));
            rgb[i + 1] = quantize(img.green.at(x, y));
            rgb[i + 2] = quantize(img.blue.at(x, y));
        }
    }

    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr))
        throw IoError("png encode failed for " + path + ": " + image.message);
}

} // namespace ganspec
