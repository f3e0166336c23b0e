#include <catch2/catch.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "ganspec/imageio.hpp"
#include "ganspec/synthgen.hpp"
#include "test_util.hpp"

using namespace ganspec;

namespace {

void write_gray_png(const std::string& path, int w, int h, std::uint8_t level) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = w;
    image.height = h;
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h, level);
    REQUIRE(png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr) != 0);
}

void write_rgba_png(const std::string& path, int w, int h, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b, std::uint8_t a) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = w;
    image.height = h;
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * 4);
    for (std::size_t i = 0; i < pixels.size(); i += 4) {
        pixels[i] = r;
        pixels[i + 1] = g;
        pixels[i + 2] = b;
        pixels[i + 3] = a;
    }
    REQUIRE(png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr) != 0);
}

void write_rgb_jpeg(const std::string& path, int w, int h, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b, int quality) {
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp != nullptr);
    jpeg_stdio_dest(&cinfo, fp);
    cinfo.image_width = w;
    cinfo.image_height = h;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (int x = 0; x < w; ++x) {
        row[x * 3] = r;
        row[x * 3 + 1] = g;
        row[x * 3 + 2] = b;
    }
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW rowp = row.data();
        jpeg_write_scanlines(&cinfo, &rowp, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(fp);
}

} // namespace

TEST_CASE("to_planes returns channels in fixed R, G, B order") {
    RgbImage img;
    img.red = Plane(2, 2, 10.0);
    img.green = Plane(2, 2, 20.0);
    img.blue = Plane(2, 2, 30.0);
    const auto planes = to_planes(img);
    CHECK(planes[0]->values == std::vector<double>(4, 10.0));
    CHECK(planes[1]->values == std::vector<double>(4, 20.0));
    CHECK(planes[2]->values == std::vector<double>(4, 30.0));

    RgbImage dup = img;
    dup.green = dup.red;
    const auto dup_planes = to_planes(dup);
    CHECK(dup_planes[0]->values == dup_planes[1]->values);
}

TEST_CASE("constant RGB PNG round-trips") {
    testutil::TempDir dir("io_const");
    RgbImage img;
    img.red = Plane(2, 2, 10.0);
    img.green = Plane(2, 2, 20.0);
    img.blue = Plane(2, 2, 30.0);
    save_png(img, dir.file("c.png"));

    const RgbImage loaded = load_image(dir.file("c.png"));
    CHECK(loaded.width() == 2);
    CHECK(loaded.height() == 2);
    for (double v : loaded.red.values)
        CHECK(v == 10.0);
    for (double v : loaded.green.values)
        CHECK(v == 20.0);
    for (double v : loaded.blue.values)
        CHECK(v == 30.0);
}

TEST_CASE("grayscale PNG replicates into three planes") {
    testutil::TempDir dir("io_gray");
    write_gray_png(dir.file("g.png"), 2, 2, 7);
    const RgbImage img = load_image(dir.file("g.png"));
    CHECK(img.red.values == std::vector<double>{7, 7, 7, 7});
    CHECK(img.red.values == img.green.values);
    CHECK(img.red.values == img.blue.values);
}

TEST_CASE("alpha channel is discarded") {
    testutil::TempDir dir("io_alpha");
    write_rgba_png(dir.file("a.png"), 3, 2, 50, 100, 150, 128);
    const RgbImage img = load_image(dir.file("a.png"));
    for (double v : img.red.values)
        CHECK(v == 50.0);
    for (double v : img.green.values)
        CHECK(v == 100.0);
    for (double v : img.blue.values)
        CHECK(v == 150.0);
}

TEST_CASE("synthgen output reloads exactly") {
    testutil::TempDir dir("io_synth");
    SynthConfig cfg;
    cfg.size = 64;
    cfg.seed = 11;
    Rng rng(derive_seed(cfg.seed, 4));
    const RgbImage img = gen_fake_like(cfg.size, rng, cfg);
    save_png(img, dir.file("s.png"));
    const RgbImage loaded = load_image(dir.file("s.png"));
    CHECK(loaded.red.values == img.red.values);
    CHECK(loaded.green.values == img.green.values);
    CHECK(loaded.blue.values == img.blue.values);
}

TEST_CASE("channel permutation in the file permutes planes identically") {
    testutil::TempDir dir("io_perm");
    RgbImage img;
    img.red = Plane(2, 2, 1.0);
    img.green = Plane(2, 2, 2.0);
    img.blue = Plane(2, 2, 3.0);
    save_png(img, dir.file("rgb.png"));

    RgbImage permuted;
    permuted.red = img.blue;
    permuted.green = img.red;
    permuted.blue = img.green;
    save_png(permuted, dir.file("brg.png"));

    const RgbImage a = load_image(dir.file("rgb.png"));
    const RgbImage b = load_image(dir.file("brg.png"));
    CHECK(b.red.values == a.blue.values);
    CHECK(b.green.values == a.red.values);
    CHECK(b.blue.values == a.green.values);
}

TEST_CASE("JPEG decodes with RGB output") {
    testutil::TempDir dir("io_jpeg");
    write_rgb_jpeg(dir.file("c.jpg"), 16, 16, 120, 60, 200, 95);
    const RgbImage img = load_image(dir.file("c.jpg"));
    CHECK(img.width() == 16);
    CHECK(img.height() == 16);
    // constant blocks survive JPEG nearly exactly; allow a couple of levels
    for (double v : img.red.values)
        CHECK(v == Approx(120.0).margin(3.0));
    for (double v : img.green.values)
        CHECK(v == Approx(60.0).margin(3.0));
    for (double v : img.blue.values)
        CHECK(v == Approx(200.0).margin(3.0));
}

TEST_CASE("load_image error contract") {
    testutil::TempDir dir("io_err");
    CHECK_THROWS_AS(load_image(dir.file("absent.png")), IoError);

    {
        std::ofstream out(dir.file("junk.bin"), std::ios::binary);
        out << "this is not an image";
    }
    CHECK_THROWS_AS(load_image(dir.file("junk.bin")), IoError);

    write_gray_png(dir.file("tiny.png"), 1, 1, 5);
    CHECK_THROWS_AS(load_image(dir.file("tiny.png")), DataError);

    {
        std::ofstream out(dir.file("trunc.png"), std::ios::binary);
        const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
        out.write(reinterpret_cast<const char*>(sig), 8);
    }
    CHECK_THROWS_AS(load_image(dir.file("trunc.png")), IoError);
}

TEST_CASE("save_png rejects invalid planes") {
    testutil::TempDir dir("io_bad");
    RgbImage img;
    img.red = Plane(2, 2, 1.0);
    img.green = Plane(2, 3, 1.0);
    img.blue = Plane(2, 2, 1.0);
    CHECK_THROWS_AS(save_png(img, dir.file("x.png")), DataError);

    RgbImage out_of_range;
    out_of_range.red = Plane(2, 2, 300.0);
    out_of_range.green = Plane(2, 2, 1.0);
    out_of_range.blue = Plane(2, 2, 1.0);
    CHECK_THROWS_AS(save_png(out_of_range, dir.file("y.png")), DataError);
}
