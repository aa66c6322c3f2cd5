#include "subpix/io.hpp"

#include <doctest.h>

#include <png.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace subpix;

namespace {

std::string packFloats(std::vector<float> const& vals) {
    std::string out;
    for (float v : vals) {
        char buf[4];
        std::memcpy(buf, &v, 4);
        out.append(buf, 4);
    }
    return out;
}

DisparityField randomField(int rows, int cols, int channels, unsigned seed) {
    DisparityField f = DisparityField::make(rows, cols, channels);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> uni(-100.f, 100.f);
    std::bernoulli_distribution hole(0.1);
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            f.valid(r, c) = hole(rng) ? 0 : 1;
            for (int k = 0; k < channels; k++) {
                f.vec(r, c)[k] = f.valid(r, c) ? uni(rng) : 0.f;
            }
        }
    }
    return f;
}

std::string encodeGrayPng(std::vector<unsigned char> const& pixels, int w, int h) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    std::string out;
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t n) {
            static_cast<std::string*>(png_get_io_ptr(p))->append(
                reinterpret_cast<char*>(data), n);
        },
        [](png_structp) {});
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < h; r++) {
        png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(r) *
                                                                     static_cast<std::size_t>(w)));
    }
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace

TEST_CASE("golden 1x1 Pf file reads back its single value") {
    std::string bytes = "Pf\n1 1\n-1.0\n" + packFloats({0.5f});
    DisparityField f = parsePfm(bytes);
    CHECK(f.rows() == 1);
    CHECK(f.cols() == 1);
    CHECK(f.dims() == 1);
    CHECK(f.vec(0, 0)[0] == 0.5f);
    CHECK(f.valid(0, 0) == 1);
}

TEST_CASE("PFM rows are stored bottom-up") {
    // 1 column, 2 rows: file stores the bottom row first
    std::string bytes = "Pf\n1 2\n-1.0\n" + packFloats({1.f, 2.f});
    DisparityField f = parsePfm(bytes);
    CHECK(f.vec(0, 0)[0] == 2.f); // top row read last from file
    CHECK(f.vec(1, 0)[0] == 1.f);
}

TEST_CASE("PFM infinities mark invalid cells") {
    std::string bytes =
        "Pf\n2 1\n-1.0\n" + packFloats({std::numeric_limits<float>::infinity(), 3.f});
    DisparityField f = parsePfm(bytes);
    CHECK(f.valid(0, 0) == 0);
    CHECK(f.valid(0, 1) == 1);
}

TEST_CASE("PFM round trips bit-exactly including invalid cells") {
    for (unsigned seed = 0; seed < 5; seed++) {
        DisparityField f = randomField(7, 9, seed % 2 ? 3 : 1, seed);
        std::string bytes = writePfmBytes(f);
        DisparityField g = parsePfm(bytes);
        CHECK(writePfmBytes(g) == bytes);
        CHECK(g.values == f.values);
        CHECK(g.valid == f.valid);
    }
}

TEST_CASE("malformed PFM inputs raise format errors with offsets") {
    CHECK_THROWS_AS(parsePfm("PX\n1 1\n-1.0\n"), FormatError);
    CHECK_THROWS_AS(parsePfm("Pf\n0 1\n-1.0\n"), FormatError);
    CHECK_THROWS_AS(parsePfm("Pf\n2 2\n-1.0\n" + packFloats({1.f})), FormatError);
    try {
        parsePfm("Pf\n2 2\n-1.0\n" + packFloats({1.f}));
        FAIL("expected FormatError");
    } catch (FormatError const& e) {
        CHECK(e.offset() > 0);
    }
}

TEST_CASE("golden .flo file reads back known values") {
    float magic = 202021.25f;
    std::int32_t w = 2, h = 2;
    std::string bytes;
    bytes.append(reinterpret_cast<char*>(&magic), 4);
    bytes.append(reinterpret_cast<char*>(&w), 4);
    bytes.append(reinterpret_cast<char*>(&h), 4);
    bytes += packFloats({0.5f, -0.25f, 1.f, 2.f, 3.f, 4.f, 2e9f, 0.f});

    DisparityField f = parseFlo(bytes);
    CHECK(f.dims() == 2);
    CHECK(f.vec(0, 0)[0] == 0.5f);
    CHECK(f.vec(0, 0)[1] == -0.25f);
    CHECK(f.vec(1, 0)[0] == 3.f);
    CHECK(f.valid(1, 1) == 0); // |u| > 1e9
}

TEST_CASE(".flo round trips bit-exactly") {
    for (unsigned seed = 10; seed < 15; seed++) {
        DisparityField f = randomField(5, 6, 2, seed);
        std::string bytes = writeFloBytes(f);
        DisparityField g = parseFlo(bytes);
        CHECK(writeFloBytes(g) == bytes);
        CHECK(g.values == f.values);
        CHECK(g.valid == f.valid);
    }
}

TEST_CASE("wrong .flo magic names the expected constant") {
    std::string bytes(12, '\0');
    try {
        parseFlo(bytes);
        FAIL("expected FormatError");
    } catch (FormatError const& e) {
        CHECK(std::string(e.what()).find("202021.25") != std::string::npos);
    }
}

TEST_CASE("PGM values scale to [0,1] exactly") {
    std::string bytes = "P5\n2 2\n255\n";
    bytes.push_back(static_cast<char>(0));
    bytes.push_back(static_cast<char>(255));
    bytes.push_back(static_cast<char>(128));
    bytes.push_back(static_cast<char>(64));
    NdBufferF img = parsePnm(bytes);
    REQUIRE(img.shape() == std::vector<int>{2, 2});
    CHECK(img(0, 0) == doctest::Approx(0.0));
    CHECK(img(0, 1) == doctest::Approx(1.0));
    CHECK(img(1, 0) == doctest::Approx(128.0 / 255.0));
    CHECK(img(1, 1) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("PPM produces a rank-3 buffer and 16-bit samples are big-endian") {
    std::string ppm = "P6\n1 1\n255\n";
    ppm.push_back(static_cast<char>(255));
    ppm.push_back(static_cast<char>(0));
    ppm.push_back(static_cast<char>(128));
    NdBufferF color = parsePnm(ppm);
    REQUIRE(color.shape() == std::vector<int>{1, 1, 3});
    CHECK(color(0, 0, 0) == doctest::Approx(1.0));

    std::string pgm16 = "P5\n1 1\n65535\n";
    pgm16.push_back(static_cast<char>(0x01));
    pgm16.push_back(static_cast<char>(0x00)); // 256 big-endian
    NdBufferF deep = parsePnm(pgm16);
    CHECK(deep(0, 0) == doctest::Approx(256.0 / 65535.0));
}

TEST_CASE("corrupt PNM headers raise format errors") {
    CHECK_THROWS_AS(parsePnm("P5\n-3 2\n255\n"), FormatError);
    CHECK_THROWS_AS(parsePnm("P5\n2 2\n99999\n"), FormatError);
    CHECK_THROWS_AS(parsePnm("P7\n1 1\n255\n\0"), FormatError);
    CHECK_THROWS_AS(parsePnm("P5\n2 2\n255\nab"), FormatError); // truncated
}

TEST_CASE("PNG images decode through the dispatching reader") {
    std::vector<unsigned char> pixels{0, 255, 128, 64};
    std::string bytes = encodeGrayPng(pixels, 2, 2);
    NdBufferF img = parseImage(bytes);
    REQUIRE(img.shape() == std::vector<int>{2, 2});
    CHECK(img(0, 0) == doctest::Approx(0.0));
    CHECK(img(0, 1) == doctest::Approx(1.0));
    CHECK(img(1, 0) == doctest::Approx(128.0 / 255.0));

    // truncated PNG fails cleanly
    CHECK_THROWS_AS(parsePng(bytes.substr(0, bytes.size() / 2)), FormatError);
    CHECK_THROWS_AS(parseImage("not an image"), FormatError);
}

TEST_CASE("image dispatch accepts PFM sources") {
    std::string bytes = "Pf\n1 1\n-1.0\n" + packFloats({0.75f});
    NdBufferF img = parseImage(bytes);
    CHECK(img(0, 0) == 0.75f);
}

TEST_CASE("readers survive random fuzz without crashing") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> len(0, 600);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<std::string> seeds{
        "Pf\n2 2\n-1.0\n" + packFloats({1.f, 2.f, 3.f, 4.f}),
        "P5\n2 2\n255\nabcd",
        encodeGrayPng({0, 1, 2, 3}, 2, 2),
    };
    {
        float magic = 202021.25f;
        std::int32_t w = 1, h = 1;
        std::string flo;
        flo.append(reinterpret_cast<char*>(&magic), 4);
        flo.append(reinterpret_cast<char*>(&w), 4);
        flo.append(reinterpret_cast<char*>(&h), 4);
        flo += packFloats({1.f, 2.f});
        seeds.push_back(flo);
    }

    for (int i = 0; i < 1000; i++) {
        std::string bytes;
        if (i % 2 == 0) {
            bytes.resize(static_cast<std::size_t>(len(rng)));
            for (auto& ch : bytes) {
                ch = static_cast<char>(byte(rng));
            }
        } else {
            bytes = seeds[static_cast<std::size_t>(i) % seeds.size()];
            int flips = 1 + i % 7;
            for (int k = 0; k < flips && !bytes.empty(); k++) {
                bytes[static_cast<std::size_t>(byte(rng)) % bytes.size()] =
                    static_cast<char>(byte(rng));
            }
        }
        try {
            parsePfm(bytes);
        } catch (FormatError const&) {
        }
        try {
            parseFlo(bytes);
        } catch (FormatError const&) {
        }
        try {
            parseImage(bytes);
        } catch (FormatError const&) {
        }
    }
    CHECK(true);
}
