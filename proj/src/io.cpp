#include "subpix/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <csetjmp>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace subpix {

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr int kMaxDim = 1 << 20;

struct Cursor {
    std::string_view bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }

    char peek() const { return bytes[pos]; }

    char take() {
        if (eof()) {
            throw FormatError("unexpected end of file", pos);
        }
        return bytes[pos++];
    }

    void skipSpace() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) {
            pos++;
        }
        // pnm-style comments
        while (!eof() && peek() == '#') {
            while (!eof() && peek() != '\n') {
                pos++;
            }
            skipSpace();
        }
    }

    long parseInt() {
        skipSpace();
        std::size_t start = pos;
        bool neg = false;
        if (!eof() && (peek() == '-' || peek() == '+')) {
            neg = peek() == '-';
            pos++;
        }
        long v = 0;
        bool any = false;
        while (!eof() && peek() >= '0' && peek() <= '9') {
            if (v > (std::numeric_limits<long>::max() - 9) / 10) {
                throw FormatError("integer overflow in header", start);
            }
            v = v * 10 + (peek() - '0');
            pos++;
            any = true;
        }
        if (!any) {
            throw FormatError("expected integer", pos);
        }
        return neg ? -v : v;
    }

    double parseFloat() {
        skipSpace();
        std::size_t start = pos;
        std::size_t end = pos;
        while (end < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[end]))) {
            end++;
        }
        std::string tok(bytes.substr(start, end - start));
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) {
                throw std::invalid_argument("trailing");
            }
            pos = end;
            return v;
        } catch (std::exception const&) {
            throw FormatError("expected floating-point number", start);
        }
    }

    void require(std::size_t n) const {
        if (bytes.size() - pos < n) {
            throw FormatError("truncated payload", bytes.size());
        }
    }
};

float swapFloat(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) | ((u & 0x0000FF00u) << 8) |
        ((u & 0x000000FFu) << 24);
    std::memcpy(&v, &u, 4);
    return v;
}

bool hostIsLittleEndian() {
    return std::endian::native == std::endian::little;
}

void checkDims(long w, long h, std::size_t where) {
    if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim) {
        throw FormatError("bad image dimensions", where);
    }
}

} // namespace

DisparityField parsePfm(std::string_view bytes) {

    Cursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != 'f' && bytes[1] != 'F')) {
        throw FormatError("not a PFM file (expected Pf/PF magic)", 0);
    }
    int channels = bytes[1] == 'F' ? 3 : 1;
    cur.pos = 2;

    long w = cur.parseInt();
    long h = cur.parseInt();
    checkDims(w, h, cur.pos);
    double scale = cur.parseFloat();
    if (scale == 0) {
        throw FormatError("zero scale", cur.pos);
    }
    cur.take(); // single whitespace byte terminating the header

    bool fileLittle = scale < 0;
    bool swap = fileLittle != hostIsLittleEndian();

    std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                    static_cast<std::size_t>(channels);
    cur.require(n * 4);

    DisparityField field = DisparityField::make(static_cast<int>(h), static_cast<int>(w), channels);

    // PFM rows are stored bottom-up
    for (long fr = 0; fr < h; fr++) {
        int r = static_cast<int>(h - 1 - fr);
        for (long c = 0; c < w; c++) {
            bool ok = true;
            for (int k = 0; k < channels; k++) {
                float v;
                std::memcpy(&v, bytes.data() + cur.pos, 4);
                cur.pos += 4;
                if (swap) {
                    v = swapFloat(v);
                }
                ok = ok && std::isfinite(v);
                field.vec(r, static_cast<int>(c))[k] = v;
            }
            field.valid(r, static_cast<int>(c)) = ok ? 1 : 0;
            if (!ok) {
                for (int k = 0; k < channels; k++) {
                    field.vec(r, static_cast<int>(c))[k] = 0.f;
                }
            }
        }
    }
    return field;
}

std::string writePfmBytes(DisparityField const& field) {

    int channels = field.dims();
    if (channels != 1 && channels != 3) {
        throw std::invalid_argument("writePfm: 1 or 3 channels required");
    }

    std::string out;
    out += channels == 3 ? "PF\n" : "Pf\n";
    out += std::to_string(field.cols()) + " " + std::to_string(field.rows()) + "\n";
    out += hostIsLittleEndian() ? "-1.0\n" : "1.0\n";

    for (int fr = 0; fr < field.rows(); fr++) {
        int r = field.rows() - 1 - fr;
        for (int c = 0; c < field.cols(); c++) {
            for (int k = 0; k < channels; k++) {
                float v = field.valid(r, c) != 0 ? field.vec(r, c)[k]
                                                 : std::numeric_limits<float>::infinity();
                char buf[4];
                std::memcpy(buf, &v, 4);
                out.append(buf, 4);
            }
        }
    }
    return out;
}

DisparityField parseFlo(std::string_view bytes) {

    Cursor cur{bytes};
    cur.require(12);

    float magic;
    std::memcpy(&magic, bytes.data(), 4);
    if (magic != kFloMagic) {
        throw FormatError("not a .flo file (expected magic 202021.25)", 0);
    }

    std::int32_t w, h;
    std::memcpy(&w, bytes.data() + 4, 4);
    std::memcpy(&h, bytes.data() + 8, 4);
    checkDims(w, h, 4);
    cur.pos = 12;

    std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 2;
    cur.require(n * 4);
    if (bytes.size() != 12 + n * 4) {
        throw FormatError("payload size does not match header", bytes.size());
    }

    DisparityField field = DisparityField::make(h, w, 2);

    for (int r = 0; r < h; r++) {
        for (int c = 0; c < w; c++) {
            float u, v;
            std::memcpy(&u, bytes.data() + cur.pos, 4);
            std::memcpy(&v, bytes.data() + cur.pos + 4, 4);
            cur.pos += 8;
            bool ok = std::isfinite(u) && std::isfinite(v) && std::abs(u) <= 1e9f &&
                      std::abs(v) <= 1e9f;
            field.valid(r, c) = ok ? 1 : 0;
            field.vec(r, c)[0] = ok ? u : 0.f;
            field.vec(r, c)[1] = ok ? v : 0.f;
        }
    }
    return field;
}

std::string writeFloBytes(DisparityField const& field) {

    if (field.dims() != 2) {
        throw std::invalid_argument("writeFlo: 2-channel field required");
    }

    std::string out;
    auto put4 = [&out](void const* p) {
        char buf[4];
        std::memcpy(buf, p, 4);
        out.append(buf, 4);
    };

    float magic = kFloMagic;
    std::int32_t w = field.cols();
    std::int32_t h = field.rows();
    put4(&magic);
    put4(&w);
    put4(&h);

    for (int r = 0; r < h; r++) {
        for (int c = 0; c < w; c++) {
            bool ok = field.valid(r, c) != 0;
            float u = ok ? field.vec(r, c)[0] : kFloInvalid;
            float v = ok ? field.vec(r, c)[1] : kFloInvalid;
            put4(&u);
            put4(&v);
        }
    }
    return out;
}

NdBufferF parsePnm(std::string_view bytes) {

    Cursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw FormatError("not a binary PGM/PPM (expected P5/P6 magic)", 0);
    }
    int channels = bytes[1] == '6' ? 3 : 1;
    cur.pos = 2;

    long w = cur.parseInt();
    long h = cur.parseInt();
    checkDims(w, h, cur.pos);
    long maxval = cur.parseInt();
    if (maxval <= 0 || maxval >= 65536) {
        throw FormatError("unsupported maxval", cur.pos);
    }
    cur.take(); // single whitespace byte after maxval

    int bytesPer = maxval > 255 ? 2 : 1;
    std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                    static_cast<std::size_t>(channels);
    cur.require(n * static_cast<std::size_t>(bytesPer));

    std::vector<int> shape{static_cast<int>(h), static_cast<int>(w)};
    if (channels == 3) {
        shape.push_back(3);
    }
    NdBufferF img(shape, 0.f);

    float inv = 1.f / static_cast<float>(maxval);
    for (std::size_t i = 0; i < n; i++) {
        unsigned v;
        if (bytesPer == 2) {
            // 16-bit samples are big-endian per the format
            v = (static_cast<unsigned char>(bytes[cur.pos]) << 8) |
                static_cast<unsigned char>(bytes[cur.pos + 1]);
            cur.pos += 2;
        } else {
            v = static_cast<unsigned char>(bytes[cur.pos]);
            cur.pos += 1;
        }
        if (v > static_cast<unsigned>(maxval)) {
            throw FormatError("sample exceeds maxval", cur.pos - static_cast<std::size_t>(bytesPer));
        }
        img.flat(i) = static_cast<float>(v) * inv;
    }
    return img;
}

namespace {

struct PngReadState {
    std::string_view bytes;
    std::size_t pos = 0;
    bool truncated = false;
};

extern "C" void pngReadFn(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->bytes.size() - st->pos < n) {
        st->truncated = true;
        png_error(png, "truncated PNG");
        return;
    }
    std::memcpy(out, st->bytes.data() + st->pos, n);
    st->pos += n;
}

extern "C" void pngErrorFn(png_structp png, png_const_charp) {
    longjmp(png_jmpbuf(png), 1);
}

extern "C" void pngWarnFn(png_structp, png_const_charp) {}

} // namespace

NdBufferF parsePng(std::string_view bytes) {

    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
        throw FormatError("not a PNG file", 0);
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, pngErrorFn, pngWarnFn);
    if (!png) {
        throw FormatError("png init failed", 0);
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("png init failed", 0);
    }

    PngReadState st{bytes};
    std::vector<png_bytep> rowPtrs;
    std::vector<unsigned char> pixels;
    png_uint_32 w = 0, h = 0;
    int bitDepth = 0, channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        std::size_t where = st.pos;
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("malformed PNG", where);
    }

    png_set_read_fn(png, &st, pngReadFn);
    png_read_info(png, info);

    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    bitDepth = png_get_bit_depth(png, info);
    int colorType = png_get_color_type(png, info);

    if (w == 0 || h == 0 || w > kMaxDim || h > kMaxDim) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("bad PNG dimensions", st.pos);
    }

    // normalize to 8/16-bit gray or RGB
    if (colorType == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (colorType == PNG_COLOR_TYPE_GRAY && bitDepth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    bitDepth = png_get_bit_depth(png, info);
    channels = png_get_channels(png, info);
    if ((bitDepth != 8 && bitDepth != 16) || (channels != 1 && channels != 3)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG layout", st.pos);
    }

    std::size_t rowBytes = png_get_rowbytes(png, info);
    pixels.assign(rowBytes * h, 0);
    rowPtrs.resize(h);
    for (png_uint_32 r = 0; r < h; r++) {
        rowPtrs[r] = pixels.data() + rowBytes * r;
    }
    png_read_image(png, rowPtrs.data());
    png_destroy_read_struct(&png, &info, nullptr);

    std::vector<int> shape{static_cast<int>(h), static_cast<int>(w)};
    if (channels == 3) {
        shape.push_back(3);
    }
    NdBufferF img(shape, 0.f);

    std::size_t n = static_cast<std::size_t>(w) * h * static_cast<std::size_t>(channels);
    if (bitDepth == 16) {
        float inv = 1.f / 65535.f;
        for (std::size_t i = 0; i < n; i++) {
            unsigned v = (pixels[2 * i] << 8) | pixels[2 * i + 1]; // PNG is big-endian
            img.flat(i) = static_cast<float>(v) * inv;
        }
    } else {
        float inv = 1.f / 255.f;
        for (std::size_t i = 0; i < n; i++) {
            img.flat(i) = static_cast<float>(pixels[i]) * inv;
        }
    }
    return img;
}

NdBufferF parseImage(std::string_view bytes) {

    if (bytes.size() >= 2 && bytes[0] == 'P') {
        if (bytes[1] == '5' || bytes[1] == '6') {
            return parsePnm(bytes);
        }
        if (bytes[1] == 'f' || bytes[1] == 'F') {
            DisparityField f = parsePfm(bytes);
            if (f.dims() == 1) {
                NdBufferF img({f.rows(), f.cols()}, 0.f);
                for (int r = 0; r < f.rows(); r++) {
                    for (int c = 0; c < f.cols(); c++) {
                        img(r, c) = f.vec(r, c)[0];
                    }
                }
                return img;
            }
            return f.values;
        }
    }
    if (bytes.size() >= 8 &&
        !png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
        return parsePng(bytes);
    }
    throw FormatError("unrecognized image format", 0);
}

std::string writePgmBytes(NdBufferF const& image) {

    if (image.rank() != 2) {
        throw std::invalid_argument("writePgm: rank-2 buffer required");
    }

    std::string out = "P5\n" + std::to_string(image.shape()[1]) + " " +
                      std::to_string(image.shape()[0]) + "\n255\n";
    for (std::size_t i = 0; i < image.size(); i++) {
        float v = std::clamp(image.flat(i), 0.f, 1.f);
        out.push_back(static_cast<char>(std::lround(v * 255.f)));
    }
    return out;
}

std::string readFileBytes(std::string const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFileBytes(std::string const& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

DisparityField readPfm(std::string const& path) {
    return parsePfm(readFileBytes(path));
}

void writePfm(std::string const& path, DisparityField const& field) {
    writeFileBytes(path, writePfmBytes(field));
}

DisparityField readFlo(std::string const& path) {
    return parseFlo(readFileBytes(path));
}

void writeFlo(std::string const& path, DisparityField const& field) {
    writeFileBytes(path, writeFloBytes(field));
}

NdBufferF readImage(std::string const& path) {
    return parseImage(readFileBytes(path));
}

void writePgm(std::string const& path, NdBufferF const& image) {
    writeFileBytes(path, writePgmBytes(image));
}

} // namespace subpix
