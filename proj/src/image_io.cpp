#include "cq/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace cq {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
    throw std::runtime_error(path + ": " + reason);
}

void warn(std::vector<std::string>* warnings, const std::string& path, const std::string& note) {
    if (warnings) warnings->push_back(path + ": " + note);
}

bool ends_with_ci(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) ==
               std::tolower(static_cast<unsigned char>(b));
    });
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---------------------------------------------------------------------------
// PNG (libpng). Error handling uses the library's longjmp protocol; all C++
// objects live in the enclosing scope so nothing leaks when it fires.
// ---------------------------------------------------------------------------

struct PngErrorCapture {
    std::string message;
};

extern "C" void cq_png_error(png_structp png, png_const_charp msg) {
    auto* capture = static_cast<PngErrorCapture*>(png_get_error_ptr(png));
    if (capture && msg) capture->message = msg;
    png_longjmp(png, 1);
}

extern "C" void cq_png_warning(png_structp, png_const_charp) {}

PixelImage decode_png(const std::string& path, std::vector<std::string>* warnings) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) fail(path, "cannot open file");

    PngErrorCapture capture;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &capture, cq_png_error,
                                             cq_png_warning);
    if (!png) fail(path, "png reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png info allocation failed");
    }

    PixelImage img;
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> row_ptrs;
    std::vector<std::string> notes;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, capture.message.empty() ? "png decode error" : capture.message);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported bit depth 16");
    }

    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
        notes.push_back("indexed-color image expanded to RGB");
    }
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
        notes.push_back("grayscale image expanded to RGB");
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int channels = png_get_channels(png, info);
    if (channels != 3 && channels != 4) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported channel layout after expansion");
    }
    if (channels == 4) notes.push_back("alpha channel discarded");

    img = PixelImage(static_cast<int>(width), static_cast<int>(height));
    raw.resize(static_cast<std::size_t>(width) * height * channels);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = raw.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        img.samples[3 * p] = raw[p * channels];
        img.samples[3 * p + 1] = raw[p * channels + 1];
        img.samples[3 * p + 2] = raw[p * channels + 2];
    }
    for (const auto& note : notes) warn(warnings, path, note);
    return img;
}

void encode_png(const PixelImage& img, const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) fail(path, "cannot open file for writing");

    PngErrorCapture capture;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &capture, cq_png_error,
                                              cq_png_warning);
    if (!png) fail(path, "png writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "png info allocation failed");
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, capture.message.empty() ? "png encode error" : capture.message);
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(img.samples.data() +
                                                 static_cast<std::size_t>(y) * img.width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------------------
// TIFF (baseline reader/writer: 8-bit, uncompressed, strip-organized)
// ---------------------------------------------------------------------------

struct TiffReader {
    const std::vector<std::uint8_t>& bytes;
    const std::string& path;
    bool little_endian = true;

    std::uint16_t u16(std::size_t off) const {
        if (off + 2 > bytes.size()) fail(path, "truncated file");
        return little_endian
                   ? static_cast<std::uint16_t>(bytes[off] | (bytes[off + 1] << 8))
                   : static_cast<std::uint16_t>((bytes[off] << 8) | bytes[off + 1]);
    }
    std::uint32_t u32(std::size_t off) const {
        if (off + 4 > bytes.size()) fail(path, "truncated file");
        if (little_endian)
            return bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16) |
                   (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
        return (static_cast<std::uint32_t>(bytes[off]) << 24) | (bytes[off + 1] << 16) |
               (bytes[off + 2] << 8) | bytes[off + 3];
    }
};

struct TiffEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t value_offset = 0;  // position of the (left-justified) value field
};

// SHORT(3) or LONG(4) array element, inline or out-of-line.
std::uint32_t tiff_int_at(const TiffReader& r, const TiffEntry& e, std::uint32_t index) {
    if (e.type != 3 && e.type != 4) fail(r.path, "unexpected tag type");
    if (index >= e.count) fail(r.path, "tag index out of range");
    const std::size_t elem = e.type == 3 ? 2 : 4;
    std::size_t base = e.value_offset;
    if (static_cast<std::size_t>(e.count) * elem > 4) base = r.u32(e.value_offset);
    const std::size_t off = base + index * elem;
    return e.type == 3 ? r.u16(off) : r.u32(off);
}

PixelImage decode_tiff(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 8) fail(path, "truncated file");

    TiffReader r{bytes, path};
    if (bytes[0] == 'I' && bytes[1] == 'I')
        r.little_endian = true;
    else if (bytes[0] == 'M' && bytes[1] == 'M')
        r.little_endian = false;
    else
        fail(path, "not a TIFF file");
    if (r.u16(2) != 42) fail(path, "not a TIFF file");

    const std::uint32_t ifd = r.u32(4);
    const std::uint16_t entry_count = r.u16(ifd);

    std::uint32_t width = 0, height = 0, rows_per_strip = 0xffffffffu;
    std::uint32_t compression = 1, photometric = 0xffffffffu, planar = 1, spp = 1;
    std::vector<std::uint32_t> bits;
    TiffEntry strip_offsets{}, strip_counts{}, colormap{};
    bool has_offsets = false, has_counts = false, has_colormap = false, tiled = false;

    for (std::uint16_t i = 0; i < entry_count; ++i) {
        const std::size_t off = ifd + 2 + static_cast<std::size_t>(i) * 12;
        const std::uint16_t tag = r.u16(off);
        TiffEntry e{r.u16(off + 2), r.u32(off + 4), off + 8};
        switch (tag) {
            case 256: width = tiff_int_at(r, e, 0); break;
            case 257: height = tiff_int_at(r, e, 0); break;
            case 258:
                for (std::uint32_t j = 0; j < e.count; ++j) bits.push_back(tiff_int_at(r, e, j));
                break;
            case 259: compression = tiff_int_at(r, e, 0); break;
            case 262: photometric = tiff_int_at(r, e, 0); break;
            case 273:
                strip_offsets = e;
                has_offsets = true;
                break;
            case 277: spp = tiff_int_at(r, e, 0); break;
            case 278: rows_per_strip = tiff_int_at(r, e, 0); break;
            case 279:
                strip_counts = e;
                has_counts = true;
                break;
            case 284: planar = tiff_int_at(r, e, 0); break;
            case 320:
                colormap = e;
                has_colormap = true;
                break;
            case 322:
            case 323:
                tiled = true;
                break;
            default: break;
        }
    }

    if (tiled) fail(path, "tiled TIFF is unsupported (strip-organized files only)");
    if (width == 0 || height == 0) fail(path, "missing image dimensions");
    if (width > (1u << 20) || height > (1u << 20)) fail(path, "implausible image dimensions");
    if (compression != 1) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "unsupported compression %u (uncompressed only)",
                      compression);
        fail(path, buf);
    }
    if (planar != 1) fail(path, "unsupported planar configuration");
    if (bits.empty()) bits.push_back(1);  // TIFF default
    for (std::uint32_t b : bits) {
        if (b != 8) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "unsupported bit depth %u", b);
            fail(path, buf);
        }
    }
    if (!has_offsets) fail(path, "missing strip offsets");
    if (!has_counts) fail(path, "missing strip byte counts");

    const bool gray = photometric == 0 || photometric == 1;
    const bool palette = photometric == 3;
    if (!gray && !palette && photometric != 2)
        fail(path, "unsupported photometric interpretation");
    if (palette && !has_colormap) fail(path, "indexed TIFF without a color map");
    if (photometric == 2 && spp != 3 && spp != 4)
        fail(path, "unsupported samples per pixel for RGB");
    if ((gray || palette) && spp != 1) fail(path, "unsupported samples per pixel");
    if (spp == 4) warn(warnings, path, "alpha channel discarded");
    if (gray) warn(warnings, path, "grayscale image expanded to RGB");
    if (palette) warn(warnings, path, "indexed-color image expanded to RGB");

    std::vector<std::uint8_t> raster;
    raster.reserve(static_cast<std::size_t>(width) * height * spp);
    const std::uint32_t strips =
        rows_per_strip >= height ? 1 : (height + rows_per_strip - 1) / rows_per_strip;
    for (std::uint32_t s = 0; s < strips; ++s) {
        const std::size_t strip_off = tiff_int_at(r, strip_offsets, s);
        const std::size_t strip_len = tiff_int_at(r, strip_counts, s);
        if (strip_off + strip_len > bytes.size()) fail(path, "truncated file");
        raster.insert(raster.end(), bytes.begin() + static_cast<std::ptrdiff_t>(strip_off),
                      bytes.begin() + static_cast<std::ptrdiff_t>(strip_off + strip_len));
    }
    if (raster.size() < static_cast<std::size_t>(width) * height * spp)
        fail(path, "truncated file");

    PixelImage img(static_cast<int>(width), static_cast<int>(height));
    if (photometric == 2) {
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            img.samples[3 * p] = raster[p * spp];
            img.samples[3 * p + 1] = raster[p * spp + 1];
            img.samples[3 * p + 2] = raster[p * spp + 2];
        }
    } else if (palette) {
        // TIFF color maps are 16-bit triples, all reds then greens then blues.
        const std::uint32_t entries = colormap.count / 3;
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            const std::uint32_t idx = raster[p];
            if (idx >= entries) fail(path, "palette index out of range");
            img.samples[3 * p] = static_cast<std::uint8_t>(tiff_int_at(r, colormap, idx) >> 8);
            img.samples[3 * p + 1] =
                static_cast<std::uint8_t>(tiff_int_at(r, colormap, entries + idx) >> 8);
            img.samples[3 * p + 2] =
                static_cast<std::uint8_t>(tiff_int_at(r, colormap, 2 * entries + idx) >> 8);
        }
    } else {
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            std::uint8_t v = raster[p];
            if (photometric == 0) v = static_cast<std::uint8_t>(255 - v);  // white-is-zero
            img.samples[3 * p] = img.samples[3 * p + 1] = img.samples[3 * p + 2] = v;
        }
    }
    return img;
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void put_entry(std::vector<std::uint8_t>& out, std::uint16_t tag, std::uint16_t type,
               std::uint32_t count, std::uint32_t value) {
    put16(out, tag);
    put16(out, type);
    put32(out, count);
    put32(out, value);
}

void encode_tiff(const PixelImage& img, const std::string& path) {
    // Little-endian baseline RGB, one strip, uncompressed.
    constexpr std::uint16_t kEntries = 10;
    constexpr std::uint32_t kIfdOffset = 8;
    constexpr std::uint32_t kAfterIfd = kIfdOffset + 2 + kEntries * 12 + 4;
    constexpr std::uint32_t kBitsOffset = kAfterIfd;      // 3 SHORTs
    constexpr std::uint32_t kDataOffset = kAfterIfd + 8;  // 6 bytes + pad

    std::vector<std::uint8_t> out;
    out.reserve(img.samples.size() + kDataOffset);
    out.push_back('I');
    out.push_back('I');
    put16(out, 42);
    put32(out, kIfdOffset);

    put16(out, kEntries);
    put_entry(out, 256, 4, 1, static_cast<std::uint32_t>(img.width));
    put_entry(out, 257, 4, 1, static_cast<std::uint32_t>(img.height));
    put_entry(out, 258, 3, 3, kBitsOffset);
    put_entry(out, 259, 3, 1, 1);  // uncompressed
    put_entry(out, 262, 3, 1, 2);  // RGB
    put_entry(out, 273, 4, 1, kDataOffset);
    put_entry(out, 277, 3, 1, 3);
    put_entry(out, 278, 4, 1, static_cast<std::uint32_t>(img.height));
    put_entry(out, 279, 4, 1, static_cast<std::uint32_t>(img.samples.size()));
    put_entry(out, 284, 3, 1, 1);  // chunky
    put32(out, 0);                 // no further IFD

    put16(out, 8);
    put16(out, 8);
    put16(out, 8);
    put16(out, 0);  // pad to word boundary

    out.insert(out.end(), img.samples.begin(), img.samples.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(path, "cannot open file for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) fail(path, "write failed");
}

}  // namespace

PixelImage decode_image(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail(path, "cannot open file");
    unsigned char magic[4] = {0, 0, 0, 0};
    probe.read(reinterpret_cast<char*>(magic), 4);
    probe.close();

    if (magic[0] == 0x89 && magic[1] == 'P') return decode_png(path, warnings);
    if ((magic[0] == 'I' && magic[1] == 'I') || (magic[0] == 'M' && magic[1] == 'M'))
        return decode_tiff(path, warnings);
    fail(path, "unsupported format (PNG or TIFF expected)");
}

void encode_image(const PixelImage& img, const std::string& path) {
    if (img.pixel_count() == 0) fail(path, "refusing to write an empty image");
    if (ends_with_ci(path, ".png")) {
        encode_png(img, path);
    } else if (ends_with_ci(path, ".tif") || ends_with_ci(path, ".tiff")) {
        encode_tiff(img, path);
    } else {
        fail(path, "unsupported output extension (.png, .tif or .tiff expected)");
    }
}

}  // namespace cq
