#include "rostf/raster.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <nlohmann/json.hpp>

#include "rostf/error.hpp"

namespace rostf {

namespace {

constexpr char kMagic[8] = {'B', 'M', 'R', 'A', 'S', 'T', '0', '1'};

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
}

void check_geometry(const Geometry& g) {
    if (g.height == 0 || g.width == 0 || g.bands == 0)
        throw GeometryError("image dimensions must be positive, got " + to_string(g));
}

}  // namespace

std::string to_string(const Geometry& g) {
    return std::to_string(g.height) + "x" + std::to_string(g.width) + "x" + std::to_string(g.bands);
}

BandView::BandView(const MultiBandImage& parent, std::size_t band)
    : parent_(&parent), band_(band) {
    if (band >= parent.bands())
        throw GeometryError("band index " + std::to_string(band) + " out of range (bands = " +
                            std::to_string(parent.bands()) + ")");
    values_ = parent.values().subspan(band * parent.pixels(), parent.pixels());
}

double BandView::operator()(std::size_t row, std::size_t col) const {
    return values_[row * parent_->width() + col];
}

MultiBandImage::MultiBandImage(Geometry geometry, double fill) : geometry_(geometry) {
    check_geometry(geometry_);
    if (!std::isfinite(fill)) throw Error("fill value must be finite");
    data_.assign(geometry_.size(), fill);
}

MultiBandImage::MultiBandImage(Geometry geometry, Vector data)
    : geometry_(geometry), data_(std::move(data)) {
    check_geometry(geometry_);
    if (data_.size() != geometry_.size())
        throw GeometryError("data length " + std::to_string(data_.size()) +
                            " does not match geometry " + to_string(geometry_));
    if (!all_finite(data_)) throw Error("image contains non-finite samples");
}

BandView MultiBandImage::band(std::size_t b) const { return BandView(*this, b); }

double band_mean(const MultiBandImage& img, std::size_t b) {
    const auto values = img.band(b).values();
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

Norms norms(const MultiBandImage& img) {
    return {l1_norm(img.values()), l2_norm(img.values()),
            l12_norm(img.values(), img.bands(), img.pixels())};
}

std::vector<unsigned char> encode_raster(const MultiBandImage& img) {
    nlohmann::ordered_json header;
    header["height"] = img.height();
    header["width"] = img.width();
    header["bands"] = img.bands();
    header["dtype"] = "f64";
    header["layout"] = "band-major";
    const std::string line = header.dump() + "\n";

    std::vector<unsigned char> out;
    out.reserve(sizeof kMagic + line.size() + 8 * img.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.insert(out.end(), line.begin(), line.end());
    for (double v : img.values()) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        unsigned char buf[8];
        std::memcpy(buf, &bits, 8);
        out.insert(out.end(), buf, buf + 8);
    }
    return out;
}

MultiBandImage decode_raster(std::span<const unsigned char> bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw DecodeError("missing BMRAST01 magic");
    const auto body = bytes.subspan(sizeof kMagic);
    const auto newline = std::find(body.begin(), body.end(), '\n');
    if (newline == body.end()) throw DecodeError("header line is not terminated");
    const std::string header_text(body.begin(), newline);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("malformed header: ") + e.what());
    }

    Geometry g;
    try {
        const auto dim = [&](const char* key) {
            const auto& v = header.at(key);
            if (!v.is_number_integer() || v.get<long long>() <= 0)
                throw DecodeError(std::string("header field '") + key + "' must be a positive integer");
            return v.get<std::size_t>();
        };
        g.height = dim("height");
        g.width = dim("width");
        g.bands = dim("bands");
        if (header.at("dtype") != "f64") throw DecodeError("unsupported dtype, expected f64");
        if (header.at("layout") != "band-major")
            throw DecodeError("unsupported layout, expected band-major");
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("malformed header: ") + e.what());
    }

    const auto payload = body.subspan(static_cast<std::size_t>(newline - body.begin()) + 1);
    const std::size_t expected = 8 * g.size();
    if (payload.size() != expected)
        throw DecodeError("payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(payload.size()));

    Vector data(g.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, payload.data() + 8 * i, 8);
        data[i] = std::bit_cast<double>(to_little_endian(bits));
        if (!std::isfinite(data[i]))
            throw DecodeError("non-finite sample at index " + std::to_string(i));
    }
    return MultiBandImage(g, std::move(data));
}

void write_raster(const MultiBandImage& img, const std::filesystem::path& path) {
    const auto bytes = encode_raster(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

MultiBandImage read_raster(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_raster(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

namespace {

bool encode_png(FILE* fp, const png_byte* pixels, std::size_t w, std::size_t h, std::size_t channels) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t r = 0; r < h; ++r) png_write_row(png, pixels + r * w * channels);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

void write_png(const MultiBandImage& img, const std::filesystem::path& path, PngScaling scaling) {
    const std::size_t channels = img.bands() >= 3 ? 3 : 1;
    const std::size_t h = img.height(), w = img.width();

    std::vector<png_byte> pixels(h * w * channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const auto band = img.band(c).values();
        double lo = 0.0, hi = 1.0;
        if (scaling == PngScaling::MinMax) {
            const auto [mn, mx] = std::minmax_element(band.begin(), band.end());
            lo = *mn;
            hi = *mx;
        }
        const double range = hi > lo ? hi - lo : 1.0;
        for (std::size_t n = 0; n < h * w; ++n) {
            const double t = std::clamp((band[n] - lo) / range, 0.0, 1.0);
            pixels[n * channels + c] = static_cast<png_byte>(std::lround(255.0 * t));
        }
    }

    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw Error("cannot open " + path.string() + " for writing");
    if (!encode_png(fp.get(), pixels.data(), w, h, channels)) throw Error("libpng failed writing " + path.string());
}

}  // namespace rostf
