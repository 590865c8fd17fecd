#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rostf/vecmath.hpp"

namespace rostf {

/// Raster shape: N1 x N2 pixels and B bands.
struct Geometry {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t bands = 0;

    std::size_t pixels() const { return height * width; }
    std::size_t size() const { return height * width * bands; }
    bool operator==(const Geometry&) const = default;
};

std::string to_string(const Geometry& g);

class MultiBandImage;

/// Read-only view of one band, [x]_b in R^N.
class BandView {
public:
    BandView(const MultiBandImage& parent, std::size_t band);

    std::size_t band() const { return band_; }
    std::span<const double> values() const { return values_; }
    double operator()(std::size_t row, std::size_t col) const;

private:
    const MultiBandImage* parent_;
    std::size_t band_;
    std::span<const double> values_;
};

/// Band-major multispectral raster. Band b occupies [b*N, (b+1)*N), rows
/// are contiguous within a band. Samples are finite doubles; the container
/// is immutable once built.
class MultiBandImage {
public:
    /// Constant-valued image.
    explicit MultiBandImage(Geometry geometry, double fill = 0.0);
    /// Takes ownership of `data`; throws GeometryError on a length mismatch
    /// or a non-positive dimension, and Error on a non-finite sample.
    MultiBandImage(Geometry geometry, Vector data);

    const Geometry& geometry() const { return geometry_; }
    std::size_t height() const { return geometry_.height; }
    std::size_t width() const { return geometry_.width; }
    std::size_t bands() const { return geometry_.bands; }
    std::size_t pixels() const { return geometry_.pixels(); }
    std::size_t size() const { return data_.size(); }

    std::span<const double> values() const { return data_; }
    const Vector& data() const { return data_; }
    BandView band(std::size_t b) const;
    double operator()(std::size_t b, std::size_t row, std::size_t col) const {
        return data_[b * pixels() + row * width() + col];
    }

    bool operator==(const MultiBandImage&) const = default;

private:
    Geometry geometry_;
    Vector data_;
};

struct Norms {
    double l1 = 0.0;
    double l2 = 0.0;
    double l12 = 0.0;
};

/// Mean of band b; throws GeometryError when b >= bands.
double band_mean(const MultiBandImage& img, std::size_t b);

/// l1, l2 and l1,2 (per-pixel grouping across bands) norms.
Norms norms(const MultiBandImage& img);

// .bmr container: "BMRAST01", one JSON header line, little-endian f64 payload.

std::vector<unsigned char> encode_raster(const MultiBandImage& img);
MultiBandImage decode_raster(std::span<const unsigned char> bytes);

void write_raster(const MultiBandImage& img, const std::filesystem::path& path);
MultiBandImage read_raster(const std::filesystem::path& path);

enum class PngScaling {
    MinMax,    ///< each band stretched from its own [min, max]
    UnitRange  ///< fixed [0, 1] mapping, values outside are clamped
};

/// 8-bit preview. Bands 0..2 become RGB; fewer than three bands give a
/// grayscale image of band 0.
void write_png(const MultiBandImage& img, const std::filesystem::path& path,
               PngScaling scaling = PngScaling::UnitRange);

}  // namespace rostf
