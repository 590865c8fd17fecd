#pragma once

#include <nlohmann/json.hpp>

#include "rostf/raster.hpp"

namespace rostf {

struct MetricsReport {
    double rmse = 0.0;
    double sam = 0.0;  ///< radians
    double mssim = 0.0;
    double cc = 0.0;
};

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

/// sqrt(||est - truth||^2 / (N B))
double rmse(const MultiBandImage& est, const MultiBandImage& truth);

/// Mean spectral angle over pixels. A pixel whose spectrum is zero in
/// either image contributes 0.
double sam(const MultiBandImage& est, const MultiBandImage& truth);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// SSIM of a single band: Gaussian-weighted local statistics averaged over
/// every window position fully inside the image.
double ssim(const MultiBandImage& est, const MultiBandImage& truth, std::size_t band, const SsimOptions& opt = {});

/// Band average of ssim(). Throws GeometryError when the image is smaller
/// than the window.
double mssim(const MultiBandImage& est, const MultiBandImage& truth, const SsimOptions& opt = {});

/// Pearson correlation over all samples; throws Error if either image is constant.
double cc(const MultiBandImage& est, const MultiBandImage& truth);

MetricsReport evaluate(const MultiBandImage& est, const MultiBandImage& truth);

}  // namespace rostf
