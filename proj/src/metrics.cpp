#include "rostf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rostf/error.hpp"

namespace rostf {

namespace {

void require_same(const MultiBandImage& a, const MultiBandImage& b) {
    if (a.geometry() != b.geometry())
        throw GeometryError("metric operands differ in geometry: " + to_string(a.geometry()) + " vs " +
                            to_string(b.geometry()));
}

Vector gaussian_taps(int window, double sigma) {
    Vector w(static_cast<std::size_t>(window));
    const double c = (window - 1) / 2.0;
    double s = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - c;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        s += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= s;
    return w;
}

// 'valid' separable filtering of an H x W plane.
Vector filter_valid(const double* x, std::size_t H, std::size_t W, const Vector& taps) {
    const std::size_t k = taps.size(), ow = W - k + 1, oh = H - k + 1;
    Vector rows(H * ow, 0.0), out(oh * ow, 0.0);
    for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += taps[t] * x[i * W + j + t];
            rows[i * ow + j] = s;
        }
    for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            const double w = taps[t];
            const double* r = rows.data() + (i + t) * ow;
            double* o = out.data() + i * ow;
            for (std::size_t j = 0; j < ow; ++j) o[j] += w * r[j];
        }
    return out;
}

}  // namespace

void to_json(nlohmann::json& j, const MetricsReport& r) {
    j = nlohmann::json{{"rmse", r.rmse}, {"sam", r.sam}, {"mssim", r.mssim}, {"cc", r.cc}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
    j.at("rmse").get_to(r.rmse);
    j.at("sam").get_to(r.sam);
    j.at("mssim").get_to(r.mssim);
    j.at("cc").get_to(r.cc);
}

double rmse(const MultiBandImage& est, const MultiBandImage& truth) {
    require_same(est, truth);
    const double d = l2_distance(est.values(), truth.values());
    return std::sqrt(d * d / static_cast<double>(est.size()));
}

double sam(const MultiBandImage& est, const MultiBandImage& truth) {
    require_same(est, truth);
    const std::size_t N = est.pixels(), B = est.bands();
    const auto a = est.values(), b = truth.values();
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t k = 0; k < B; ++k) {
            const double x = a[k * N + n], y = b[k * N + n];
            ab += x * y;
            aa += x * x;
            bb += y * y;
        }
        if (aa == 0.0 || bb == 0.0) continue;
        total += std::acos(std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0));
    }
    return total / static_cast<double>(N);
}

double ssim(const MultiBandImage& est, const MultiBandImage& truth, std::size_t band, const SsimOptions& opt) {
    require_same(est, truth);
    const std::size_t H = est.height(), W = est.width(), win = static_cast<std::size_t>(opt.window);
    if (H < win || W < win)
        throw GeometryError("SSIM window " + std::to_string(win) + " larger than image " + to_string(est.geometry()));
    const auto x = est.band(band).values();
    const auto y = truth.band(band).values();
    const std::size_t N = H * W;
    Vector xx(N), yy(N), xy(N);
    for (std::size_t n = 0; n < N; ++n) {
        xx[n] = x[n] * x[n];
        yy[n] = y[n] * y[n];
        xy[n] = x[n] * y[n];
    }
    const Vector taps = gaussian_taps(opt.window, opt.sigma);
    const Vector mx = filter_valid(x.data(), H, W, taps);
    const Vector my = filter_valid(y.data(), H, W, taps);
    const Vector sxx = filter_valid(xx.data(), H, W, taps);
    const Vector syy = filter_valid(yy.data(), H, W, taps);
    const Vector sxy = filter_valid(xy.data(), H, W, taps);

    const double c1 = std::pow(opt.k1 * opt.dynamic_range, 2);
    const double c2 = std::pow(opt.k2 * opt.dynamic_range, 2);
    double total = 0.0;
    for (std::size_t m = 0; m < mx.size(); ++m) {
        const double ux = mx[m], uy = my[m];
        const double vx = sxx[m] - ux * ux, vy = syy[m] - uy * uy, cxy = sxy[m] - ux * uy;
        total += ((2 * ux * uy + c1) * (2 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(mx.size());
}

double mssim(const MultiBandImage& est, const MultiBandImage& truth, const SsimOptions& opt) {
    require_same(est, truth);
    double total = 0.0;
    for (std::size_t b = 0; b < est.bands(); ++b) total += ssim(est, truth, b, opt);
    return total / static_cast<double>(est.bands());
}

double cc(const MultiBandImage& est, const MultiBandImage& truth) {
    require_same(est, truth);
    const auto a = est.values(), b = truth.values();
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw Error("correlation undefined for a constant image");
    return sab / std::sqrt(saa * sbb);
}

MetricsReport evaluate(const MultiBandImage& est, const MultiBandImage& truth) {
    return {rmse(est, truth), sam(est, truth), mssim(est, truth), cc(est, truth)};
}

}  // namespace rostf
