#include "rostf/linops.hpp"

#include <algorithm>
#include <cmath>

#include "rostf/error.hpp"
#include "rostf/random.hpp"

namespace rostf {

Vector LinearOperator::apply(std::span<const double> in) const {
    Vector out(rows());
    apply(in, out);
    return out;
}

Vector LinearOperator::apply_adjoint(std::span<const double> in) const {
    Vector out(cols());
    apply_adjoint(in, out);
    return out;
}

void LinearOperator::check_dims(std::span<const double> in, std::span<double> out, bool adjoint) const {
    const std::size_t want_in = adjoint ? rows() : cols();
    const std::size_t want_out = adjoint ? cols() : rows();
    if (in.size() != want_in || out.size() != want_out)
        throw GeometryError("operator dimension mismatch: expected " + std::to_string(want_in) + " -> " +
                            std::to_string(want_out) + ", got " + std::to_string(in.size()) + " -> " +
                            std::to_string(out.size()));
}

// ---------------------------------------------------------------------------

void IdentityOperator::apply(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, false);
    std::copy(in.begin(), in.end(), out.begin());
}

void IdentityOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, true);
    std::copy(in.begin(), in.end(), out.begin());
}

// ---------------------------------------------------------------------------

DiffOperator::DiffOperator(Geometry geometry, DiffDirection direction)
    : geometry_(geometry), direction_(direction) {
    if (geometry_.size() == 0) throw GeometryError("empty geometry");
}

std::size_t DiffOperator::rows() const {
    return direction_ == DiffDirection::Stacked ? 2 * geometry_.size() : geometry_.size();
}

double DiffOperator::norm_sq_bound() const { return direction_ == DiffDirection::Stacked ? 8.0 : 4.0; }

void DiffOperator::vertical(std::span<const double> in, std::span<double> out) const {
    const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
    for (std::size_t b = 0; b < geometry_.bands; ++b) {
        const double* x = in.data() + b * N;
        double* y = out.data() + b * N;
        for (std::size_t i = 0; i + 1 < H; ++i)
            for (std::size_t j = 0; j < W; ++j) y[i * W + j] = x[(i + 1) * W + j] - x[i * W + j];
        std::fill(y + (H - 1) * W, y + H * W, 0.0);
    }
}

void DiffOperator::horizontal(std::span<const double> in, std::span<double> out) const {
    const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
    for (std::size_t b = 0; b < geometry_.bands; ++b) {
        const double* x = in.data() + b * N;
        double* y = out.data() + b * N;
        for (std::size_t i = 0; i < H; ++i) {
            const double* xr = x + i * W;
            double* yr = y + i * W;
            for (std::size_t j = 0; j + 1 < W; ++j) yr[j] = xr[j + 1] - xr[j];
            yr[W - 1] = 0.0;
        }
    }
}

void DiffOperator::vertical_adjoint(std::span<const double> in, std::span<double> out) const {
    const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
    for (std::size_t b = 0; b < geometry_.bands; ++b) {
        const double* y = in.data() + b * N;
        double* x = out.data() + b * N;
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) {
                double v = 0.0;
                if (i >= 1) v += y[(i - 1) * W + j];
                if (i + 1 < H) v -= y[i * W + j];
                x[i * W + j] = v;
            }
    }
}

void DiffOperator::horizontal_adjoint(std::span<const double> in, std::span<double> out) const {
    const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
    for (std::size_t b = 0; b < geometry_.bands; ++b) {
        const double* y = in.data() + b * N;
        double* x = out.data() + b * N;
        for (std::size_t i = 0; i < H; ++i) {
            const double* yr = y + i * W;
            double* xr = x + i * W;
            for (std::size_t j = 0; j < W; ++j) {
                double v = 0.0;
                if (j >= 1) v += yr[j - 1];
                if (j + 1 < W) v -= yr[j];
                xr[j] = v;
            }
        }
    }
}

void DiffOperator::apply(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, false);
    const std::size_t n = geometry_.size();
    switch (direction_) {
        case DiffDirection::Vertical: vertical(in, out); break;
        case DiffDirection::Horizontal: horizontal(in, out); break;
        case DiffDirection::Stacked:
            vertical(in, out.first(n));
            horizontal(in, out.subspan(n));
            break;
    }
}

void DiffOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, true);
    const std::size_t n = geometry_.size();
    switch (direction_) {
        case DiffDirection::Vertical: vertical_adjoint(in, out); break;
        case DiffDirection::Horizontal: horizontal_adjoint(in, out); break;
        case DiffDirection::Stacked: {
            vertical_adjoint(in.first(n), out);
            const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
            const auto yh = in.subspan(n);
            for (std::size_t b = 0; b < geometry_.bands; ++b)
                for (std::size_t i = 0; i < H; ++i) {
                    const double* yr = yh.data() + b * N + i * W;
                    double* xr = out.data() + b * N + i * W;
                    for (std::size_t j = 0; j < W; ++j) {
                        if (j >= 1) xr[j] += yr[j - 1];
                        if (j + 1 < W) xr[j] -= yr[j];
                    }
                }
            break;
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

// Window mean of length k starting at each index, clamping past the end:
// out_i = (1/k) sum_{a<k} v_{min(i+a, n-1)}. Strided in/out, `prefix` is scratch (n+1).
void window_mean_1d(const double* v, std::size_t stride_in, double* out, std::size_t stride_out,
                    std::size_t n, std::size_t k, Vector& prefix) {
    prefix[0] = 0.0;
    for (std::size_t m = 0; m < n; ++m) prefix[m + 1] = prefix[m] + v[m * stride_in];
    const double last = v[(n - 1) * stride_in];
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t end = std::min(i + k, n);  // exclusive
        const std::size_t overflow = i + k - end;
        out[i * stride_out] = (prefix[end] - prefix[i] + static_cast<double>(overflow) * last) * inv_k;
    }
}

// Transpose of window_mean_1d.
void window_mean_1d_adjoint(const double* y, std::size_t stride_in, double* out, std::size_t stride_out,
                            std::size_t n, std::size_t k, Vector& prefix) {
    prefix[0] = 0.0;
    for (std::size_t m = 0; m < n; ++m) prefix[m + 1] = prefix[m] + y[m * stride_in];
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const std::size_t start = m + 1 >= k ? m + 1 - k : 0;
        out[m * stride_out] = (prefix[m + 1] - prefix[start]) * inv_k;
    }
    // The last sample also receives every clamped tap.
    double s = 0.0;
    const std::size_t first = n >= k ? n - k : 0;
    for (std::size_t i = first; i < n; ++i) s += static_cast<double>(i + k - n + 1) * y[i * stride_in];
    out[(n - 1) * stride_out] = s * inv_k;
}

}  // namespace

BlurOperator::BlurOperator(Geometry geometry, std::size_t k) : geometry_(geometry), k_(k) {
    if (k == 0) throw GeometryError("blur window must be positive");
    if (k > std::min(geometry.height, geometry.width))
        throw GeometryError("blur window " + std::to_string(k) + " larger than image " + to_string(geometry));
}

void BlurOperator::apply(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, false);
    if (k_ == 1) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
    Vector tmp(N), prefix(std::max(H, W) + 1);
    for (std::size_t b = 0; b < geometry_.bands; ++b) {
        const double* x = in.data() + b * N;
        double* y = out.data() + b * N;
        for (std::size_t i = 0; i < H; ++i) window_mean_1d(x + i * W, 1, tmp.data() + i * W, 1, W, k_, prefix);
        for (std::size_t j = 0; j < W; ++j) window_mean_1d(tmp.data() + j, W, y + j, W, H, k_, prefix);
    }
}

void BlurOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, true);
    if (k_ == 1) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    const std::size_t H = geometry_.height, W = geometry_.width, N = geometry_.pixels();
    Vector tmp(N), prefix(std::max(H, W) + 1);
    for (std::size_t b = 0; b < geometry_.bands; ++b) {
        const double* y = in.data() + b * N;
        double* x = out.data() + b * N;
        for (std::size_t j = 0; j < W; ++j) window_mean_1d_adjoint(y + j, W, tmp.data() + j, W, H, k_, prefix);
        for (std::size_t i = 0; i < H; ++i)
            window_mean_1d_adjoint(tmp.data() + i * W, 1, x + i * W, 1, W, k_, prefix);
    }
}

// ---------------------------------------------------------------------------

Geometry lr_geometry_for(const Geometry& hr, std::size_t k) {
    if (k == 0) throw GeometryError("resolution factor must be positive");
    if (hr.height % k != 0 || hr.width % k != 0)
        throw GeometryError("HR size " + std::to_string(hr.height) + "x" + std::to_string(hr.width) +
                            " is not divisible by k = " + std::to_string(k) +
                            "; crop the image to a multiple of k");
    return {hr.height / k, hr.width / k, hr.bands};
}

DownsampleOperator::DownsampleOperator(Geometry hr_geometry, std::size_t k)
    : hr_(hr_geometry), lr_(lr_geometry_for(hr_geometry, k)), k_(k) {}

void DownsampleOperator::apply(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, false);
    const std::size_t W = hr_.width, N = hr_.pixels(), h = lr_.height, w = lr_.width, n = lr_.pixels();
    for (std::size_t b = 0; b < hr_.bands; ++b)
        for (std::size_t p = 0; p < h; ++p)
            for (std::size_t q = 0; q < w; ++q) out[b * n + p * w + q] = in[b * N + p * k_ * W + q * k_];
}

void DownsampleOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, true);
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t W = hr_.width, N = hr_.pixels(), h = lr_.height, w = lr_.width, n = lr_.pixels();
    for (std::size_t b = 0; b < hr_.bands; ++b)
        for (std::size_t p = 0; p < h; ++p)
            for (std::size_t q = 0; q < w; ++q) out[b * N + p * k_ * W + q * k_] = in[b * n + p * w + q];
}

// ---------------------------------------------------------------------------

BlurDownsampleOperator::BlurDownsampleOperator(Geometry hr_geometry, std::size_t k)
    : hr_(hr_geometry), lr_(lr_geometry_for(hr_geometry, k)), k_(k) {}

void BlurDownsampleOperator::apply(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, false);
    const std::size_t W = hr_.width, N = hr_.pixels(), w = lr_.width, n = lr_.pixels();
    const double scale = 1.0 / static_cast<double>(k_ * k_);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < hr_.bands; ++b) {
        const double* x = in.data() + b * N;
        double* y = out.data() + b * n;
        for (std::size_t i = 0; i < hr_.height; ++i) {
            double* yr = y + (i / k_) * w;
            const double* xr = x + i * W;
            for (std::size_t j = 0; j < W; ++j) yr[j / k_] += xr[j];
        }
        for (std::size_t m = 0; m < n; ++m) y[m] *= scale;
    }
}

void BlurDownsampleOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, true);
    const std::size_t W = hr_.width, N = hr_.pixels(), w = lr_.width, n = lr_.pixels();
    const double scale = 1.0 / static_cast<double>(k_ * k_);
    for (std::size_t b = 0; b < hr_.bands; ++b) {
        const double* y = in.data() + b * n;
        double* x = out.data() + b * N;
        for (std::size_t i = 0; i < hr_.height; ++i) {
            const double* yr = y + (i / k_) * w;
            double* xr = x + i * W;
            for (std::size_t j = 0; j < W; ++j) xr[j] = yr[j / k_] * scale;
        }
    }
}

// ---------------------------------------------------------------------------

ComposedOperator::ComposedOperator(OperatorPtr outer, OperatorPtr inner, double norm_sq_bound)
    : outer_(std::move(outer)), inner_(std::move(inner)), bound_(norm_sq_bound) {
    if (outer_->cols() != inner_->rows()) throw GeometryError("composed operators do not chain");
}

void ComposedOperator::apply(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, false);
    Vector tmp(inner_->rows());
    inner_->apply(in, tmp);
    outer_->apply(tmp, out);
}

void ComposedOperator::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    check_dims(in, out, true);
    Vector tmp(outer_->cols());
    outer_->apply_adjoint(in, tmp);
    inner_->apply_adjoint(tmp, out);
}

// ---------------------------------------------------------------------------

double power_iteration_norm(const LinearOperator& op, int iterations, std::uint64_t seed) {
    if (iterations < 1) throw Error("power iteration needs at least one iteration");
    Rng rng(seed);
    Vector x(op.cols()), ax(op.rows()), y(op.cols());
    for (double& v : x) v = rng.normal();
    double nx = l2_norm(x);
    for (double& v : x) v /= nx;

    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        op.apply(x, ax);
        op.apply_adjoint(ax, y);
        const double ny = l2_norm(y);
        // Rayleigh quotient <x, A^T A x> = ||A x||^2 for unit x
        estimate = l2_norm(ax);
        if (ny == 0.0) break;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / ny;
    }
    return estimate;
}

Vector upsample_nearest(std::span<const double> lr, const Geometry& lr_geometry, std::size_t k) {
    const std::size_t h = lr_geometry.height, w = lr_geometry.width, n = lr_geometry.pixels();
    const std::size_t H = h * k, W = w * k, N = H * W;
    Vector out(N * lr_geometry.bands);
    for (std::size_t b = 0; b < lr_geometry.bands; ++b)
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) out[b * N + i * W + j] = lr[b * n + (i / k) * w + j / k];
    return out;
}

}  // namespace rostf
