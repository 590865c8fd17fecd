#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "rostf/raster.hpp"

namespace rostf {

/// Matrix-free linear map R^cols -> R^rows with its exact transpose.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;

    /// out = A in. `out` is overwritten.
    virtual void apply(std::span<const double> in, std::span<double> out) const = 0;
    /// out = A^T in. `out` is overwritten.
    virtual void apply_adjoint(std::span<const double> in, std::span<double> out) const = 0;

    /// Upper bound on ||A||_op^2 used for stepsize selection.
    virtual double norm_sq_bound() const = 0;

    Vector apply(std::span<const double> in) const;
    Vector apply_adjoint(std::span<const double> in) const;

protected:
    void check_dims(std::span<const double> in, std::span<double> out, bool adjoint) const;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class IdentityOperator final : public LinearOperator {
public:
    explicit IdentityOperator(std::size_t n) : n_(n) {}

    std::size_t rows() const override { return n_; }
    std::size_t cols() const override { return n_; }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    double norm_sq_bound() const override { return 1.0; }
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

private:
    std::size_t n_;
};

enum class DiffDirection { Vertical, Horizontal, Stacked };

/// Forward differences per band with a zero last row/column. The stacked
/// form outputs (D_v x ; D_h x), each block band-major, length 2NB.
class DiffOperator final : public LinearOperator {
public:
    explicit DiffOperator(Geometry geometry, DiffDirection direction = DiffDirection::Stacked);

    const Geometry& geometry() const { return geometry_; }
    DiffDirection direction() const { return direction_; }

    std::size_t rows() const override;
    std::size_t cols() const override { return geometry_.size(); }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    /// 4 per direction, 8 stacked.
    double norm_sq_bound() const override;
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

private:
    void vertical(std::span<const double> in, std::span<double> out) const;
    void horizontal(std::span<const double> in, std::span<double> out) const;
    void vertical_adjoint(std::span<const double> in, std::span<double> out) const;
    void horizontal_adjoint(std::span<const double> in, std::span<double> out) const;

    Geometry geometry_;
    DiffDirection direction_;
};

/// k x k moving average anchored at the top-left pixel of the window, with
/// replicate padding past the bottom and right edges.
class BlurOperator final : public LinearOperator {
public:
    BlurOperator(Geometry geometry, std::size_t k);

    const Geometry& geometry() const { return geometry_; }
    std::size_t window() const { return k_; }

    std::size_t rows() const override { return geometry_.size(); }
    std::size_t cols() const override { return geometry_.size(); }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    /// Rows sum to 1, but replicate padding lets the last row and column
    /// feed up to k windows, so columns sum to at most (k + 1) / 2 per axis.
    double norm_sq_bound() const override {
        const double half = 0.5 * static_cast<double>(k_ + 1);
        return half * half;
    }
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

private:
    Geometry geometry_;
    std::size_t k_;
};

/// Keeps the top-left pixel of every k x k block. Requires k | height, width.
class DownsampleOperator final : public LinearOperator {
public:
    DownsampleOperator(Geometry hr_geometry, std::size_t k);

    const Geometry& hr_geometry() const { return hr_; }
    const Geometry& lr_geometry() const { return lr_; }
    std::size_t factor() const { return k_; }

    std::size_t rows() const override { return lr_.size(); }
    std::size_t cols() const override { return hr_.size(); }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    double norm_sq_bound() const override { return 1.0; }
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

private:
    Geometry hr_;
    Geometry lr_;
    std::size_t k_;
};

/// The LR formation map S B evaluated directly: with k dividing both
/// dimensions every sampled window lies inside the image, so each LR pixel
/// is the exact mean of its k x k HR block.
class BlurDownsampleOperator final : public LinearOperator {
public:
    BlurDownsampleOperator(Geometry hr_geometry, std::size_t k);

    const Geometry& hr_geometry() const { return hr_; }
    const Geometry& lr_geometry() const { return lr_; }
    std::size_t factor() const { return k_; }

    std::size_t rows() const override { return lr_.size(); }
    std::size_t cols() const override { return hr_.size(); }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    /// The loose bound 2 reproduces the published stepsizes 1/19 and 1/18;
    /// the true value is 1/k^2.
    double norm_sq_bound() const override { return 2.0; }
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

private:
    Geometry hr_;
    Geometry lr_;
    std::size_t k_;
};

/// outer * inner, evaluated through a temporary.
class ComposedOperator final : public LinearOperator {
public:
    ComposedOperator(OperatorPtr outer, OperatorPtr inner, double norm_sq_bound);

    std::size_t rows() const override { return outer_->rows(); }
    std::size_t cols() const override { return inner_->cols(); }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    double norm_sq_bound() const override { return bound_; }
    using LinearOperator::apply;
    using LinearOperator::apply_adjoint;

private:
    OperatorPtr outer_;
    OperatorPtr inner_;
    double bound_;
};

/// Power iteration on A^T A; returns the estimate of ||A||_op. The start
/// vector is drawn from a seeded mt19937_64 so results are reproducible.
double power_iteration_norm(const LinearOperator& op, int iterations, std::uint64_t seed);

/// LR geometry implied by an HR geometry and factor k; throws GeometryError
/// with a crop hint when k does not divide both dimensions.
Geometry lr_geometry_for(const Geometry& hr, std::size_t k);

/// Nearest-neighbour k-fold upsampling (LR -> HR).
Vector upsample_nearest(std::span<const double> lr, const Geometry& lr_geometry, std::size_t k);

}  // namespace rostf
