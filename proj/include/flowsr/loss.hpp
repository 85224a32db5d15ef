#pragma once

#include <span>

#include "flowsr/field.hpp"

namespace flowsr {

/// Weights for the gradient-regularized objective
/// L_phys = (1 - lambda) * L_MSE + lambda * L_grad.
/// delta is the grid spacing entering L_grad's Delta^2 prefactor; leave it
/// at 0 to take dx from the prediction grid (the effective spacing must be
/// positive).
struct LossConfig {
    double lambda = 0.99;
    double delta = 0.0;

    void validate() const;
    double resolve_delta(const GridSpec& grid) const;
};

/// Mean squared error over voxels x samples x 4 channels. The plain
/// overloads score the fields exactly as given (physical units); the stats
/// overloads z-score both sides first, which is the training-pipeline
/// convention.
double mse_loss(std::span<const FlowState> preds, std::span<const FlowState> truths);
double mse_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                const ChannelStats& stats);
double mse_loss(const FlowState& pred, const FlowState& truth);

/// Mean absolute error companion of mse_loss (same conventions).
double mae_loss(std::span<const FlowState> preds, std::span<const FlowState> truths);
double mae_loss(const FlowState& pred, const FlowState& truth);

/// Delta^2 / (3 N_vox N_samp N_c) times the summed squared difference of the
/// per-axis gradients of prediction and truth (central interior stencils,
/// one-sided at faces). Needs >= 3 voxels per axis.
double grad_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg = {});
double grad_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg, const ChannelStats& stats);
double grad_loss(const FlowState& pred, const FlowState& truth, const LossConfig& cfg = {});

/// Convex combination of mse_loss and grad_loss. lambda = 0 returns exactly
/// mse_loss and lambda = 1 exactly grad_loss (the other term is not
/// evaluated).
double phys_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg = {});
double phys_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg, const ChannelStats& stats);
double phys_loss(const FlowState& pred, const FlowState& truth, const LossConfig& cfg = {});

}  // namespace flowsr
