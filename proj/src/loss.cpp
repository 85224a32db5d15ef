#include "flowsr/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowsr {

void LossConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("LossConfig: lambda must lie in [0,1]");
    if (!(delta >= 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("LossConfig: delta must be finite and >= 0 (0 = grid spacing)");
}

double LossConfig::resolve_delta(const GridSpec& grid) const {
    const double d = delta > 0.0 ? delta : grid.dx;
    if (!(d > 0.0))
        throw std::invalid_argument("LossConfig: effective delta must be positive");
    return d;
}

namespace {

void check_batch(std::span<const FlowState> preds, std::span<const FlowState> truths) {
    if (preds.empty() || preds.size() != truths.size())
        throw std::invalid_argument("loss: need equally many (and at least one) predictions and truths");
    for (std::size_t s = 0; s < preds.size(); ++s) {
        preds[s].rho.validate_shape();
        truths[s].rho.validate_shape();
        if (preds[s].grid() != truths[s].grid())
            throw std::invalid_argument("loss: pair " + std::to_string(s) +
                                        " has mismatched grids");
        for (int k = 0; k < 3; ++k) {
            preds[s].u[k].validate_shape();
            truths[s].u[k].validate_shape();
            if (preds[s].u[k].grid != preds[s].grid() ||
                truths[s].u[k].grid != truths[s].grid())
                throw std::invalid_argument("loss: velocity grid differs from density grid");
        }
    }
}

const std::vector<double>& channel(const FlowState& s, int c) {
    return c == 0 ? s.rho.values : s.u[c - 1].values;
}

const ScalarField3D& channel_field(const FlowState& s, int c) {
    return c == 0 ? s.rho : s.u[c - 1];
}

template <typename Accumulate>
double pointwise_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                      Accumulate&& accumulate) {
    check_batch(preds, truths);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < preds.size(); ++s)
        for (int c = 0; c < 4; ++c) {
            const std::vector<double>& p = channel(preds[s], c);
            const std::vector<double>& t = channel(truths[s], c);
            for (std::size_t i = 0; i < p.size(); ++i) sum += accumulate(p[i] - t[i]);
            count += p.size();
        }
    return sum / static_cast<double>(count);
}

std::vector<FlowState> normalized_copy(std::span<const FlowState> states,
                                       const ChannelStats& stats) {
    std::vector<FlowState> out;
    out.reserve(states.size());
    for (const FlowState& s : states) out.push_back(normalize(s, stats));
    return out;
}

}  // namespace

double mse_loss(std::span<const FlowState> preds, std::span<const FlowState> truths) {
    return pointwise_loss(preds, truths, [](double d) { return d * d; });
}

double mse_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                const ChannelStats& stats) {
    stats.validate();
    const auto np = normalized_copy(preds, stats);
    const auto nt = normalized_copy(truths, stats);
    return mse_loss(std::span<const FlowState>(np), std::span<const FlowState>(nt));
}

double mse_loss(const FlowState& pred, const FlowState& truth) {
    return mse_loss(std::span<const FlowState>(&pred, 1), std::span<const FlowState>(&truth, 1));
}

double mae_loss(std::span<const FlowState> preds, std::span<const FlowState> truths) {
    return pointwise_loss(preds, truths, [](double d) { return std::abs(d); });
}

double mae_loss(const FlowState& pred, const FlowState& truth) {
    return mae_loss(std::span<const FlowState>(&pred, 1), std::span<const FlowState>(&truth, 1));
}

double grad_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg) {
    cfg.validate();
    check_batch(preds, truths);
    const GridSpec& g0 = preds[0].grid();
    if (g0.nx < 3 || g0.ny < 3 || g0.nz < 3)
        throw std::invalid_argument("grad_loss: need at least 3 voxels per axis");
    const double delta = cfg.resolve_delta(g0);

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < preds.size(); ++s)
        for (int c = 0; c < 4; ++c) {
            for (int axis = 1; axis <= 3; ++axis) {
                const ScalarField3D gp = gradient(channel_field(preds[s], c), axis);
                const ScalarField3D gt = gradient(channel_field(truths[s], c), axis);
                for (std::size_t i = 0; i < gp.values.size(); ++i) {
                    const double d = gp.values[i] - gt.values[i];
                    sum += d * d;
                }
            }
            count += channel(preds[s], c).size();
        }
    // Delta^2 / (3 N_vox N_samp N_c): `count` already carries vox*samp*chan,
    // and the 3 gradient directions contribute the remaining divisor.
    return delta * delta * sum / (3.0 * static_cast<double>(count));
}

double grad_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg, const ChannelStats& stats) {
    stats.validate();
    const auto np = normalized_copy(preds, stats);
    const auto nt = normalized_copy(truths, stats);
    return grad_loss(std::span<const FlowState>(np), std::span<const FlowState>(nt), cfg);
}

double grad_loss(const FlowState& pred, const FlowState& truth, const LossConfig& cfg) {
    return grad_loss(std::span<const FlowState>(&pred, 1), std::span<const FlowState>(&truth, 1),
                     cfg);
}

double phys_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg) {
    cfg.validate();
    if (cfg.lambda == 0.0) return mse_loss(preds, truths);
    if (cfg.lambda == 1.0) return grad_loss(preds, truths, cfg);
    return (1.0 - cfg.lambda) * mse_loss(preds, truths) +
           cfg.lambda * grad_loss(preds, truths, cfg);
}

double phys_loss(std::span<const FlowState> preds, std::span<const FlowState> truths,
                 const LossConfig& cfg, const ChannelStats& stats) {
    stats.validate();
    const auto np = normalized_copy(preds, stats);
    const auto nt = normalized_copy(truths, stats);
    return phys_loss(std::span<const FlowState>(np), std::span<const FlowState>(nt), cfg);
}

double phys_loss(const FlowState& pred, const FlowState& truth, const LossConfig& cfg) {
    return phys_loss(std::span<const FlowState>(&pred, 1), std::span<const FlowState>(&truth, 1),
                     cfg);
}

}  // namespace flowsr
