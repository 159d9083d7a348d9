#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "janus/grid.hpp"

namespace janus {

/// Per-voxel linear softmax segmentor over 4 features:
/// (intensity, z/d, y/h, x/w).
struct SegmentorParams {
  static constexpr int kFeatureDim = 4;

  Eigen::MatrixXd weights;  // kFeatureDim x num_classes
  Eigen::VectorXd bias;     // num_classes

  static SegmentorParams zeros(int num_classes) {
    SegmentorParams p;
    p.weights.setZero(kFeatureDim, num_classes);
    p.bias.setZero(num_classes);
    return p;
  }
  int num_classes() const { return int(bias.size()); }

  Eigen::VectorXd pack() const;
  static SegmentorParams unpack(const Eigen::VectorXd& flat, int num_classes);
};

enum class LossKind { CrossEntropy, Dice, Hybrid };

/// Voxel features as an (voxels x 4) matrix; coordinates normalized by the
/// grid extents.
Eigen::MatrixXd voxel_features(const VolumeGrid& volume);

/// softmax(W^T phi + b) per voxel.
ProbGrid forward(const SegmentorParams& params, const VolumeGrid& volume);

/// Analytic gradient of the batch loss (Dice pooled over the whole batch)
/// with respect to the parameters. `probs[i]` must be forward(params,
/// volumes[i]) up to voxel permutation consistent with `volumes[i]`.
SegmentorParams backward(const SegmentorParams& params,
                         std::span<const VolumeGrid> volumes,
                         std::span<const ProbGrid> probs,
                         std::span<const LabelGrid> targets, LossKind kind);

/// buf <- momentum*buf + (grad + weight_decay*theta); theta <- theta - lr*buf.
void sgd_step(SegmentorParams& params, SegmentorParams& momentum_buffers,
              const SegmentorParams& grad, double lr, double momentum = 0.9,
              double weight_decay = 1e-4);

}  // namespace janus
