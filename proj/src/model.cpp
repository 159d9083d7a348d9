#include "janus/model.hpp"

#include <cmath>

namespace janus {

Eigen::VectorXd SegmentorParams::pack() const {
  Eigen::VectorXd flat(weights.size() + bias.size());
  flat << Eigen::Map<const Eigen::VectorXd>(weights.data(), weights.size()),
      bias;
  return flat;
}

SegmentorParams SegmentorParams::unpack(const Eigen::VectorXd& flat,
                                        int num_classes) {
  SegmentorParams p = zeros(num_classes);
  p.weights = Eigen::Map<const Eigen::MatrixXd>(flat.data(), kFeatureDim,
                                                num_classes);
  p.bias = flat.tail(num_classes);
  return p;
}

Eigen::MatrixXd voxel_features(const VolumeGrid& volume) {
  const Dims& dm = volume.dims;
  Eigen::MatrixXd phi(dm.voxels(), SegmentorParams::kFeatureDim);
  std::int64_t v = 0;
  for (int z = 0; z < dm.d; ++z)
    for (int y = 0; y < dm.h; ++y)
      for (int x = 0; x < dm.w; ++x, ++v) {
        phi(v, 0) = double(volume.data[v]);
        phi(v, 1) = double(z) / dm.d;
        phi(v, 2) = double(y) / dm.h;
        phi(v, 3) = double(x) / dm.w;
      }
  return phi;
}

ProbGrid forward(const SegmentorParams& params, const VolumeGrid& volume) {
  const int nc = params.num_classes();
  const Eigen::MatrixXd phi = voxel_features(volume);
  Eigen::MatrixXd logits = phi * params.weights;  // voxels x nc
  logits.rowwise() += params.bias.transpose();
  ProbGrid out(volume.dims, nc);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>
      probs(out.data.data(), volume.dims.voxels(), nc);
  // Row-stable softmax.
  probs = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
  probs.array().colwise() /= probs.rowwise().sum().array();
  return out;
}

namespace {

using RowMajorMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// dLoss/dProb for the batch-pooled soft Dice loss, filled per volume.
struct DicePool {
  Eigen::VectorXd inter, psum, tsum;  // per class
  double eps = 1e-5;

  explicit DicePool(int nc) {
    inter.setZero(nc);
    psum.setZero(nc);
    tsum.setZero(nc);
  }
  void accumulate(const ProbGrid& p, const LabelGrid& t) {
    const int nc = p.num_classes;
    Eigen::Map<const RowMajorMat> probs(p.data.data(), t.data.size(), nc);
    psum += probs.colwise().sum();
    for (std::int64_t v = 0; v < t.data.size(); ++v) {
      tsum[t.data[v]] += 1.0;
      inter[t.data[v]] += probs(v, t.data[v]);
    }
  }
};

}  // namespace

SegmentorParams backward(const SegmentorParams& params,
                         std::span<const VolumeGrid> volumes,
                         std::span<const ProbGrid> probs,
                         std::span<const LabelGrid> targets, LossKind kind) {
  const int nc = params.num_classes();
  if (volumes.size() != probs.size() || volumes.size() != targets.size() ||
      volumes.empty())
    throw ShapeError("backward: batch arity mismatch");

  std::int64_t total_voxels = 0;
  for (const auto& t : targets) total_voxels += t.data.size();

  const double w_ce = kind == LossKind::CrossEntropy ? 1.0
                      : kind == LossKind::Hybrid     ? 0.5
                                                     : 0.0;
  const double w_dice = kind == LossKind::Dice     ? 1.0
                        : kind == LossKind::Hybrid ? 0.5
                                                   : 0.0;

  DicePool pool(nc);
  if (w_dice != 0.0)
    for (size_t i = 0; i < probs.size(); ++i)
      pool.accumulate(probs[i], targets[i]);

  SegmentorParams grad = SegmentorParams::zeros(nc);
  for (size_t i = 0; i < volumes.size(); ++i) {
    const auto& t = targets[i];
    const std::int64_t n = t.data.size();
    Eigen::Map<const RowMajorMat> p(probs[i].data.data(), n, nc);
    RowMajorMat dlogit = RowMajorMat::Zero(n, nc);

    if (w_ce != 0.0) {
      dlogit = (w_ce / double(total_voxels)) * p;
      for (std::int64_t v = 0; v < n; ++v)
        dlogit(v, t.data[v]) -= w_ce / double(total_voxels);
    }
    if (w_dice != 0.0) {
      // dL/dp then chain through the per-voxel softmax.
      Eigen::VectorXd den = pool.psum + pool.tsum;
      den.array() += pool.eps;
      const Eigen::VectorXd num = 2.0 * pool.inter.array() + pool.eps;
      for (std::int64_t v = 0; v < n; ++v) {
        Eigen::VectorXd dLdp = Eigen::VectorXd::Zero(nc);
        for (int c = 0; c < nc; ++c) {
          const double tv = t.data[v] == c ? 1.0 : 0.0;
          dLdp[c] = -(1.0 / nc) * (2.0 * tv * den[c] - num[c]) /
                    (den[c] * den[c]);
        }
        const double dot = dLdp.dot(p.row(v).transpose());
        for (int c = 0; c < nc; ++c)
          dlogit(v, c) += w_dice * p(v, c) * (dLdp[c] - dot);
      }
    }

    const Eigen::MatrixXd phi = voxel_features(volumes[i]);
    grad.weights += phi.transpose() * dlogit;
    grad.bias += dlogit.colwise().sum().transpose();
  }
  return grad;
}

void sgd_step(SegmentorParams& params, SegmentorParams& momentum_buffers,
              const SegmentorParams& grad, double lr, double momentum,
              double weight_decay) {
  momentum_buffers.weights = momentum * momentum_buffers.weights +
                             (grad.weights + weight_decay * params.weights);
  momentum_buffers.bias =
      momentum * momentum_buffers.bias + (grad.bias + weight_decay * params.bias);
  params.weights -= lr * momentum_buffers.weights;
  params.bias -= lr * momentum_buffers.bias;
}

}  // namespace janus
