#include "janus/losses.hpp"

#include <algorithm>
#include <cmath>

namespace janus {

namespace {

void check_pairing(std::span<const ProbGrid> pred,
                   std::span<const LabelGrid> target) {
  if (pred.size() != target.size() || pred.empty())
    throw ShapeError("loss: batch sizes differ or empty");
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i].dims == target[i].dims))
      throw ShapeError("loss: prediction/target dims mismatch");
    if (pred[i].num_classes != target[i].num_classes ||
        pred[i].num_classes != pred[0].num_classes)
      throw ShapeError("loss: class count mismatch");
  }
}

}  // namespace

double soft_dice_loss(std::span<const ProbGrid> pred,
                      std::span<const LabelGrid> target, double eps) {
  check_pairing(pred, target);
  const int nc = pred[0].num_classes;
  std::vector<double> inter(size_t(nc), 0.0), psum(size_t(nc), 0.0),
      tsum(size_t(nc), 0.0);
  for (size_t i = 0; i < pred.size(); ++i) {
    const auto& p = pred[i];
    const auto& t = target[i];
    for (std::int64_t v = 0; v < t.data.size(); ++v) {
      const int cls = t.data[v];
      tsum[size_t(cls)] += 1.0;
      for (int c = 0; c < nc; ++c) {
        const double pv = p.data[v * nc + c];
        psum[size_t(c)] += pv;
        if (c == cls) inter[size_t(c)] += pv;
      }
    }
  }
  double dice = 0.0;
  for (int c = 0; c < nc; ++c)
    dice += (2.0 * inter[size_t(c)] + eps) /
            (psum[size_t(c)] + tsum[size_t(c)] + eps);
  return 1.0 - dice / double(nc);
}

double cross_entropy_loss(std::span<const ProbGrid> pred,
                          std::span<const LabelGrid> target) {
  check_pairing(pred, target);
  const int nc = pred[0].num_classes;
  double acc = 0.0;
  std::int64_t voxels = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const auto& p = pred[i];
    const auto& t = target[i];
    for (std::int64_t v = 0; v < t.data.size(); ++v)
      acc += -std::log(std::max(p.data[v * nc + t.data[v]], 1e-12));
    voxels += t.data.size();
  }
  return acc / double(voxels);
}

double displacement_loss(std::span<const ProbGrid> pred,
                         std::span<const LabelGrid> target) {
  return 0.5 * cross_entropy_loss(pred, target) +
         0.5 * soft_dice_loss(pred, target);
}

double total_loss(double layer_labeled, double layer_unlabeled,
                  double displacement, const LossWeights& weights) {
  return layer_labeled + weights.alpha * layer_unlabeled +
         weights.beta() * displacement;
}

double consistency_rampup(long iter, const ScheduleConfig& cfg) {
  const double phase =
      1.0 - std::min(double(iter) / double(cfg.rampup_iters), 1.0);
  return cfg.lambda_u_max * std::exp(-5.0 * phase * phase);
}

double poly_lr(long iter, const ScheduleConfig& cfg) {
  return cfg.base_lr *
         std::pow(1.0 - double(iter) / double(cfg.max_iters), cfg.lr_pow);
}

void ema_update(Eigen::Ref<Eigen::VectorXd> teacher,
                const Eigen::Ref<const Eigen::VectorXd>& student,
                double decay) {
  if (teacher.size() != student.size())
    throw ShapeError("ema_update: parameter length mismatch");
  teacher = decay * teacher + (1.0 - decay) * student;
}

}  // namespace janus
