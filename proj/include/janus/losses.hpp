#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "janus/grid.hpp"

namespace janus {

/// Coefficients of the total objective; beta is derived, never stored,
/// so beta == alpha * lambda_disp holds by construction.
struct LossWeights {
  double alpha = 0.0;
  double lambda_disp = 0.25;

  double beta() const { return alpha * lambda_disp; }
};

/// Schedule constants; the iteration-count defaults follow the mean-teacher
/// convention (ramp to 1.0 over 17k iterations, EMA decay 0.99).
struct ScheduleConfig {
  int rampup_iters = 17000;
  double lambda_u_max = 1.0;
  double ema_decay = 0.99;
  double base_lr = 0.01;
  double lr_pow = 0.9;
  int max_iters = 1;
};

/// Multi-class soft Dice loss, class-mean over all classes including
/// background, sums pooled over every voxel of the batch.
double soft_dice_loss(std::span<const ProbGrid> pred,
                      std::span<const LabelGrid> target, double eps = 1e-5);

/// Mean over batch voxels of -log p[target], probabilities floored at 1e-12.
double cross_entropy_loss(std::span<const ProbGrid> pred,
                          std::span<const LabelGrid> target);

/// Hybrid objective on displaced pairs: (ce + dice) / 2.
double displacement_loss(std::span<const ProbGrid> pred,
                         std::span<const LabelGrid> target);

double total_loss(double layer_labeled, double layer_unlabeled,
                  double displacement, const LossWeights& weights);

/// Consistency weight ramp: lambda_u_max * exp(-5 (1 - min(t/T, 1))^2).
double consistency_rampup(long iter, const ScheduleConfig& cfg);

/// base_lr * (1 - iter/max_iters)^pow.
double poly_lr(long iter, const ScheduleConfig& cfg);

/// theta_t <- w * theta_t + (1 - w) * theta_s, elementwise.
void ema_update(Eigen::Ref<Eigen::VectorXd> teacher,
                const Eigen::Ref<const Eigen::VectorXd>& student, double decay);

}  // namespace janus
