#include "janus/shuffle.hpp"

#include <algorithm>
#include <numeric>

namespace janus {

Axis choose_axis(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, 2);
  return Axis(dist(rng));
}

ShuffleMatrix sample_shuffle_matrix(std::mt19937_64& rng, int batch_size,
                                    int n_blocks) {
  ShuffleMatrix out;
  out.m.resize(batch_size, n_blocks);
  std::vector<int> perm(size_t(batch_size));
  for (int j = 0; j < n_blocks; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < batch_size; ++i) out.m(i, j) = perm[size_t(i)];
  }
  return out;
}

InverseShuffleMatrix invert(const ShuffleMatrix& matrix) {
  InverseShuffleMatrix inv;
  inv.m.setConstant(matrix.m.rows(), matrix.m.cols(), -1);
  for (int j = 0; j < matrix.m.cols(); ++j)
    for (int i = 0; i < matrix.m.rows(); ++i) {
      const int k = matrix.m(i, j);
      if (k < 0 || k >= matrix.m.rows() || inv.m(k, j) != -1)
        throw ShapeError("invert: column " + std::to_string(j) +
                         " is not a permutation");
      inv.m(k, j) = i;
    }
  return inv;
}

ShufflePlan make_shuffle_plan(std::mt19937_64& rng, Axis axis, int axis_extent,
                              int thickness, int batch_size) {
  if (thickness <= 0 || axis_extent % thickness != 0)
    throw ShapeError("make_shuffle_plan: p=" + std::to_string(thickness) +
                     " does not divide L_" + axis_name(axis) + "=" +
                     std::to_string(axis_extent));
  ShufflePlan plan;
  plan.axis = axis;
  plan.thickness = thickness;
  plan.n_blocks = axis_extent / thickness;
  plan.matrix = sample_shuffle_matrix(rng, batch_size, plan.n_blocks);
  plan.inverse = invert(plan.matrix);
  return plan;
}

}  // namespace janus
