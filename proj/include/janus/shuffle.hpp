#pragma once

#include <Eigen/Core>

#include <random>
#include <vector>

#include "janus/grid.hpp"

namespace janus {

/// Column-wise batch permutation: rows index the batch (2B), columns the
/// slice-block layers (N). Every column is a permutation of {0..2B-1}.
struct ShuffleMatrix {
  Eigen::MatrixXi m;

  int rows() const { return int(m.rows()); }
  int cols() const { return int(m.cols()); }
};

/// Column-wise inverse: entry (k,j) names the shuffled row whose block j
/// originated from batch member k, i.e. forward(inverse(k,j), j) == k.
struct InverseShuffleMatrix {
  Eigen::MatrixXi m;
};

/// Axis, thickness and permutation bookkeeping for one shuffle pass.
/// The same plan must be applied to images, labels and predictions.
struct ShufflePlan {
  Axis axis = Axis::D;
  int thickness = 0;  // p
  int n_blocks = 0;   // N, with p*N == batch extent along axis
  ShuffleMatrix matrix;
  InverseShuffleMatrix inverse;
};

Axis choose_axis(std::mt19937_64& rng);

ShuffleMatrix sample_shuffle_matrix(std::mt19937_64& rng, int batch_size,
                                    int n_blocks);

InverseShuffleMatrix invert(const ShuffleMatrix& matrix);

/// Draws a fresh permutation per layer and pairs it with its inverse.
/// `axis_extent` must be divisible by `thickness`.
ShufflePlan make_shuffle_plan(std::mt19937_64& rng, Axis axis, int axis_extent,
                              int thickness, int batch_size);

namespace detail {

template <typename G>
std::vector<G> permute_blocks(const std::vector<G>& grids,
                              const ShufflePlan& plan,
                              const Eigen::MatrixXi& rows) {
  const int batch = int(grids.size());
  if (batch != rows.rows())
    throw ShapeError("shuffle: batch size " + std::to_string(batch) +
                     " does not match matrix rows " +
                     std::to_string(rows.rows()));
  const Dims dims = grids.front().dims;
  for (const G& g : grids)
    if (!(g.dims == dims)) throw ShapeError("shuffle: mixed grid dims");
  if (dims.extent(plan.axis) != plan.thickness * plan.n_blocks)
    throw ShapeError("shuffle: extent " +
                     std::to_string(dims.extent(plan.axis)) + " on axis " +
                     axis_name(plan.axis) + " != p*N = " +
                     std::to_string(plan.thickness * plan.n_blocks));
  std::vector<G> out;
  out.reserve(batch);
  for (int i = 0; i < batch; ++i) {
    std::vector<G> blocks;
    blocks.reserve(plan.n_blocks);
    for (int j = 0; j < plan.n_blocks; ++j)
      blocks.push_back(slice_along(grids[size_t(rows(i, j))], plan.axis,
                                   j * plan.thickness, plan.thickness));
    out.push_back(concat_along(blocks, plan.axis));
  }
  return out;
}

}  // namespace detail

/// Output i, block j <- input matrix(i,j), block j. Blocks keep their layer
/// index, so only same-index mixing happens across the batch.
template <typename G>
std::vector<G> shuffle_batch(const std::vector<G>& grids,
                             const ShufflePlan& plan) {
  return detail::permute_blocks(grids, plan, plan.matrix.m);
}

/// Exact inverse of shuffle_batch under the same plan.
template <typename G>
std::vector<G> recover_batch(const std::vector<G>& grids,
                             const ShufflePlan& plan) {
  return detail::permute_blocks(grids, plan, plan.inverse.m);
}

/// Order-preserving split into (first B, last B).
template <typename G>
std::pair<std::vector<G>, std::vector<G>> split_batch(
    const std::vector<G>& grids) {
  if (grids.size() % 2 != 0)
    throw ShapeError("split_batch: odd batch length " +
                     std::to_string(grids.size()));
  const size_t half = grids.size() / 2;
  return {std::vector<G>(grids.begin(), grids.begin() + half),
          std::vector<G>(grids.begin() + half, grids.end())};
}

}  // namespace janus
