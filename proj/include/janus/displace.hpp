#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "janus/grid.hpp"

namespace janus {

/// Weak/strong views of B cases stacked along a stream dimension
/// (stream 0 = weak, 1 = strong). All grids share dims.
struct StreamStack {
  std::vector<std::array<VolumeGrid, 2>> volumes;
  std::vector<std::array<LabelGrid, 2>> labels;
  std::vector<std::array<ConfidenceGrid, 2>> confidence;
  std::vector<std::array<SupervisionGrid, 2>> supervision;

  int cases() const { return int(volumes.size()); }
};

/// Layer-and-grid addressing shared by every patch-indexed tensor:
/// N layers of thickness p along `axis`, an n×n tiling of the plane
/// orthogonal to it.
struct PatchGeometry {
  Axis axis = Axis::D;
  int thickness = 0;   // p
  int n_layers = 0;    // N
  int grid_n = 0;      // n
  Dims dims;
  int cases = 0;       // B

  Axis inplane_axis(int which) const {  // the two non-chosen axes, in order
    static constexpr Axis kOrder[3][2] = {{Axis::H, Axis::W},
                                          {Axis::D, Axis::W},
                                          {Axis::D, Axis::H}};
    return kOrder[int(axis)][which];
  }
  int tile(int which) const { return dims.extent(inplane_axis(which)) / grid_n; }
  std::int64_t patch_voxels() const {
    return std::int64_t(thickness) * tile(0) * tile(1);
  }
  std::int64_t slots() const {  // (b, stream, l, u, v) count
    return std::int64_t(cases) * 2 * n_layers * grid_n * grid_n;
  }
  std::int64_t slot(int b, int s, int l, int u, int v) const {
    return ((((std::int64_t(b) * 2 + s) * n_layers + l) * grid_n + u) *
            grid_n) + v;
  }
  /// Linear voxel indices of patch (l,u,v), in global row-major order.
  std::vector<std::int64_t> patch_indices(int l, int u, int v) const;
};

/// Patch-major copies of the stream stack (the Z_patch layout): unpatchify
/// reproduces the stack voxel-exactly.
struct PatchDecomposition {
  PatchGeometry geom;
  std::vector<float> volumes;          // slots * patch_voxels
  std::vector<std::uint8_t> labels;
  std::vector<float> confidence;
  std::vector<std::uint8_t> supervision;
  int num_classes = 0;
};

/// Per-patch confidence statistics and source/target eligibility masks,
/// indexed like the decomposition's slots.
struct PatchStats {
  PatchGeometry geom;
  std::vector<double> mean_conf;     // per (b,s,l,u,v)
  std::vector<std::uint8_t> has_gt;  // per (b,s,l,u,v)
  std::vector<std::uint8_t> is_high; // per (b,s,l,u,v); ties -> neither
  std::vector<std::uint8_t> src_mask;
  std::vector<std::uint8_t> tgt_mask;
};

/// Top-K gap locations per (b, layer); at most K true entries each.
struct SelectionMask {
  PatchGeometry geom;
  int budget = 0;                     // K
  std::vector<std::uint8_t> selected; // per (b,l,u,v)

  std::int64_t at(int b, int l, int u, int v) const {
    return ((std::int64_t(b) * geom.n_layers + l) * geom.grid_n + u) *
               geom.grid_n + v;
  }
};

/// Displaced streams folded into the batch as [b0-weak, b0-strong, b1-weak, ...].
struct DisplacedBatch {
  std::vector<VolumeGrid> volumes;          // 2B
  std::vector<LabelGrid> labels;            // 2B
  std::vector<SupervisionGrid> supervision; // 2B
  struct Swap { int b, l, u, v; };
  std::vector<Swap> swaps;
};

PatchDecomposition patchify(const StreamStack& stack, Axis axis, int thickness,
                            int grid_n);
StreamStack unpatchify(const PatchDecomposition& dec);

PatchStats compute_stats(const PatchDecomposition& dec);

/// |mean_conf(weak) - mean_conf(strong)| per (b,l,u,v).
std::vector<double> confidence_gap(const PatchStats& stats);

/// Ties broken by smallest linear in-plane index u*n+v.
SelectionMask topk_select(const std::vector<double>& gaps,
                          const PatchGeometry& geom, int budget);

/// Y* = G odot Y + (1-G) odot Y_tilde, voxelwise.
LabelGrid composite_labels(const LabelGrid& truth, const SupervisionGrid& sup,
                           const LabelGrid& pseudo);

/// Swaps image, label and supervision patches between the two streams at
/// every selected location where one stream is source and the other target.
DisplacedBatch displace(const PatchDecomposition& dec, const PatchStats& stats,
                        const SelectionMask& sel);

}  // namespace janus
