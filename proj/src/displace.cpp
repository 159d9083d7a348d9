#include "janus/displace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace janus {

std::vector<std::int64_t> PatchGeometry::patch_indices(int l, int u,
                                                       int v) const {
  Dims lo{0, 0, 0}, hi{0, 0, 0};
  lo.extent(axis) = l * thickness;
  hi.extent(axis) = (l + 1) * thickness;
  lo.extent(inplane_axis(0)) = u * tile(0);
  hi.extent(inplane_axis(0)) = (u + 1) * tile(0);
  lo.extent(inplane_axis(1)) = v * tile(1);
  hi.extent(inplane_axis(1)) = (v + 1) * tile(1);
  std::vector<std::int64_t> idx;
  idx.reserve(size_t(patch_voxels()));
  for (int z = lo.d; z < hi.d; ++z)
    for (int y = lo.h; y < hi.h; ++y)
      for (int x = lo.w; x < hi.w; ++x) idx.push_back(dims.index(z, y, x));
  return idx;
}

namespace {

PatchGeometry make_geometry(const StreamStack& stack, Axis axis, int thickness,
                            int grid_n) {
  if (stack.cases() == 0) throw ShapeError("patchify: empty stream stack");
  PatchGeometry g;
  g.axis = axis;
  g.thickness = thickness;
  g.grid_n = grid_n;
  g.dims = stack.volumes.front()[0].dims;
  g.cases = stack.cases();
  const int ext = g.dims.extent(axis);
  if (thickness <= 0 || ext % thickness != 0)
    throw ShapeError("patchify: p=" + std::to_string(thickness) +
                     " does not divide extent " + std::to_string(ext) +
                     " on axis " + axis_name(axis));
  g.n_layers = ext / thickness;
  for (int which = 0; which < 2; ++which) {
    const int e = g.dims.extent(g.inplane_axis(which));
    if (grid_n <= 0 || e % grid_n != 0)
      throw ShapeError("patchify: n=" + std::to_string(grid_n) +
                       " does not divide extent " + std::to_string(e) +
                       " on axis " + axis_name(g.inplane_axis(which)));
  }
  return g;
}

template <typename Store, typename GridT>
void gather(const PatchGeometry& g, Store& store,
            const std::vector<std::array<GridT, 2>>& grids) {
  store.resize(size_t(g.slots() * g.patch_voxels()));
  for (int l = 0; l < g.n_layers; ++l)
    for (int u = 0; u < g.grid_n; ++u)
      for (int v = 0; v < g.grid_n; ++v) {
        const auto idx = g.patch_indices(l, u, v);
        for (int b = 0; b < g.cases; ++b)
          for (int s = 0; s < 2; ++s) {
            auto* dst = store.data() + g.slot(b, s, l, u, v) * g.patch_voxels();
            const auto& src = grids[size_t(b)][size_t(s)].data;
            for (size_t k = 0; k < idx.size(); ++k)
              dst[k] = src[idx[k]];
          }
      }
}

template <typename Store, typename GridT>
void scatter(const PatchGeometry& g, const Store& store,
             std::vector<std::array<GridT, 2>>& grids) {
  for (int l = 0; l < g.n_layers; ++l)
    for (int u = 0; u < g.grid_n; ++u)
      for (int v = 0; v < g.grid_n; ++v) {
        const auto idx = g.patch_indices(l, u, v);
        for (int b = 0; b < g.cases; ++b)
          for (int s = 0; s < 2; ++s) {
            const auto* src =
                store.data() + g.slot(b, s, l, u, v) * g.patch_voxels();
            auto& dst = grids[size_t(b)][size_t(s)].data;
            for (size_t k = 0; k < idx.size(); ++k)
              dst[idx[k]] = src[k];
          }
      }
}

void check_stack(const StreamStack& stack) {
  const Dims dims = stack.volumes.front()[0].dims;
  const size_t n = stack.volumes.size();
  if (stack.labels.size() != n || stack.confidence.size() != n ||
      stack.supervision.size() != n)
    throw ShapeError("stream stack: component counts differ");
  for (size_t b = 0; b < n; ++b)
    for (int s = 0; s < 2; ++s)
      if (!(stack.volumes[b][size_t(s)].dims == dims) ||
          !(stack.labels[b][size_t(s)].dims == dims) ||
          !(stack.confidence[b][size_t(s)].dims == dims) ||
          !(stack.supervision[b][size_t(s)].dims == dims))
        throw ShapeError("stream stack: mixed grid dims");
}

}  // namespace

PatchDecomposition patchify(const StreamStack& stack, Axis axis, int thickness,
                            int grid_n) {
  check_stack(stack);
  PatchDecomposition dec;
  dec.geom = make_geometry(stack, axis, thickness, grid_n);
  dec.num_classes = stack.labels.front()[0].num_classes;
  gather(dec.geom, dec.volumes, stack.volumes);
  gather(dec.geom, dec.labels, stack.labels);
  gather(dec.geom, dec.confidence, stack.confidence);
  gather(dec.geom, dec.supervision, stack.supervision);
  return dec;
}

StreamStack unpatchify(const PatchDecomposition& dec) {
  const PatchGeometry& g = dec.geom;
  StreamStack out;
  out.volumes.assign(size_t(g.cases), {VolumeGrid(g.dims), VolumeGrid(g.dims)});
  out.labels.assign(size_t(g.cases), {LabelGrid(g.dims, dec.num_classes),
                                      LabelGrid(g.dims, dec.num_classes)});
  out.confidence.assign(size_t(g.cases),
                        {ConfidenceGrid(g.dims), ConfidenceGrid(g.dims)});
  out.supervision.assign(size_t(g.cases),
                         {SupervisionGrid(g.dims), SupervisionGrid(g.dims)});
  scatter(g, dec.volumes, out.volumes);
  scatter(g, dec.labels, out.labels);
  scatter(g, dec.confidence, out.confidence);
  scatter(g, dec.supervision, out.supervision);
  return out;
}

PatchStats compute_stats(const PatchDecomposition& dec) {
  const PatchGeometry& g = dec.geom;
  PatchStats st;
  st.geom = g;
  const auto slots = size_t(g.slots());
  st.mean_conf.assign(slots, 0.0);
  st.has_gt.assign(slots, 0);
  st.is_high.assign(slots, 0);
  st.src_mask.assign(slots, 0);
  st.tgt_mask.assign(slots, 0);
  const auto pv = g.patch_voxels();
  for (size_t i = 0; i < slots; ++i) {
    double acc = 0.0;
    bool gt = false;
    const auto off = std::int64_t(i) * pv;
    for (std::int64_t k = 0; k < pv; ++k) {
      acc += dec.confidence[size_t(off + k)];
      gt = gt || dec.supervision[size_t(off + k)] != 0;
    }
    st.mean_conf[i] = acc / double(pv);
    st.has_gt[i] = gt ? 1 : 0;
  }
  for (int b = 0; b < g.cases; ++b)
    for (int l = 0; l < g.n_layers; ++l)
      for (int u = 0; u < g.grid_n; ++u)
        for (int v = 0; v < g.grid_n; ++v) {
          const auto weak = size_t(g.slot(b, 0, l, u, v));
          const auto strong = size_t(g.slot(b, 1, l, u, v));
          // Strictly-greater comparison: an exact tie leaves both low.
          if (st.mean_conf[weak] > st.mean_conf[strong])
            st.is_high[weak] = 1;
          else if (st.mean_conf[strong] > st.mean_conf[weak])
            st.is_high[strong] = 1;
          for (size_t i : {weak, strong}) {
            const bool high = st.is_high[i] != 0;
            const bool gt = st.has_gt[i] != 0;
            st.src_mask[i] = ((!high && gt) || (high && !gt)) ? 1 : 0;
            st.tgt_mask[i] = ((high && gt) || (!high && !gt)) ? 1 : 0;
          }
        }
  return st;
}

std::vector<double> confidence_gap(const PatchStats& stats) {
  const PatchGeometry& g = stats.geom;
  std::vector<double> gaps(size_t(g.slots() / 2));
  size_t out = 0;
  for (int b = 0; b < g.cases; ++b)
    for (int l = 0; l < g.n_layers; ++l)
      for (int u = 0; u < g.grid_n; ++u)
        for (int v = 0; v < g.grid_n; ++v)
          gaps[out++] =
              std::abs(stats.mean_conf[size_t(g.slot(b, 0, l, u, v))] -
                       stats.mean_conf[size_t(g.slot(b, 1, l, u, v))]);
  return gaps;
}

SelectionMask topk_select(const std::vector<double>& gaps,
                          const PatchGeometry& geom, int budget) {
  if (budget < 1) throw ShapeError("topk_select: K must be >= 1");
  SelectionMask sel;
  sel.geom = geom;
  sel.budget = budget;
  sel.selected.assign(gaps.size(), 0);
  const int plane = geom.grid_n * geom.grid_n;
  std::vector<int> order(size_t(plane));
  for (int b = 0; b < geom.cases; ++b)
    for (int l = 0; l < geom.n_layers; ++l) {
      const auto base = size_t((std::int64_t(b) * geom.n_layers + l) * plane);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
        if (gaps[base + size_t(lhs)] != gaps[base + size_t(rhs)])
          return gaps[base + size_t(lhs)] > gaps[base + size_t(rhs)];
        return lhs < rhs;
      });
      for (int k = 0; k < std::min(budget, plane); ++k)
        sel.selected[base + size_t(order[size_t(k)])] = 1;
    }
  return sel;
}

LabelGrid composite_labels(const LabelGrid& truth, const SupervisionGrid& sup,
                           const LabelGrid& pseudo) {
  if (!(truth.dims == sup.dims) || !(truth.dims == pseudo.dims))
    throw ShapeError("composite_labels: dims mismatch");
  LabelGrid out = truth;
  for (std::int64_t i = 0; i < out.data.size(); ++i)
    if (sup.data[i] == 0) out.data[i] = pseudo.data[i];
  return out;
}

DisplacedBatch displace(const PatchDecomposition& dec, const PatchStats& stats,
                        const SelectionMask& sel) {
  const PatchGeometry& g = dec.geom;
  if (!(stats.geom.dims == g.dims) || stats.geom.cases != g.cases ||
      stats.geom.n_layers != g.n_layers || stats.geom.grid_n != g.grid_n ||
      !(sel.geom.dims == g.dims) || sel.geom.cases != g.cases ||
      sel.geom.n_layers != g.n_layers || sel.geom.grid_n != g.grid_n)
    throw ShapeError("displace: stats/selection from a different decomposition");

  PatchDecomposition work = dec;
  DisplacedBatch out;
  const auto pv = g.patch_voxels();
  for (int b = 0; b < g.cases; ++b)
    for (int l = 0; l < g.n_layers; ++l)
      for (int u = 0; u < g.grid_n; ++u)
        for (int v = 0; v < g.grid_n; ++v) {
          if (!sel.selected[size_t(sel.at(b, l, u, v))]) continue;
          const auto weak = size_t(g.slot(b, 0, l, u, v));
          const auto strong = size_t(g.slot(b, 1, l, u, v));
          const bool pair =
              (stats.src_mask[weak] && stats.tgt_mask[strong]) ||
              (stats.src_mask[strong] && stats.tgt_mask[weak]);
          if (!pair) continue;
          const auto wo = std::int64_t(weak) * pv, so = std::int64_t(strong) * pv;
          std::swap_ranges(work.volumes.begin() + wo,
                           work.volumes.begin() + wo + pv,
                           work.volumes.begin() + so);
          std::swap_ranges(work.labels.begin() + wo,
                           work.labels.begin() + wo + pv,
                           work.labels.begin() + so);
          std::swap_ranges(work.supervision.begin() + wo,
                           work.supervision.begin() + wo + pv,
                           work.supervision.begin() + so);
          out.swaps.push_back({b, l, u, v});
        }

  const StreamStack folded = unpatchify(work);
  for (int b = 0; b < g.cases; ++b)
    for (int s = 0; s < 2; ++s) {
      out.volumes.push_back(folded.volumes[size_t(b)][size_t(s)]);
      out.labels.push_back(folded.labels[size_t(b)][size_t(s)]);
      out.supervision.push_back(folded.supervision[size_t(b)][size_t(s)]);
    }
  return out;
}

}  // namespace janus
