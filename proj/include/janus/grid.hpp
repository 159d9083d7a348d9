#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace janus {

/// Orthogonal volume axes, in storage order (D outermost, W innermost).
enum class Axis : int { D = 0, H = 1, W = 2 };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::D: return "D";
    case Axis::H: return "H";
    default: return "W";
  }
}

inline Axis axis_from_name(const std::string& s) {
  if (s == "D" || s == "d") return Axis::D;
  if (s == "H" || s == "h") return Axis::H;
  if (s == "W" || s == "w") return Axis::W;
  throw std::invalid_argument("unknown axis name: " + s);
}

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Lattice extents (d,h,w), voxels. Storage is row-major (D,H,W).
struct Dims {
  int d = 0, h = 0, w = 0;

  std::int64_t voxels() const { return std::int64_t(d) * h * w; }
  int extent(Axis a) const { return a == Axis::D ? d : (a == Axis::H ? h : w); }
  int& extent(Axis a) { return a == Axis::D ? d : (a == Axis::H ? h : w); }
  bool operator==(const Dims&) const = default;

  std::int64_t index(int z, int y, int x) const {
    return (std::int64_t(z) * h + y) * w + x;
  }
  std::string str() const {
    return std::to_string(d) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }
};

/// Scalar field over a D×H×W lattice; the shared layout for all grid kinds.
template <typename T>
struct Grid {
  Dims dims;
  Eigen::Array<T, Eigen::Dynamic, 1> data;

  Grid() = default;
  Grid(Dims dm, T fill = T(0)) : dims(dm) {
    data.setConstant(dm.voxels(), fill);
  }

  T& at(int z, int y, int x) { return data[dims.index(z, y, x)]; }
  T at(int z, int y, int x) const { return data[dims.index(z, y, x)]; }
};

using VolumeGrid = Grid<float>;
using ConfidenceGrid = Grid<float>;
using SupervisionGrid = Grid<std::uint8_t>;

/// Per-voxel class ids in {0..num_classes-1}.
struct LabelGrid {
  Dims dims;
  int num_classes = 0;  // C+1 including background
  Eigen::Array<std::uint8_t, Eigen::Dynamic, 1> data;

  LabelGrid() = default;
  LabelGrid(Dims dm, int nc, std::uint8_t fill = 0) : dims(dm), num_classes(nc) {
    data.setConstant(dm.voxels(), fill);
  }

  std::uint8_t& at(int z, int y, int x) { return data[dims.index(z, y, x)]; }
  std::uint8_t at(int z, int y, int x) const { return data[dims.index(z, y, x)]; }
};

/// Per-voxel class probabilities, class dimension innermost.
struct ProbGrid {
  Dims dims;
  int num_classes = 0;
  Eigen::ArrayXd data;  // voxels * num_classes, class innermost

  ProbGrid() = default;
  ProbGrid(Dims dm, int nc) : dims(dm), num_classes(nc) {
    data.setZero(dm.voxels() * nc);
  }

  double& at(int z, int y, int x, int c) {
    return data[dims.index(z, y, x) * num_classes + c];
  }
  double at(int z, int y, int x, int c) const {
    return data[dims.index(z, y, x) * num_classes + c];
  }
};

/// B labeled pairs followed by B unlabeled volumes; merged labeled-first.
struct Batch {
  std::vector<std::pair<VolumeGrid, LabelGrid>> labeled;
  std::vector<VolumeGrid> unlabeled;
};

namespace detail {

// Per-voxel payload length (class dim for ProbGrid, 1 otherwise).
template <typename G>
inline int payload_size(const G&) { return 1; }
inline int payload_size(const ProbGrid& g) { return g.num_classes; }

template <typename G>
inline G make_like(const G& proto, Dims dims) {
  G out = proto;
  out.dims = dims;
  out.data.resize(dims.voxels() * payload_size(proto));
  return out;
}

// Copies the block [start, start+len) along `axis` of src into dst at
// dst_start. Cross-section extents of src and dst must already agree.
template <typename Arr>
void copy_block(const Dims& src_dims, const Arr& src, const Dims& dst_dims,
                Arr& dst, Axis axis, int src_start, int len, int dst_start,
                int payload) {
  Dims lo{0, 0, 0}, hi = src_dims;
  lo.extent(axis) = src_start;
  hi.extent(axis) = src_start + len;
  const int shift = dst_start - src_start;
  for (int z = lo.d; z < hi.d; ++z)
    for (int y = lo.h; y < hi.h; ++y)
      for (int x = lo.w; x < hi.w; ++x) {
        int dz = z, dy = y, dx = x;
        (axis == Axis::D ? dz : axis == Axis::H ? dy : dx) += shift;
        const auto si = src_dims.index(z, y, x) * payload;
        const auto di = dst_dims.index(dz, dy, dx) * payload;
        for (int c = 0; c < payload; ++c) dst[di + c] = src[si + c];
      }
}

}  // namespace detail

/// Contiguous sub-grid of thickness `len` along `axis`; other axes untouched.
template <typename G>
G slice_along(const G& g, Axis axis, int start, int len) {
  const int ext = g.dims.extent(axis);
  if (start < 0 || len < 0 || start + len > ext)
    throw RangeError("slice_along: [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of range on axis " +
                     axis_name(axis) + " with extent " + std::to_string(ext));
  Dims out_dims = g.dims;
  out_dims.extent(axis) = len;
  G out = detail::make_like(g, out_dims);
  detail::copy_block(g.dims, g.data, out_dims, out.data, axis, start, len, 0,
                     detail::payload_size(g));
  return out;
}

/// Concatenation along `axis`; inverse of slicing a partition.
template <typename G>
G concat_along(const std::vector<G>& blocks, Axis axis) {
  if (blocks.empty()) throw ShapeError("concat_along: empty block list");
  Dims out_dims = blocks.front().dims;
  out_dims.extent(axis) = 0;
  for (const G& b : blocks) {
    Dims cross = b.dims;
    cross.extent(axis) = 0;
    if (!(cross == out_dims))
      throw ShapeError("concat_along: cross-section mismatch, " +
                       b.dims.str() + " vs " + blocks.front().dims.str() +
                       " on axis " + axis_name(axis));
    out_dims.extent(axis) += b.dims.extent(axis);
  }
  G out = detail::make_like(blocks.front(), out_dims);
  int offset = 0;
  for (const G& b : blocks) {
    const int len = b.dims.extent(axis);
    detail::copy_block(b.dims, b.data, out_dims, out.data, axis, 0, len,
                       offset, detail::payload_size(b));
    offset += len;
  }
  return out;
}

}  // namespace janus
