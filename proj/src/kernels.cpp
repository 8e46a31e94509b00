#include "sdcnn/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <string>

namespace sdcnn {
namespace {

// Columns are processed in blocks sized so the unfolded patch matrix stays
// cache resident. A block may span several samples of a batch.
#ifndef SDCNN_COLUMN_BUDGET
#define SDCNN_COLUMN_BUDGET (1 << 19)
#endif
constexpr int kColumnBudget = SDCNN_COLUMN_BUDGET;  // elements of the patch matrix
constexpr int kMinColumns = 64;

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// Geometry of a strided convolution from a "wide" grid (wide_h x wide_w) to a
// "narrow" grid (narrow_h x narrow_w), repeated over `batch` samples.
// Convolution reads wide and writes narrow; its transpose does the opposite
// over the same index map.
struct Geometry {
  int batch;
  int channels;
  int wide_h, wide_w;
  int narrow_h, narrow_w;
  int kernel, stride, pad;

  int rows() const { return channels * kernel * kernel; }
  int positions() const { return narrow_h * narrow_w; }
  std::size_t wide_plane() const { return static_cast<std::size_t>(wide_h) * wide_w; }
  std::size_t columns() const { return static_cast<std::size_t>(batch) * positions(); }
};

// A run of consecutive columns that stays inside one sample.
struct Segment {
  int sample;
  int first;   // narrow position inside the sample
  int count;
  int offset;  // column inside the block
};

template <typename F>
void for_each_segment(const Geometry& g, std::size_t first, int count, F&& f) {
  const auto positions = static_cast<std::size_t>(g.positions());
  int offset = 0;
  while (offset < count) {
    const std::size_t column = first + static_cast<std::size_t>(offset);
    const int sample = static_cast<int>(column / positions);
    const int pos = static_cast<int>(column % positions);
    const int n = std::min(count - offset, g.positions() - pos);
    f(Segment{sample, pos, n, offset});
    offset += n;
  }
}

// The wide grid with `pad` zeros on every side, so taps never leave it.
struct Padded {
  int h, w;
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
};

Padded padded_of(const Geometry& g) { return {g.wide_h + 2 * g.pad, g.wide_w + 2 * g.pad}; }

// Per-thread buffers reused across calls; fresh multi-megabyte allocations
// cost more in page faults than the arithmetic they feed.
template <typename T>
struct Workspace {
  std::vector<T> padded, d_padded, col, aux;
};

template <typename T>
Workspace<T>& workspace() {
  thread_local Workspace<T> ws;
  return ws;
}

template <typename T>
void pad_planes(const T* wide, const Geometry& g, std::vector<T>& out) {
  const Padded pd = padded_of(g);
  const std::size_t planes = static_cast<std::size_t>(g.batch) * g.channels;
  out.assign(planes * pd.plane(), T{0});
  for (std::size_t c = 0; c < planes; ++c) {
    for (int y = 0; y < g.wide_h; ++y) {
      const T* src = wide + c * g.wide_plane() + static_cast<std::size_t>(y) * g.wide_w;
      std::copy(src, src + g.wide_w, out.data() + c * pd.plane() + static_cast<std::size_t>(y + g.pad) * pd.w + g.pad);
    }
  }
}

template <typename T>
void crop_add(const std::vector<T>& padded, const Geometry& g, T* wide) {
  const Padded pd = padded_of(g);
  const std::size_t planes = static_cast<std::size_t>(g.batch) * g.channels;
  for (std::size_t c = 0; c < planes; ++c) {
    for (int y = 0; y < g.wide_h; ++y) {
      const T* src = padded.data() + c * pd.plane() + static_cast<std::size_t>(y + g.pad) * pd.w + g.pad;
      T* dst = wide + c * g.wide_plane() + static_cast<std::size_t>(y) * g.wide_w;
      for (int x = 0; x < g.wide_w; ++x) dst[x] += src[x];
    }
  }
}

// Calls f(p, n, src_offset) for each narrow row of the segment: positions
// p .. p+n-1 of the segment read padded element src_offset + q * stride for
// tap (0, 0) of channel 0.
template <typename F>
void for_each_run(const Geometry& g, const Padded& pd, const Segment& s, F&& f) {
  int p = 0;
  int y = s.first / g.narrow_w;
  int x = s.first % g.narrow_w;
  const std::size_t sample = static_cast<std::size_t>(s.sample) * g.channels * pd.plane();
  while (p < s.count) {
    const int n = std::min(s.count - p, g.narrow_w - x);
    f(p, n, sample + static_cast<std::size_t>(y) * g.stride * pd.w + static_cast<std::size_t>(x) * g.stride);
    p += n;
    x = 0;
    ++y;
  }
}

// Unfold the block's columns of a padded grid into a rows() x count matrix.
template <typename T>
void unfold(const std::vector<T>& padded, const Geometry& g, std::size_t first, int count, T* col) {
  const Padded pd = padded_of(g);
  for_each_segment(g, first, count, [&](const Segment& s) {
    for_each_run(g, pd, s, [&](int p, int n, std::size_t base) {
      for (int c = 0; c < g.channels; ++c) {
        for (int i = 0; i < g.kernel; ++i) {
          for (int j = 0; j < g.kernel; ++j) {
            const int r = (c * g.kernel + i) * g.kernel + j;
            T* dst = col + static_cast<std::size_t>(r) * count + s.offset + p;
            const T* src = padded.data() + base + c * pd.plane() + static_cast<std::size_t>(i) * pd.w + j;
            if (g.stride == 1) {
              std::copy(src, src + n, dst);
            } else {
              for (int q = 0; q < n; ++q) dst[q] = src[q * g.stride];
            }
          }
        }
      }
    });
  });
}

template <typename T>
void add_run(const T* __restrict src, T* __restrict dst, int n) {
  for (int q = 0; q < n; ++q) dst[q] += src[q];
}

// Adjoint of unfold: accumulate the column matrix onto a padded grid.
template <typename T>
void fold_add(const T* col, const Geometry& g, std::size_t first, int count, std::vector<T>& padded) {
  const Padded pd = padded_of(g);
  for_each_segment(g, first, count, [&](const Segment& s) {
    for_each_run(g, pd, s, [&](int p, int n, std::size_t base) {
      for (int c = 0; c < g.channels; ++c) {
        for (int i = 0; i < g.kernel; ++i) {
          for (int j = 0; j < g.kernel; ++j) {
            const int r = (c * g.kernel + i) * g.kernel + j;
            const T* src = col + static_cast<std::size_t>(r) * count + s.offset + p;
            T* dst = padded.data() + base + c * pd.plane() + static_cast<std::size_t>(i) * pd.w + j;
            if (g.stride == 1) {
              add_run(src, dst, n);
            } else {
              for (int q = 0; q < n; ++q) dst[q * g.stride] += src[q];
            }
          }
        }
      }
    });
  });
}

// Copy the block's columns of a [N, rows, positions] tensor into a
// rows x count matrix, or back.
template <typename T>
void gather_columns(const T* src, const Geometry& g, int rows, std::size_t first, int count, T* dst) {
  const auto positions = static_cast<std::size_t>(g.positions());
  for_each_segment(g, first, count, [&](const Segment& s) {
    for (int r = 0; r < rows; ++r) {
      const T* from = src + (static_cast<std::size_t>(s.sample) * rows + r) * positions + s.first;
      std::copy(from, from + s.count, dst + static_cast<std::size_t>(r) * count + s.offset);
    }
  });
}

template <typename T>
void scatter_columns(const T* src, const Geometry& g, int rows, std::size_t first, int count, T* dst) {
  const auto positions = static_cast<std::size_t>(g.positions());
  for_each_segment(g, first, count, [&](const Segment& s) {
    for (int r = 0; r < rows; ++r) {
      const T* from = src + static_cast<std::size_t>(r) * count + s.offset;
      std::copy(from, from + s.count, dst + (static_cast<std::size_t>(s.sample) * rows + r) * positions + s.first);
    }
  });
}

void check_window(int kernel, int stride, int pad, const char* op) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, std::string(op) + ": kernel must be odd, got " + std::to_string(kernel));
  }
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, std::string(op) + ": stride must be positive");
  if (pad < 0 || pad >= kernel) {
    throw Error(ErrorKind::InvalidArgument, std::string(op) + ": pad must lie in [0, kernel)");
  }
}

// [C,H,W] is a batch of one; [N,C,H,W] is a batch of N.
struct Batch {
  int n, c, h, w;
};

template <typename T>
Batch batch_of(const BasicTensor<T>& t) {
  const Shape& s = t.shape();
  if (s.rank() == 3) return {1, s[0], s[1], s[2]};
  return {s[0], s[1], s[2], s[3]};
}

Shape shape_like(const Shape& input, int c, int h, int w) {
  return input.rank() == 3 ? Shape{c, h, w} : Shape{input[0], c, h, w};
}

template <typename T>
void check_operands(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>* bias,
                    bool transposed, const char* op) {
  if (input.shape().rank() != 3 && input.shape().rank() != 4) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(op) + ": input must be [C,H,W] or [N,C,H,W], got " + input.shape().to_string());
  }
  const Shape& w = weights.shape();
  if (w.rank() != 4 || w[2] != w[3]) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": weights must be [*,*,k,k], got " + w.to_string());
  }
  const int in_axis = transposed ? 0 : 1;
  const int channels = batch_of(input).c;
  if (w[in_axis] != channels) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": input " + input.shape().to_string() + " has " +
                                              std::to_string(channels) + " channels but weights " + w.to_string() +
                                              " expect " + std::to_string(w[in_axis]));
  }
  if (bias) {
    const int out_channels = w[transposed ? 1 : 0];
    if (bias->shape() != Shape{out_channels}) {
      throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": bias " + bias->shape().to_string() +
                                                " does not match weights " + w.to_string());
    }
  }
}

template <typename T>
void add_bias(BasicTensor<T>& out, const BasicTensor<T>& bias) {
  const Batch b = batch_of(out);
  const std::size_t plane = static_cast<std::size_t>(b.h) * b.w;
  T* p = out.data();
  for (int n = 0; n < b.n; ++n) {
    for (int o = 0; o < b.c; ++o) {
      const T v = bias[static_cast<std::size_t>(o)];
      for (std::size_t i = 0; i < plane; ++i) *p++ += v;
    }
  }
}

template <typename T>
BasicTensor<T> channel_sums(const BasicTensor<T>& t) {
  const Batch b = batch_of(t);
  BasicTensor<T> sums(Shape{b.c});
  const std::size_t plane = static_cast<std::size_t>(b.h) * b.w;
  const T* p = t.data();
  for (int n = 0; n < b.n; ++n) {
    for (int o = 0; o < b.c; ++o) {
      T acc{0};
      for (std::size_t i = 0; i < plane; ++i) acc += *p++;
      sums[static_cast<std::size_t>(o)] += acc;
    }
  }
  return sums;
}

template <typename F>
void for_each_block(const Geometry& g, F&& f) {
  const std::size_t total = g.columns();
  const auto block = static_cast<std::size_t>(std::max(kMinColumns, kColumnBudget / g.rows()));
  for (std::size_t first = 0; first < total; first += block) {
    f(first, static_cast<int>(std::min(block, total - first)));
  }
}

Geometry conv_geometry(const Batch& in, int k, int stride, int pad) {
  return {in.n, in.c, in.h, in.w, conv_output_extent(in.h, k, stride, pad), conv_output_extent(in.w, k, stride, pad),
          k, stride, pad};
}

Geometry deconv_geometry(const Batch& in, int out_channels, int k, int stride, int pad, const char* op) {
  const int out_h = deconv_output_extent(in.h, k, stride, pad);
  const int out_w = deconv_output_extent(in.w, k, stride, pad);
  if (out_h < 1 || out_w < 1) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": empty output for a " + std::to_string(in.h) + "x" +
                                              std::to_string(in.w) + " input");
  }
  return {in.n, out_channels, out_h, out_w, in.h, in.w, k, stride, pad};
}

template <typename T>
void check_d_output(const BasicTensor<T>& d_output, const Shape& expected, const char* op) {
  if (d_output.shape() != expected) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": d_output " + d_output.shape().to_string() +
                                              " does not match forward output " + expected.to_string());
  }
}

}  // namespace

int conv_output_extent(int extent, int kernel, int stride, int pad) {
  const int span = extent + 2 * pad - kernel;
  if (span < 0) {
    throw Error(ErrorKind::ShapeMismatch, "convolution window " + std::to_string(kernel) + " exceeds padded extent " +
                                              std::to_string(extent + 2 * pad));
  }
  return span / stride + 1;
}

int deconv_output_extent(int extent, int kernel, int stride, int pad) {
  return (extent - 1) * stride - 2 * pad + kernel + (stride - 1);
}

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                              const BasicTensor<T>& bias, int stride, int pad) {
  check_operands(input, weights, &bias, false, "conv2d_forward");
  const int k = weights.shape()[2];
  check_window(k, stride, pad, "conv2d_forward");
  const int out_channels = weights.shape()[0];
  const Geometry g = conv_geometry(batch_of(input), k, stride, pad);
  BasicTensor<T> out(shape_like(input.shape(), out_channels, g.narrow_h, g.narrow_w));
  ConstMatrixMap<T> w(weights.data(), out_channels, g.rows());
  auto& [padded, unused, col, result] = workspace<T>();
  pad_planes(input.data(), g, padded);
  for_each_block(g, [&](std::size_t first, int count) {
    col.resize(static_cast<std::size_t>(g.rows()) * count);
    result.resize(static_cast<std::size_t>(out_channels) * count);
    unfold(padded, g, first, count, col.data());
    MatrixMap<T>(result.data(), out_channels, count).noalias() = w * ConstMatrixMap<T>(col.data(), g.rows(), count);
    scatter_columns(result.data(), g, out_channels, first, count, out.data());
  });
  add_bias(out, bias);
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights, int stride, int pad,
                             const BasicTensor<T>& d_output, bool want_input_grad) {
  check_operands<T>(input, weights, nullptr, false, "conv2d_backward");
  const int k = weights.shape()[2];
  check_window(k, stride, pad, "conv2d_backward");
  const int out_channels = weights.shape()[0];
  const Geometry g = conv_geometry(batch_of(input), k, stride, pad);
  check_d_output(d_output, shape_like(input.shape(), out_channels, g.narrow_h, g.narrow_w), "conv2d_backward");
  ConvGrads<T> grads;
  grads.d_weights = BasicTensor<T>(weights.shape());
  grads.d_bias = channel_sums(d_output);
  if (want_input_grad) grads.d_input = BasicTensor<T>(input.shape());

  ConstMatrixMap<T> w(weights.data(), out_channels, g.rows());
  MatrixMap<T> dw(grads.d_weights.data(), out_channels, g.rows());
  auto& [padded, d_padded, col, dout] = workspace<T>();
  pad_planes(input.data(), g, padded);
  if (want_input_grad) d_padded.assign(padded.size(), T{0});
  for_each_block(g, [&](std::size_t first, int count) {
    col.resize(static_cast<std::size_t>(g.rows()) * count);
    dout.resize(static_cast<std::size_t>(out_channels) * count);
    gather_columns(d_output.data(), g, out_channels, first, count, dout.data());
    unfold(padded, g, first, count, col.data());
    ConstMatrixMap<T> d(dout.data(), out_channels, count);
    MatrixMap<T> cols(col.data(), g.rows(), count);
    dw.noalias() += d * cols.transpose();
    if (want_input_grad) {
      cols.noalias() = w.transpose() * d;
      fold_add(col.data(), g, first, count, d_padded);
    }
  });
  if (want_input_grad) crop_add(d_padded, g, grads.d_input.data());
  return grads;
}

template <typename T>
BasicTensor<T> deconv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                const BasicTensor<T>& bias, int stride, int pad) {
  check_operands(input, weights, &bias, true, "deconv2d_forward");
  const int k = weights.shape()[2];
  check_window(k, stride, pad, "deconv2d_forward");
  const int out_channels = weights.shape()[1];
  const Batch in = batch_of(input);
  const Geometry g = deconv_geometry(in, out_channels, k, stride, pad, "deconv2d_forward");
  BasicTensor<T> out(shape_like(input.shape(), out_channels, g.wide_h, g.wide_w));
  ConstMatrixMap<T> w(weights.data(), in.c, g.rows());
  auto& [padded, unused, col, src] = workspace<T>();
  padded.assign(static_cast<std::size_t>(g.batch) * g.channels * padded_of(g).plane(), T{0});
  for_each_block(g, [&](std::size_t first, int count) {
    col.resize(static_cast<std::size_t>(g.rows()) * count);
    src.resize(static_cast<std::size_t>(in.c) * count);
    gather_columns(input.data(), g, in.c, first, count, src.data());
    MatrixMap<T>(col.data(), g.rows(), count).noalias() = w.transpose() * ConstMatrixMap<T>(src.data(), in.c, count);
    fold_add(col.data(), g, first, count, padded);
  });
  crop_add(padded, g, out.data());
  add_bias(out, bias);
  return out;
}

template <typename T>
ConvGrads<T> deconv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights, int stride, int pad,
                               const BasicTensor<T>& d_output, bool want_input_grad) {
  check_operands<T>(input, weights, nullptr, true, "deconv2d_backward");
  const int k = weights.shape()[2];
  check_window(k, stride, pad, "deconv2d_backward");
  const int out_channels = weights.shape()[1];
  const Batch in = batch_of(input);
  const Geometry g = deconv_geometry(in, out_channels, k, stride, pad, "deconv2d_backward");
  check_d_output(d_output, shape_like(input.shape(), out_channels, g.wide_h, g.wide_w), "deconv2d_backward");
  ConvGrads<T> grads;
  grads.d_weights = BasicTensor<T>(weights.shape());
  grads.d_bias = channel_sums(d_output);
  if (want_input_grad) grads.d_input = BasicTensor<T>(input.shape());

  ConstMatrixMap<T> w(weights.data(), in.c, g.rows());
  MatrixMap<T> dw(grads.d_weights.data(), in.c, g.rows());
  auto& [padded, din, col, src] = workspace<T>();
  pad_planes(d_output.data(), g, padded);
  for_each_block(g, [&](std::size_t first, int count) {
    col.resize(static_cast<std::size_t>(g.rows()) * count);
    src.resize(static_cast<std::size_t>(in.c) * count);
    unfold(padded, g, first, count, col.data());
    gather_columns(input.data(), g, in.c, first, count, src.data());
    ConstMatrixMap<T> cols(col.data(), g.rows(), count);
    dw.noalias() += ConstMatrixMap<T>(src.data(), in.c, count) * cols.transpose();
    if (want_input_grad) {
      din.resize(static_cast<std::size_t>(in.c) * count);
      MatrixMap<T>(din.data(), in.c, count).noalias() = w * cols;
      scatter_columns(din.data(), g, in.c, first, count, grads.d_input.data());
    }
  });
  return grads;
}

template <typename T>
ReluResult<T> relu(const BasicTensor<T>& input) {
  ReluResult<T> r{input, std::vector<std::uint8_t>(input.size())};
  for (std::size_t i = 0; i < input.size(); ++i) {
    const bool on = input[i] > T{0};
    r.mask[i] = on ? 1 : 0;
    if (!on) r.output[i] = T{0};
  }
  return r;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& d_output, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != d_output.size()) {
    throw Error(ErrorKind::ShapeMismatch, "relu_backward: mask has " + std::to_string(mask.size()) +
                                              " entries, gradient has " + std::to_string(d_output.size()));
  }
  BasicTensor<T> d_input = d_output;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) d_input[i] = T{0};
  }
  return d_input;
}

template <typename T>
void relu_inplace(BasicTensor<T>& values) {
  for (T& v : values.values()) v = v > T{0} ? v : T{0};
}

template <typename T>
void relu_backward_inplace(BasicTensor<T>& gradient, const BasicTensor<T>& pre_activation) {
  if (gradient.shape() != pre_activation.shape()) {
    throw Error(ErrorKind::ShapeMismatch, "relu_backward: gradient " + gradient.shape().to_string() +
                                              " vs activation " + pre_activation.shape().to_string());
  }
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    if (!(pre_activation[i] > T{0})) gradient[i] = T{0};
  }
}

#define SDCNN_INSTANTIATE(T)                                                                                    \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                         int, int);                                                             \
  template ConvGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, int, int,                 \
                                        const BasicTensor<T>&, bool);                                           \
  template BasicTensor<T> deconv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                           int, int);                                                           \
  template ConvGrads<T> deconv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, int, int,               \
                                          const BasicTensor<T>&, bool);                                         \
  template ReluResult<T> relu(const BasicTensor<T>&);                                                           \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&, const std::vector<std::uint8_t>&);               \
  template void relu_inplace(BasicTensor<T>&);                                                                  \
  template void relu_backward_inplace(BasicTensor<T>&, const BasicTensor<T>&);

SDCNN_INSTANTIATE(float)
SDCNN_INSTANTIATE(double)

#undef SDCNN_INSTANTIATE

}  // namespace sdcnn
