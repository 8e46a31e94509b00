#pragma once

#include <cstdint>
#include <vector>

#include "sdcnn/tensor.hpp"

namespace sdcnn {

template <typename T>
struct ConvGrads {
  BasicTensor<T> d_input;  // empty when the caller did not ask for it
  BasicTensor<T> d_weights;
  BasicTensor<T> d_bias;
};

// Output extent of a strided convolution over `extent` input samples.
int conv_output_extent(int extent, int kernel, int stride, int pad);
// Output extent of the matching transposed convolution. Carries an extra
// (stride - 1) samples of output padding so that a stride-2 down/up pair
// restores even extents exactly.
int deconv_output_extent(int extent, int kernel, int stride, int pad);

// Activations are [C,H,W] or a batch [N,C,H,W]; outputs keep the input's rank.
//
// input [Cin,H,W], weights [Cout,Cin,k,k], bias [Cout].
// out(o,y,x) = bias[o] + sum_{c,i,j} in(c, y*s-pad+i, x*s-pad+j) * w(o,c,i,j),
// reading zero outside the input.
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                              const BasicTensor<T>& bias, int stride, int pad);

// Gradients of conv2d_forward at `input`. d_input is skipped unless
// `want_input_grad`, which saves one GEMM on the first layer of a network.
template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights, int stride, int pad,
                             const BasicTensor<T>& d_output, bool want_input_grad = true);

// Transposed convolution. input [Cin,H,W], weights [Cin,Cout,k,k], bias [Cout].
// Each input element (c,y,x) scatters in(c,y,x) * w(c,o,i,j) onto output
// position (o, y*s-pad+i, x*s-pad+j) when that position lies on the grid.
template <typename T>
BasicTensor<T> deconv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                const BasicTensor<T>& bias, int stride, int pad);

template <typename T>
ConvGrads<T> deconv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights, int stride, int pad,
                               const BasicTensor<T>& d_output, bool want_input_grad = true);

template <typename T>
struct ReluResult {
  BasicTensor<T> output;
  std::vector<std::uint8_t> mask;  // 1 where input > 0
};

template <typename T>
ReluResult<T> relu(const BasicTensor<T>& input);

// d_in = d_out * mask; the subgradient at exactly zero is zero.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& d_output, const std::vector<std::uint8_t>& mask);

// In-place forms used by the network, where the mask is implied by the cached
// pre-activation.
template <typename T>
void relu_inplace(BasicTensor<T>& values);
template <typename T>
void relu_backward_inplace(BasicTensor<T>& gradient, const BasicTensor<T>& pre_activation);

}  // namespace sdcnn
