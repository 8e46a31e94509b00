#include <doctest.h>

#include "sdcnn/kernels.hpp"
#include "support.hpp"

using namespace sdcnn;
using testing::random_tensor;

namespace {

struct Case {
  int cin, cout, h, w, k, s;
};

const Case kCases[] = {
    {1, 3, 8, 8, 3, 1}, {2, 4, 7, 9, 5, 2}, {3, 2, 6, 5, 1, 1}, {2, 3, 9, 6, 3, 2}, {1, 2, 4, 4, 9, 1},
};

}  // namespace

TEST_CASE("conv2d_forward matches direct convolution") {
  for (const Case& c : kCases) {
    CAPTURE(c.k);
    CAPTURE(c.s);
    const int p = (c.k - 1) / 2;
    const TensorD in = random_tensor(Shape{c.cin, c.h, c.w}, 1);
    const TensorD w = random_tensor(Shape{c.cout, c.cin, c.k, c.k}, 2);
    const TensorD b = random_tensor(Shape{c.cout}, 3);
    const TensorD got = conv2d_forward(in, w, b, c.s, p);
    const TensorD want = testing::naive_conv(in, w, b, c.s, p);
    REQUIRE(got.shape() == want.shape());
    CHECK(testing::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("deconv2d_forward matches scatter transposed convolution") {
  for (const Case& c : kCases) {
    const int p = (c.k - 1) / 2;
    const TensorD in = random_tensor(Shape{c.cin, c.h, c.w}, 4);
    const TensorD w = random_tensor(Shape{c.cin, c.cout, c.k, c.k}, 5);
    const TensorD b = random_tensor(Shape{c.cout}, 6);
    const TensorD got = deconv2d_forward(in, w, b, c.s, p);
    const TensorD want = testing::naive_deconv(in, w, b, c.s, p);
    REQUIRE(got.shape() == want.shape());
    CHECK(testing::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("stride-1 deconvolution equals convolution with the flipped, transposed kernel") {
  const int cin = 3, cout = 2, k = 5, p = 2;
  const TensorD in = random_tensor(Shape{cin, 7, 6}, 7);
  const TensorD w = random_tensor(Shape{cin, cout, k, k}, 8);
  const TensorD b = random_tensor(Shape{cout}, 9);
  TensorD flipped(Shape{cout, cin, k, k});
  for (int o = 0; o < cout; ++o)
    for (int c = 0; c < cin; ++c)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          flipped[((static_cast<std::size_t>(o) * cin + c) * k + i) * k + j] =
              w[((static_cast<std::size_t>(c) * cout + o) * k + (k - 1 - i)) * k + (k - 1 - j)];
  CHECK(testing::max_abs_diff(deconv2d_forward(in, w, b, 1, p), conv2d_forward(in, flipped, b, 1, p)) < 1e-12);
}

TEST_CASE("deconvolution is the adjoint of convolution") {
  // <conv(x), y> = <x, deconv(y)> for shared weights and zero bias.
  for (const Case& c : kCases) {
    const int p = (c.k - 1) / 2;
    const TensorD x = random_tensor(Shape{c.cin, c.h, c.w}, 10);
    const TensorD w = random_tensor(Shape{c.cout, c.cin, c.k, c.k}, 11);
    const TensorD cx = conv2d_forward(x, w, TensorD(Shape{c.cout}), c.s, p);
    const TensorD y = random_tensor(cx.shape(), 12);
    const TensorD dy = deconv2d_forward(y, w, TensorD(Shape{c.cin}), c.s, p);
    if (dy.shape() != x.shape()) continue;  // odd extents under stride 2 do not round-trip
    CHECK(testing::dot(cx, y) == doctest::Approx(testing::dot(x, dy)).epsilon(1e-12));
  }
}

TEST_CASE("stride-2 down/up pair restores even extents") {
  for (int e : {2, 8, 16, 32, 240}) {
    const int down = conv_output_extent(e, 3, 2, 1);
    CHECK(deconv_output_extent(down, 9, 2, 4) == e);
  }
}

TEST_CASE("kernel gradients match central differences") {
  for (const Case& c : kCases) {
    for (bool transposed : {false, true}) {
      CAPTURE(transposed);
      const int p = (c.k - 1) / 2;
      TensorD in = random_tensor(Shape{c.cin, c.h, c.w}, 20);
      TensorD w = transposed ? random_tensor(Shape{c.cin, c.cout, c.k, c.k}, 21)
                             : random_tensor(Shape{c.cout, c.cin, c.k, c.k}, 21);
      TensorD b = random_tensor(Shape{c.cout}, 22);
      auto run = [&] {
        return transposed ? deconv2d_forward(in, w, b, c.s, p) : conv2d_forward(in, w, b, c.s, p);
      };
      const TensorD r = random_tensor(run().shape(), 23);
      auto loss = [&] { return testing::dot(run(), r); };
      const ConvGrads<double> g = transposed ? deconv2d_backward(in, w, c.s, p, r) : conv2d_backward(in, w, c.s, p, r);
      const double h = 1e-3;
      const TensorD nw = testing::numeric_gradient(w, loss, h);
      const TensorD nb = testing::numeric_gradient(b, loss, h);
      const TensorD nx = testing::numeric_gradient(in, loss, h);
      for (std::size_t i = 0; i < nw.size(); ++i) CHECK(testing::relative_error(g.d_weights[i], nw[i]) <= 1e-5);
      for (std::size_t i = 0; i < nb.size(); ++i) CHECK(testing::relative_error(g.d_bias[i], nb[i]) <= 1e-5);
      for (std::size_t i = 0; i < nx.size(); ++i) CHECK(testing::relative_error(g.d_input[i], nx[i]) <= 1e-5);
    }
  }
}

TEST_CASE("batched input equals per-sample evaluation") {
  const int n = 3, cin = 2, cout = 4, k = 3, s = 2, p = 1;
  const TensorD batch = random_tensor(Shape{n, cin, 8, 6}, 30);
  const TensorD w = random_tensor(Shape{cout, cin, k, k}, 31);
  const TensorD wt = random_tensor(Shape{cin, cout, k, k}, 32);
  const TensorD b = random_tensor(Shape{cout}, 33);
  const TensorD out = conv2d_forward(batch, w, b, s, p);
  REQUIRE(out.shape() == Shape{n, cout, 4, 3});
  const TensorD dout = random_tensor(out.shape(), 34);
  const ConvGrads<double> g = conv2d_backward(batch, w, s, p, dout);
  const TensorD up = deconv2d_forward(batch, wt, b, s, p);
  const ConvGrads<double> gt = deconv2d_backward(batch, wt, s, p, random_tensor(up.shape(), 35));

  TensorD dw_sum(w.shape()), db_sum(b.shape());
  const std::size_t in_plane = batch.size() / n, out_plane = out.size() / n;
  for (int i = 0; i < n; ++i) {
    const TensorD xi(Shape{cin, 8, 6}, std::vector<double>(batch.data() + i * in_plane, batch.data() + (i + 1) * in_plane));
    const TensorD oi = conv2d_forward(xi, w, b, s, p);
    for (std::size_t j = 0; j < out_plane; ++j) CHECK(oi[j] == doctest::Approx(out[i * out_plane + j]).epsilon(1e-12));
    const TensorD di(oi.shape(), std::vector<double>(dout.data() + i * out_plane, dout.data() + (i + 1) * out_plane));
    const ConvGrads<double> gi = conv2d_backward(xi, w, s, p, di);
    for (std::size_t j = 0; j < in_plane; ++j) CHECK(gi.d_input[j] == doctest::Approx(g.d_input[i * in_plane + j]).epsilon(1e-12));
    for (std::size_t j = 0; j < w.size(); ++j) dw_sum[j] += gi.d_weights[j];
    for (std::size_t j = 0; j < b.size(); ++j) db_sum[j] += gi.d_bias[j];
  }
  CHECK(testing::max_abs_diff(dw_sum, g.d_weights) < 1e-10);
  CHECK(testing::max_abs_diff(db_sum, g.d_bias) < 1e-10);
  CHECK(gt.d_input.shape() == batch.shape());
}

TEST_CASE("float and double paths agree on a large frame") {
  // Large enough to span several column blocks.
  const TensorD in = random_tensor(Shape{4, 61, 83}, 40);
  const TensorD w = random_tensor(Shape{8, 4, 5, 5}, 41, -0.1, 0.1);
  const TensorD b = random_tensor(Shape{8}, 42);
  const TensorD d = conv2d_forward(in, w, b, 1, 2);
  const Tensor f = conv2d_forward(in.cast<float>(), w.cast<float>(), b.cast<float>(), 1, 2);
  CHECK(testing::max_abs_diff(d, f.cast<double>()) < 1e-4);
  CHECK(testing::max_abs_diff(d, testing::naive_conv(in, w, b, 1, 2)) < 1e-12);
}

TEST_CASE("skipping the input gradient leaves it empty") {
  const TensorD in = random_tensor(Shape{1, 6, 6}, 50);
  const TensorD w = random_tensor(Shape{2, 1, 3, 3}, 51);
  const ConvGrads<double> g = conv2d_backward(in, w, 1, 1, random_tensor(Shape{2, 6, 6}, 52), false);
  CHECK(g.d_input.empty());
  CHECK(g.d_weights.shape() == w.shape());
}

TEST_CASE("relu and its subgradient") {
  const TensorD x(Shape{4}, std::vector<double>{-1.0, 0.0, 0.5, 2.0});
  const ReluResult<double> r = relu(x);
  CHECK(r.output == TensorD(Shape{4}, std::vector<double>{0.0, 0.0, 0.5, 2.0}));
  CHECK(r.mask == std::vector<std::uint8_t>{0, 0, 1, 1});
  const TensorD g = relu_backward(TensorD(Shape{4}, 1.0), r.mask);
  CHECK(g == TensorD(Shape{4}, std::vector<double>{0.0, 0.0, 1.0, 1.0}));
  TensorD grad(Shape{4}, 3.0);
  relu_backward_inplace(grad, x);
  CHECK(grad == TensorD(Shape{4}, std::vector<double>{0.0, 0.0, 3.0, 3.0}));
  CHECK(testing::error_kind_of([&] { relu_backward(TensorD(Shape{3}), r.mask); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("kernel argument validation") {
  const Tensor in(Shape{2, 8, 8});
  CHECK(testing::error_kind_of([&] { conv2d_forward(in, Tensor(Shape{3, 1, 3, 3}), Tensor(Shape{3}), 1, 1); }) ==
        ErrorKind::ShapeMismatch);
  CHECK(testing::error_kind_of([&] { conv2d_forward(in, Tensor(Shape{3, 2, 3, 3}), Tensor(Shape{4}), 1, 1); }) ==
        ErrorKind::ShapeMismatch);
  CHECK(testing::error_kind_of([&] { conv2d_forward(in, Tensor(Shape{3, 2, 4, 4}), Tensor(Shape{3}), 1, 1); }) ==
        ErrorKind::InvalidArgument);
  CHECK(testing::error_kind_of([&] { conv2d_forward(in, Tensor(Shape{3, 2, 3, 3}), Tensor(Shape{3}), 0, 1); }) ==
        ErrorKind::InvalidArgument);
  CHECK(testing::error_kind_of([&] { deconv2d_forward(in, Tensor(Shape{3, 2, 3, 3}), Tensor(Shape{2}), 1, 1); }) ==
        ErrorKind::ShapeMismatch);
  CHECK(testing::error_kind_of([&] { conv2d_forward(Tensor(Shape{8, 8}), Tensor(Shape{1, 1, 3, 3}), Tensor(Shape{1}), 1, 1); }) ==
        ErrorKind::ShapeMismatch);
  CHECK(testing::error_kind_of([&] {
          conv2d_backward(in, Tensor(Shape{3, 2, 3, 3}), 1, 1, Tensor(Shape{3, 7, 8}));
        }) == ErrorKind::ShapeMismatch);
}
