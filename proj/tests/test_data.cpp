#include <doctest.h>

#include <cmath>

#include "sdcnn/augment.hpp"
#include "sdcnn/codec.hpp"
#include "sdcnn/dataset.hpp"
#include "sdcnn/metrics.hpp"
#include "support.hpp"

using namespace sdcnn;
using testing::error_kind_of;
using testing::random_frame;

namespace {

// Smooth test scene: gradient plus a bright disc, so the codec has structure
// to preserve and the PSNR figures are meaningful.
Frame scene(int w, int h, int seed) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - w * 0.4, dy = y - h * 0.6;
      double v = 40 + 120.0 * x / w + 40.0 * y / h + ((dx * dx + dy * dy) < (w * w / 16.0) ? 50 : 0);
      v += 6.0 * std::sin(0.7 * x + seed) * std::cos(0.45 * y);
      f.at(x, y) = to_pixel(v);
    }
  return f;
}

}  // namespace

TEST_CASE("flip and rotation identities") {
  const Frame f = random_frame(7, 4, 1);
  CHECK(hflip(hflip(f)) == f);
  CHECK(rot180(rot180(f)) == f);
  CHECK(rot90(rot90(f)) == rot180(f));
  CHECK(rot90(rot90(rot90(rot90(f)))) == f);
  const Frame r = rot90(f);
  CHECK(r.width == 4);
  CHECK(r.height == 7);
  // clockwise: the bottom-left pixel lands top-left
  CHECK(r.at(0, 0) == f.at(0, 3));
  CHECK(r.at(3, 0) == f.at(0, 0));
  CHECK(hflip(f).at(0, 2) == f.at(6, 2));
}

TEST_CASE("bilinear scaling") {
  const Frame f = random_frame(9, 6, 2);
  CHECK(scale_bilinear(f, 1.0) == f);
  const Frame half = scale_bilinear(f, 0.5);
  CHECK(half.width == 5);  // round(4.5) away from zero
  CHECK(half.height == 3);
  CHECK(scale_bilinear(Frame(8, 8, 77), 0.25) == Frame(2, 2, 77));
  CHECK(scale_bilinear(f, 0.01).width == 1);
  CHECK(error_kind_of([&] { scale_bilinear(f, 1.5); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { scale_bilinear(f, 0.0); }) == ErrorKind::InvalidArgument);
  // 2:1 downscale with half-pixel centres averages pixel pairs
  const Frame row(4, 1, std::vector<std::uint8_t>{10, 20, 30, 50});
  CHECK(scale_bilinear(row, 0.5) == Frame(2, 1, std::vector<std::uint8_t>{15, 40}));
}

TEST_CASE("augmentation yields 24 frames in flip, scale, rotation order") {
  const Frame f = random_frame(40, 24, 3);
  const auto out = augment(f);
  REQUIRE(out.size() == 24);
  CHECK(out[0] == f);
  CHECK(out[1] == rot90(f));
  CHECK(out[2] == rot180(f));
  CHECK(out[3] == scale_bilinear(f, 0.75));
  CHECK(out[12] == hflip(f));
  CHECK(out[12 + 3 * 2 + 1] == rot90(scale_bilinear(hflip(f), 0.5)));
  CHECK(out[9].width == 10);
}

TEST_CASE("patch extraction counts") {
  CHECK(extract_patches(Frame(481, 321)).size() == 45 * 29);
  CHECK(extract_patches(Frame(32, 32)).size() == 1);
  CHECK(extract_patches(Frame(31, 100)).empty());
  CHECK(extract_patches(Frame(42, 32)).size() == 2);
  const Frame f = random_frame(50, 45, 4);
  const auto patches = extract_patches(f);
  REQUIRE(patches.size() == 2 * 2);
  const Patch& p = patches.back();
  CHECK(p.x == 10);
  CHECK(p.y == 10);
  CHECK(p.values.shape() == Shape{1, 32, 32});
  CHECK(p.values.at(0, 3, 5) == doctest::Approx(f.at(15, 13) / 255.0));
}

TEST_CASE("patch pairs stay aligned") {
  const Frame truth = random_frame(52, 40, 5);
  const Frame degraded = degrade_frame(truth, 30).frame;
  const auto pairs = cut_patch_pairs(truth, degraded, 7);
  REQUIRE(pairs.size() == 3);
  for (const auto& p : pairs) {
    CHECK(p.source == 7);
    CHECK(p.truth.at(0, 4, 6) == doctest::Approx(truth.at(p.x + 6, p.y + 4) / 255.0));
    CHECK(p.compressed.at(0, 4, 6) == doctest::Approx(degraded.at(p.x + 6, p.y + 4) / 255.0));
  }
  CHECK(error_kind_of([&] { cut_patch_pairs(truth, Frame(51, 40), 0); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("dataset from an augmented frame") {
  const Frame f = scene(64, 48, 1);
  const std::vector<Frame> frames{f};
  const auto data = build_dataset(frames, 37);
  std::size_t expected = 0;
  for (const Frame& a : augment(f)) expected += extract_patches(a).size();
  CHECK(data.size() == expected);
  CHECK(error_kind_of([&] { build_dataset(frames, 52); }) == ErrorKind::OutOfRange);
  const auto pairs = build_dataset_from_pairs(frames, frames);
  CHECK(pairs.size() == expected);
  for (const auto& p : pairs) CHECK(p.truth == p.compressed);
}

TEST_CASE("qstep follows the quantizer table") {
  CHECK(qstep(4) == 1.0);
  CHECK(qstep(22) == 8.0);
  CHECK(qstep(10) == 2.0);
  CHECK(qstep(37) == doctest::Approx(std::pow(2.0, 33.0 / 6.0)));
  CHECK(error_kind_of([] { qstep(-1); }) == ErrorKind::OutOfRange);
  CHECK(error_kind_of([] { qstep(52); }) == ErrorKind::OutOfRange);
}

TEST_CASE("dct is orthonormal") {
  Block8x8 b{};
  sdcnn::Rng rng(9);
  for (double& v : b) v = rng.uniform01() * 255.0;
  const Block8x8 c = dct8x8(b);
  double e_in = 0.0, e_out = 0.0;
  for (int i = 0; i < 64; ++i) {
    e_in += b[i] * b[i];
    e_out += c[i] * c[i];
  }
  CHECK(e_out == doctest::Approx(e_in).epsilon(1e-12));
  const Block8x8 back = idct8x8(c);
  for (int i = 0; i < 64; ++i) CHECK(back[i] == doctest::Approx(b[i]).epsilon(1e-12));
  Block8x8 flat{};
  flat.fill(100.0);
  const Block8x8 fc = dct8x8(flat);
  CHECK(fc[0] == doctest::Approx(800.0));
  for (int i = 1; i < 64; ++i) CHECK(std::abs(fc[i]) < 1e-9);
}

TEST_CASE("codec is deterministic, block local and monotone in qp") {
  const Frame f = scene(64, 40, 2);
  const auto a = degrade_frame(f, 32);
  const auto b = degrade_frame(f, 32);
  CHECK(a.frame == b.frame);
  CHECK(a.bits == b.bits);

  Frame g = f;
  g.at(20, 12) = static_cast<std::uint8_t>(255 - g.at(20, 12));  // inside block (2, 1)
  const Frame dg = degrade_frame(g, 32).frame;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      if (x / 8 != 2 || y / 8 != 1) CHECK(dg.at(x, y) == a.frame.at(x, y));

  double last_psnr = kInfinitePsnr, last_bits = 0.0;
  for (int qp : {22, 27, 32, 37}) {
    const auto r = degrade_frame(f, qp);
    const double p = psnr(r.frame, f);
    CHECK(p <= last_psnr);
    if (qp != 22) CHECK(r.bits <= last_bits);
    last_psnr = p;
    last_bits = r.bits;
  }
  // odd extents are padded internally and cropped back
  const auto odd = degrade_frame(random_frame(13, 9, 6), 27);
  CHECK(odd.frame.width == 13);
  CHECK(odd.frame.height == 9);
}

TEST_CASE("fine quantization is nearly lossless") {
  const Frame f = scene(48, 48, 3);
  CHECK(psnr(degrade_frame(f, 0).frame, f) >= 50.0);
  const Frame once = degrade_frame(f, 22).frame;
  CHECK(psnr(degrade_frame(once, 4).frame, once) >= 48.0);
  // every block of a flat frame quantizes to the same symbols: zero entropy,
  // flat output within half a step of the input
  const auto flat = degrade_frame(Frame(16, 16, 128), 37);
  CHECK(flat.bits == 0.0);
  CHECK(flat.frame == Frame(16, 16, flat.frame.at(0, 0)));
  CHECK(std::abs(flat.frame.at(0, 0) - 128) <= qstep(37) / 16.0 + 0.5);
}
