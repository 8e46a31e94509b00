#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "sdcnn/frame.hpp"

namespace sdcnn {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

double mean_squared_error(const Frame& a, const Frame& b);

// 10 log10(peak^2 / mse); identical inputs give kInfinitePsnr.
double psnr_from_mse(double mse, double peak);
double psnr(const Frame& a, const Frame& b, double peak = 255.0);

// Mean structural similarity over every pixel position: 11x11 Gaussian window
// (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255, symmetric edge extension.
double ssim(const Frame& a, const Frame& b);

struct RDPoint {
  double rate = 0.0;  // any consistent unit, > 0
  double psnr = 0.0;  // dB
};

// At least four operating points, kept sorted by rate.
class RDCurve {
 public:
  explicit RDCurve(std::vector<RDPoint> points);

  std::span<const RDPoint> points() const { return points_; }
  // Strictly increasing in both rate and PSNR.
  bool is_monotone() const;

 private:
  std::vector<RDPoint> points_;
};

// c[0] + c[1] x + c[2] x^2 + c[3] x^3
struct Cubic {
  std::array<double, 4> c{};

  double operator()(double x) const { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
  double integral(double lo, double hi) const;
};

// Least-squares cubic through (x, y); interpolating when there are exactly
// four points. Throws on fewer than four points or repeated abscissae.
Cubic fit_cubic(std::span<const double> x, std::span<const double> y);

// PSNR as a cubic in log10(rate).
Cubic fit_rd(const RDCurve& curve);

// Average rate difference in percent at equal quality (negative: `test`
// needs fewer bits), from cubic fits of log10(rate) over PSNR integrated
// exactly on the shared PSNR interval.
double bd_rate(const RDCurve& anchor, const RDCurve& test);

// Average PSNR difference in dB on the shared log10(rate) interval.
double bd_psnr(const RDCurve& anchor, const RDCurve& test);

}  // namespace sdcnn
