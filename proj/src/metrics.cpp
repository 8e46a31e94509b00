#include "sdcnn/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace sdcnn {
namespace {

void require_same_size(const Frame& a, const Frame& b, const char* op) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": " + std::to_string(a.width) + "x" +
                                              std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                              std::to_string(b.height));
  }
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, std::string(op) + ": empty frames");
}

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;

std::array<double, 2 * kSsimRadius + 1> ssim_window() {
  std::array<double, 2 * kSsimRadius + 1> w{};
  double sum = 0.0;
  for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
    w[static_cast<std::size_t>(i + kSsimRadius)] = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[static_cast<std::size_t>(i + kSsimRadius)];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Half-sample symmetric extension: -1 -> 0, -2 -> 1, n -> n-1.
int symmetric_index(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// Separable Gaussian smoothing of a width x height plane.
std::vector<double> smooth(const std::vector<double>& plane, int width, int height) {
  const auto w = ssim_window();
  std::vector<double> rows(plane.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
        acc += w[static_cast<std::size_t>(k + kSsimRadius)] *
               plane[static_cast<std::size_t>(y) * width + symmetric_index(x + k, width)];
      }
      rows[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  std::vector<double> out(plane.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
        acc += w[static_cast<std::size_t>(k + kSsimRadius)] *
               rows[static_cast<std::size_t>(symmetric_index(y + k, height)) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

}  // namespace

double mean_squared_error(const Frame& a, const Frame& b) {
  require_same_size(a, b, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.pixels.size());
}

double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Frame& a, const Frame& b, double peak) { return psnr_from_mse(mean_squared_error(a, b), peak); }

double ssim(const Frame& a, const Frame& b) {
  require_same_size(a, b, "ssim");
  if (a.width < 2 * kSsimRadius + 1 || a.height < 2 * kSsimRadius + 1) {
    throw Error(ErrorKind::InvalidArgument, "ssim: frames must be at least 11x11");
  }
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const std::size_t n = a.pixels.size();
  std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i] = a.pixels[i];
    pb[i] = b.pixels[i];
    paa[i] = pa[i] * pa[i];
    pbb[i] = pb[i] * pb[i];
    pab[i] = pa[i] * pb[i];
  }
  const auto mu_a = smooth(pa, a.width, a.height);
  const auto mu_b = smooth(pb, a.width, a.height);
  const auto e_aa = smooth(paa, a.width, a.height);
  const auto e_bb = smooth(pbb, a.width, a.height);
  const auto e_ab = smooth(pab, a.width, a.height);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    total += num / den;
  }
  return total / static_cast<double>(n);
}

RDCurve::RDCurve(std::vector<RDPoint> points) : points_(std::move(points)) {
  if (points_.size() < 4) {
    throw Error(ErrorKind::InvalidArgument,
                "an RD curve needs at least 4 points for a cubic fit, got " + std::to_string(points_.size()));
  }
  for (const RDPoint& p : points_) {
    if (!(p.rate > 0.0) || !std::isfinite(p.rate) || !std::isfinite(p.psnr)) {
      throw Error(ErrorKind::InvalidArgument, "RD points need a finite positive rate and finite PSNR");
    }
  }
  std::sort(points_.begin(), points_.end(), [](const RDPoint& a, const RDPoint& b) { return a.rate < b.rate; });
}

bool RDCurve::is_monotone() const {
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].rate > points_[i - 1].rate) || !(points_[i].psnr > points_[i - 1].psnr)) return false;
  }
  return true;
}

double Cubic::integral(double lo, double hi) const {
  auto antiderivative = [this](double x) {
    return x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)));
  };
  return antiderivative(hi) - antiderivative(lo);
}

Cubic fit_cubic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 4) {
    throw Error(ErrorKind::InvalidArgument, "cubic fit needs at least 4 (x, y) pairs");
  }
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidArgument, "cubic fit needs distinct abscissae");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd vandermonde(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    vandermonde(i, 0) = 1.0;
    vandermonde(i, 1) = xi;
    vandermonde(i, 2) = xi * xi;
    vandermonde(i, 3) = xi * xi * xi;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector4d coeffs = vandermonde.colPivHouseholderQr().solve(rhs);
  return Cubic{{coeffs(0), coeffs(1), coeffs(2), coeffs(3)}};
}

namespace {

struct Axes {
  std::vector<double> log_rate;
  std::vector<double> psnr;
};

Axes axes(const RDCurve& curve, const char* op) {
  if (!curve.is_monotone()) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(op) + ": RD curve must be strictly increasing in rate and PSNR");
  }
  Axes a;
  for (const RDPoint& p : curve.points()) {
    a.log_rate.push_back(std::log10(p.rate));
    a.psnr.push_back(p.psnr);
  }
  return a;
}

// Mean of (test - anchor) over the shared interval of the abscissa.
double mean_gap(const std::vector<double>& anchor_x, const std::vector<double>& anchor_y,
                const std::vector<double>& test_x, const std::vector<double>& test_y, const char* op) {
  const auto [amin, amax] = std::minmax_element(anchor_x.begin(), anchor_x.end());
  const auto [tmin, tmax] = std::minmax_element(test_x.begin(), test_x.end());
  const double lo = std::max(*amin, *tmin);
  const double hi = std::min(*amax, *tmax);
  if (!(hi > lo)) throw Error(ErrorKind::InvalidArgument, std::string(op) + ": RD curves do not overlap");
  const Cubic anchor = fit_cubic(anchor_x, anchor_y);
  const Cubic test = fit_cubic(test_x, test_y);
  return (test.integral(lo, hi) - anchor.integral(lo, hi)) / (hi - lo);
}

}  // namespace

Cubic fit_rd(const RDCurve& curve) {
  std::vector<double> x, y;
  for (const RDPoint& p : curve.points()) {
    x.push_back(std::log10(p.rate));
    y.push_back(p.psnr);
  }
  return fit_cubic(x, y);
}

double bd_rate(const RDCurve& anchor, const RDCurve& test) {
  const Axes a = axes(anchor, "bd_rate");
  const Axes t = axes(test, "bd_rate");
  const double gap = mean_gap(a.psnr, a.log_rate, t.psnr, t.log_rate, "bd_rate");
  return (std::pow(10.0, gap) - 1.0) * 100.0;
}

double bd_psnr(const RDCurve& anchor, const RDCurve& test) {
  const Axes a = axes(anchor, "bd_psnr");
  const Axes t = axes(test, "bd_psnr");
  return mean_gap(a.log_rate, a.psnr, t.log_rate, t.psnr, "bd_psnr");
}

}  // namespace sdcnn
