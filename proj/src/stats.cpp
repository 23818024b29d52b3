#include "phonecap/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>

#include "phonecap/core.hpp"

namespace phonecap::stats {

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation series differ in length");
  if (x.size() < 3) throw Error("correlation needs at least 3 samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("zero variance");
  CorrelationResult out;
  out.n = x.size();
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.p = correlation_p_value(out.r, out.n);
  return out;
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw Error("p-value needs at least 3 samples");
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2), and df/(df+t^2) = 1 - r^2.
  return boost::math::ibeta(df / 2.0, 0.5, 1.0 - r2);
}

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty series");
  MeanSd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

}  // namespace phonecap::stats
