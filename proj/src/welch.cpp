#include <cmath>
#include <limits>

#include "imgstat/compare.hpp"

namespace imgstat {

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::NoConvergence, "incomplete beta continued fraction did not converge");
}

struct Summary {
  double mean;
  double var;  // Bessel-corrected
  double n;
};

// Mean is returned relative to pivot; a shared pivot keeps large common
// offsets out of the sums.
Summary summarize(std::span<const double> v, double pivot) {
  if (v.size() < 2) throw Error(ErrorCode::DegenerateSample, "Welch test needs at least two samples per group");
  double mean = 0.0;
  for (double x : v) mean += x - pivot;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - pivot - mean) * (x - pivot - mean);
  const double var = ss / static_cast<double>(v.size() - 1);
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateSample, "Welch test needs positive variance");
  return {mean, var, static_cast<double>(v.size())};
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::BadConfig, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5);
  return t >= 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  // Symmetric in a and b so swapping the groups only flips the sign of t.
  const double pivot = a.empty() || b.empty() ? 0.0 : 0.5 * (a.front() + b.front());
  const Summary sa = summarize(a, pivot);
  const Summary sb = summarize(b, pivot);
  const double va = sa.var / sa.n;
  const double vb = sb.var / sb.n;
  const double se2 = va + vb;
  WelchResult r;
  r.t = (sa.mean - sb.mean) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (sa.n - 1.0) + vb * vb / (sb.n - 1.0));
  // Two-sided: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  r.p = regularized_incomplete_beta(r.df / (r.df + r.t * r.t), 0.5 * r.df, 0.5);
  return r;
}

}  // namespace imgstat
