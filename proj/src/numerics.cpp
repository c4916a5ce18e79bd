#include "balayage/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "balayage/errors.hpp"

namespace balayage {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1,1]
constexpr double kKronrodNodes[8] = {
    0.0,
    0.2077849550078984676006894037732449,
    0.4058451513773971669066064120769615,
    0.5860872354676911302941448382587296,
    0.7415311855993944398638647732807884,
    0.8648644233597690727897127886409262,
    0.9491079123427585245261896840478513,
    0.9914553711208126392068546975263285,
};
constexpr double kKronrodWeights[8] = {
    0.2094821410847278280129991748917143,
    0.2044329400752988924141619992346491,
    0.1903505780647854099132564024210137,
    0.1690047266392679028265834265985503,
    0.1406532597155259187451895905102379,
    0.1047900103222501838398763225415180,
    0.0630920926299785532907006631892042,
    0.0229353220105292249637320080589695,
};
constexpr double kGaussWeights[4] = {
    0.4179591836734693877551020408163265,
    0.3818300505051189449503697754889751,
    0.2797053914892766679014677714237796,
    0.1294849661688696932706114326790820,
};

struct PanelResult {
  double value;
  double error;
};

PanelResult kronrod_panel(const std::function<double(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double fk[15];
  fk[7] = f(c);
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[7 - i];
    fk[i] = f(c - dx);
    fk[14 - i] = f(c + dx);
  }
  double kron = kKronrodWeights[0] * fk[7];
  for (int i = 1; i <= 7; ++i) kron += kKronrodWeights[i] * (fk[7 - i] + fk[7 + i]);
  double gauss = kGaussWeights[0] * fk[7];
  for (int i = 1; i <= 3; ++i) gauss += kGaussWeights[i] * (fk[7 - 2 * i] + fk[7 + 2 * i]);
  return {h * kron, std::abs(h * (kron - gauss))};
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double tol,
                    int depth) {
  const PanelResult r = kronrod_panel(f, a, b);
  if (depth <= 0 || r.error <= tol) return r.value;
  const double c = 0.5 * (a + b);
  return adaptive_rec(f, a, c, 0.5 * tol, depth - 1) +
         adaptive_rec(f, c, b, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                     int max_depth) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    throw ParameterError("adaptive_quad: empty interval");
  }
  return adaptive_rec(f, a, b, tol, max_depth);
}

CdfTable::CdfTable(const std::function<double(double)>& density, double a, double b, int cells) {
  if (cells < 8 || !(a < b)) throw ParameterError("CdfTable: bad grid");
  x_.resize(cells + 1);
  cum_.resize(cells + 1);
  pdf_.resize(cells + 1);
  const double h = (b - a) / cells;
  for (int i = 0; i <= cells; ++i) {
    x_[i] = a + h * i;
    pdf_[i] = density(x_[i]);
    if (!(pdf_[i] >= 0.0) || !std::isfinite(pdf_[i]))
      throw ParameterError("CdfTable: density must be finite and nonnegative on the grid");
  }
  cum_[0] = 0.0;
  for (int i = 0; i < cells; ++i) {
    // per-cell Kronrod panel keeps the table accurate between nodes
    cum_[i + 1] = cum_[i] + kronrod_panel(density, x_[i], x_[i + 1]).value;
    if (cum_[i + 1] < cum_[i]) cum_[i + 1] = cum_[i];
  }
  total_ = cum_.back();
  if (!(total_ > 0.0)) throw ParameterError("CdfTable: density integrates to zero");
}

double CdfTable::invert(double u) const {
  const double target = std::clamp(u, 0.0, 1.0) * total_;
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  std::size_t hi = std::min<std::size_t>(cum_.size() - 1, it - cum_.begin());
  if (hi == 0) hi = 1;
  const std::size_t lo = hi - 1;
  double xl = x_[lo], xr = x_[hi];
  // linear seed inside the bracketing cell, then a few guarded Newton steps
  double frac = (cum_[hi] > cum_[lo]) ? (target - cum_[lo]) / (cum_[hi] - cum_[lo]) : 0.5;
  double x = xl + frac * (xr - xl);
  for (int it2 = 0; it2 < 4; ++it2) {
    const double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
    const double pl = pdf_[lo], pr = pdf_[hi];
    // trapezoid model of the cumulative within the cell
    const double cm = cum_[lo] + (x_[hi] - x_[lo]) * (pl * t + 0.5 * (pr - pl) * t * t);
    const double pm = pl + (pr - pl) * t;
    if (pm <= 0.0) break;
    double step = (target - cm) / pm;
    double xn = x + step;
    if (xn <= xl || xn >= xr) xn = 0.5 * (xl + xr);
    if (cm < target)
      xl = x;
    else
      xr = x;
    x = xn;
  }
  return x;
}

double CdfTable::cdf(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t hi = it - x_.begin();
  const std::size_t lo = hi - 1;
  const double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
  const double pl = pdf_[lo], pr = pdf_[hi];
  const double c = cum_[lo] + (x_[hi] - x_[lo]) * (pl * t + 0.5 * (pr - pl) * t * t);
  return std::clamp(c / total_, 0.0, 1.0);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("log_beta: parameters must be positive");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double inc_beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("reg_inc_beta: parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("reg_inc_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * inc_beta_cf(x, a, b) / a;
  const double front_sym =
      std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a));
  return 1.0 - front_sym * inc_beta_cf(1.0 - x, b, a) / b;
}

double reg_inc_beta_inv(double u, double a, double b) {
  if (!(u >= 0.0 && u <= 1.0)) throw ParameterError("reg_inc_beta_inv: u outside [0,1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0, x = 0.5;
  for (int i = 0; i < 20; ++i) {
    x = 0.5 * (lo + hi);
    (reg_inc_beta(x, a, b) < u ? lo : hi) = x;
  }
  const double lb = log_beta(a, b);
  for (int i = 0; i < 20; ++i) {
    const double f = reg_inc_beta(x, a, b) - u;
    const double pdf =
        std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb);
    (f < 0.0 ? lo : hi) = x;
    double step = pdf > 0.0 ? f / pdf : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-16 * (x + 1e-300)) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

double sphere_area(int d) {
  if (d < 1) throw ParameterError("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d);
}

double RunningStat::stderr_mean() const {
  if (n < 2) return 0.0;
  const double m = mean();
  double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  if (var < 0.0) var = 0.0;
  return std::sqrt(var / static_cast<double>(n));
}

}  // namespace balayage
