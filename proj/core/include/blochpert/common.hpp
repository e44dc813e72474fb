#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace blochpert {

using cd = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Integer coordinates of a lattice vector w.r.t. a fixed basis.
using IVec = std::vector<int>;

struct IVecHash {
  std::size_t operator()(const IVec& v) const {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ v.size();
    for (int x : v) h = (h * 0x100000001b3ull) ^ static_cast<std::size_t>(static_cast<uint32_t>(x));
    return h;
  }
};

inline IVec ivec_neg(const IVec& v) {
  IVec r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = -v[i];
  return r;
}

inline IVec ivec_sub(const IVec& a, const IVec& b) {
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline IVec ivec_add(const IVec& a, const IVec& b) {
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline bool ivec_is_zero(const IVec& v) {
  for (int x : v)
    if (x != 0) return false;
  return true;
}

inline std::string ivec_str(const IVec& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

/// Fractional part in [0,1), stable against values that are integers up to roundoff.
inline double frac01(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;
  if (f < 0.0) f += 1.0;
  return f;
}

/// Nearest integer together with the distance to it.
inline std::pair<long long, double> nearest_int(double x) {
  double r = std::round(x);
  return {static_cast<long long>(r), std::abs(x - r)};
}

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Least-squares slope of y against x.  Returns {slope, intercept, rms residual}.
struct LineFit {
  double slope = 0, intercept = 0, residual = 0;
  int n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 2) throw numerical_error("fit_line: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = f.n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw numerical_error("fit_line: degenerate abscissae");
  f.slope = (f.n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / f.n;
  double ss = 0;
  for (int i = 0; i < f.n; ++i) {
    double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / f.n);
  return f;
}

/// Wilson score interval for a binomial proportion.
struct BinomialCI {
  double fraction = 0, lo = 0, hi = 1;
  long long successes = 0, trials = 0;
};

inline BinomialCI wilson_ci(long long successes, long long trials, double z = 1.96) {
  BinomialCI ci;
  ci.successes = successes;
  ci.trials = trials;
  if (trials <= 0) return ci;
  double p = double(successes) / double(trials);
  ci.fraction = p;
  double z2 = z * z, n = double(trials);
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z / denom * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  ci.lo = std::max(0.0, center - half);
  ci.hi = std::min(1.0, center + half);
  return ci;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw numerical_error("median of empty set");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs fn(i) for i in [0,n) over `threads` workers.  fn must be safe on disjoint i.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  int workers = std::min(threads, n);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace blochpert
