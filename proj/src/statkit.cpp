#include "leodet/statkit.hpp"

#include <algorithm>
#include <cmath>

namespace leodet {

double mahalanobis(const Eigen::VectorXd& x, const Gaussian& g) {
  if (x.size() != g.mean.size() || g.cov.rows() != x.size() || g.cov.cols() != x.size()) {
    throw std::invalid_argument("mahalanobis: dimension mismatch");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success) {
    throw CovarianceError("mahalanobis: covariance not positive definite");
  }
  const Eigen::VectorXd d = x - g.mean;
  return std::sqrt(d.dot(llt.solve(d)));
}

namespace {

constexpr int kMaxIter = 1000;
constexpr double kEps = 1e-16;

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  // Lentz's algorithm for the continued fraction of Q(a, x).
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) {
    throw std::invalid_argument("gamma_p: requires x >= 0, a > 0");
  }
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double chi2_cdf(double q, int dof) {
  if (q < 0.0 || dof < 1) {
    throw std::invalid_argument("chi2_cdf: requires q >= 0, dof >= 1");
  }
  return gamma_p(0.5 * dof, 0.5 * q);
}

double chi2_quantile(double p, int dof) {
  if (p <= 0.0 || p >= 1.0) {
    throw std::invalid_argument("chi2_quantile: p must be in (0, 1)");
  }
  double lo = 0.0;
  double hi = std::max(2.0 * dof, 10.0);
  while (chi2_cdf(hi, dof) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double pr_md(double md, int dof) {
  if (md < 0.0) {
    throw std::invalid_argument("pr_md: md must be non-negative");
  }
  return std::max(0.0, 2.0 * (chi2_cdf(md * md, dof) - 0.5));
}

bool confidence_ellipsoid_contains(const Eigen::VectorXd& x, const Gaussian& g, double p) {
  const double md = mahalanobis(x, g);
  return md * md <= chi2_quantile(p, static_cast<int>(x.size()));
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw std::invalid_argument("EmpiricalCdf: need at least two samples");
  }
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalCdf::eval(double value) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), value);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalCdf::percentile(double d) const {
  if (d <= 0.0 || d > 1.0) {
    throw std::invalid_argument("EmpiricalCdf::percentile: d must be in (0, 1]");
  }
  const auto n = static_cast<double>(samples_.size());
  auto idx = static_cast<size_t>(std::ceil(d * n)) - 1;
  idx = std::min(idx, samples_.size() - 1);
  return samples_[idx];
}

Eigen::MatrixXd sample_gaussian(const Gaussian& g, int n, std::mt19937_64& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  Eigen::MatrixXd root;
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    // Semi-definite or slightly indefinite input: eigenvalue square root with
    // negative modes clipped.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.cov);
    root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto dim = g.mean.size();
  Eigen::MatrixXd out(dim, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = gauss(rng);
    out.col(j) = g.mean + root * z;
  }
  return out;
}

}  // namespace leodet
