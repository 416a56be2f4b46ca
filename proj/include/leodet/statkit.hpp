#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <vector>

namespace leodet {

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

class CovarianceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// sqrt((x - m)^T cov^-1 (x - m)) via a Cholesky solve.
double mahalanobis(const Eigen::VectorXd& x, const Gaussian& g);

// Regularized lower incomplete gamma P(a, x); absolute accuracy ~1e-14.
double gamma_p(double a, double x);

// Chi-square CDF with n degrees of freedom evaluated at q >= 0.
double chi2_cdf(double q, int dof);

// Inverse chi-square CDF.
double chi2_quantile(double p, int dof);

// Manoeuvre probability from a Mahalanobis distance: the chi-square CDF of
// MD^2 folded through a 50% dead zone, max{0, 2*(F(MD^2) - 0.5)}.
double pr_md(double md, int dof);

// Whether x lies inside the p-level confidence ellipsoid of g.
bool confidence_ellipsoid_contains(const Eigen::VectorXd& x, const Gaussian& g, double p);

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);

  // Right-continuous step CDF: fraction of samples <= value.
  double eval(double value) const;
  // Smallest sample whose CDF reaches d.
  double percentile(double d) const;

  const std::vector<double>& samples() const { return samples_; }
  size_t size() const { return samples_.size(); }

 private:
  std::vector<double> samples_;  // sorted ascending
};

// n independent draws from g, one per column.
Eigen::MatrixXd sample_gaussian(const Gaussian& g, int n, std::mt19937_64& rng);

}  // namespace leodet
