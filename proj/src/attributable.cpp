#include "leodet/attributable.hpp"

#include <cmath>

namespace leodet {

namespace {

double wrap_two_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  return a < 0.0 ? a + 2.0 * M_PI : a;
}

double factorial(int j) {
  double f = 1.0;
  for (int i = 2; i <= j; ++i) f *= i;
  return f;
}

// Solves the weighted normal equations and returns (params, cov). The normal
// matrix is small (<= 12x12); the factorization doubles as the SPD/rank check.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> solve_wls(const Eigen::MatrixXd& a,
                                                      const Eigen::VectorXd& w,
                                                      const Eigen::VectorXd& m) {
  const Eigen::MatrixXd awt = a.transpose() * w.asDiagonal();
  const Eigen::MatrixXd normal = awt * a;
  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw FitError("fit: normal matrix is rank deficient");
  }
  Eigen::VectorXd p = llt.solve(awt * m);
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(normal.rows(), normal.cols()));
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {std::move(p), std::move(cov)};
}

}  // namespace

std::vector<double> unwrap_angles(const std::vector<double>& angles) {
  std::vector<double> out;
  out.reserve(angles.size());
  for (double a : angles) {
    if (out.empty()) {
      out.push_back(a);
    } else {
      double d = std::fmod(a - out.back(), 2.0 * M_PI);
      if (d > M_PI) d -= 2.0 * M_PI;
      if (d < -M_PI) d += 2.0 * M_PI;
      out.push_back(out.back() + d);
    }
  }
  return out;
}

int auto_order(const RadarTrack& track) {
  if (track.plots.size() == 2) return 1;
  return track.span() > 60.0 ? 3 : 2;
}

DesignSystem build_design(const RadarTrack& track, int order) {
  const auto k = static_cast<Eigen::Index>(track.plots.size());
  if (k < 2) {
    throw FitError("build_design: need at least two plots");
  }
  if (order < 1) {
    throw FitError("build_design: order must be >= 1");
  }
  const Eigen::Index np = order + 1;
  if (4 * k < 3 * np) {
    throw FitError("build_design: underdetermined system");
  }

  DesignSystem sys;
  sys.t0 = track.mid_epoch();

  // Monomial block for one observable and its exact time derivative.
  Eigen::MatrixXd a(k, np);
  Eigen::MatrixXd a_dot = Eigen::MatrixXd::Zero(k, np);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double tau = track.plots[i].epoch - sys.t0;
    for (Eigen::Index j = 0; j < np; ++j) {
      a(i, j) = std::pow(tau, static_cast<double>(j)) / factorial(static_cast<int>(j));
      if (j >= 1) {
        a_dot(i, j) = std::pow(tau, static_cast<double>(j - 1)) / factorial(static_cast<int>(j - 1));
      }
    }
  }

  std::vector<double> az;
  az.reserve(k);
  for (const RadarPlot& p : track.plots) az.push_back(p.azimuth);
  const std::vector<double> az_unwrapped = unwrap_angles(az);

  sys.a_sys = Eigen::MatrixXd::Zero(4 * k, 3 * np);
  sys.a_sys.block(0, 0, k, np) = a;
  sys.a_sys.block(k, np, k, np) = a;
  sys.a_sys.block(2 * k, 2 * np, k, np) = a;
  sys.a_sys.block(3 * k, 0, k, np) = a_dot;

  sys.measurements.resize(4 * k);
  sys.weights.resize(4 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const RadarPlot& p = track.plots[i];
    sys.measurements[i] = p.range;
    sys.measurements[k + i] = p.elevation;
    sys.measurements[2 * k + i] = az_unwrapped[i];
    sys.measurements[3 * k + i] = p.range_rate;
    sys.weights[i] = 1.0 / (p.sigma_range * p.sigma_range);
    sys.weights[k + i] = 1.0 / (p.sigma_elevation * p.sigma_elevation);
    sys.weights[2 * k + i] = 1.0 / (p.sigma_azimuth * p.sigma_azimuth);
    sys.weights[3 * k + i] = 1.0 / (p.sigma_range_rate * p.sigma_range_rate);
  }
  return sys;
}

FitResult fit_track(const RadarTrack& track, int order) {
  FitResult res;
  res.low_quality = track.plots.size() == 2;
  res.order = order <= 0 ? auto_order(track) : (res.low_quality ? 1 : order);
  res.n_plots = static_cast<int>(track.plots.size());

  const DesignSystem sys = build_design(track, res.order);
  res.t0 = sys.t0;
  auto [p, cov] = solve_wls(sys.a_sys, sys.weights, sys.measurements);
  res.params = std::move(p);
  res.cov = std::move(cov);
  res.residuals = sys.measurements - sys.a_sys * res.params;
  return res;
}

Attributable to_attributable(const FitResult& fit, const RadarTrack& track) {
  const int np = fit.order + 1;
  Attributable a;
  a.t0 = fit.t0;
  a.rho0 = fit.params[0];
  a.rhodot0 = fit.params[1];
  a.el0 = fit.params[np];
  a.az0 = wrap_two_pi(fit.params[2 * np]);
  a.order = fit.order;
  a.n_plots = static_cast<int>(track.plots.size());
  a.low_quality = fit.low_quality;

  // Sub-block of the parameter covariance reordered to (rho0, el0, az0,
  // rhodot0); the rho0-rhodot0 cross term comes along for free.
  const std::array<int, 4> idx = {0, np, 2 * np, 1};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      a.cov(i, j) = fit.cov(idx[i], idx[j]);
    }
  }
  return a;
}

std::pair<double, double> independent_fit_sigmas(const RadarTrack& track, int order) {
  const auto k = static_cast<Eigen::Index>(track.plots.size());
  const Eigen::Index np = order + 1;
  if (k < np) {
    throw FitError("independent_fit_sigmas: underdetermined system");
  }
  const double t0 = track.mid_epoch();

  Eigen::MatrixXd a(k, np);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double tau = track.plots[i].epoch - t0;
    for (Eigen::Index j = 0; j < np; ++j) {
      a(i, j) = std::pow(tau, static_cast<double>(j)) / factorial(static_cast<int>(j));
    }
  }

  Eigen::VectorXd w_rho(k), w_rr(k), m_rho(k), m_rr(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const RadarPlot& p = track.plots[i];
    w_rho[i] = 1.0 / (p.sigma_range * p.sigma_range);
    w_rr[i] = 1.0 / (p.sigma_range_rate * p.sigma_range_rate);
    m_rho[i] = p.range;
    m_rr[i] = p.range_rate;
  }
  const auto [p_rho, cov_rho] = solve_wls(a, w_rho, m_rho);
  const auto [p_rr, cov_rr] = solve_wls(a, w_rr, m_rr);
  return {std::sqrt(cov_rho(0, 0)), std::sqrt(cov_rr(0, 0))};
}

}  // namespace leodet
