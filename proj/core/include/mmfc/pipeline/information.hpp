#pragma once

#include <cstddef>

namespace mmfc::pipeline {

/// Mutual information in bits of two jointly Gaussian scalars with correlation
/// rho; throws ConfigError for |rho| >= 1.
double gaussian_mi(double rho);

/// Linear-Gaussian chain X -> Y1 -> Y2 over `dims` independent coordinates.
/// rho1 = corr(X, Y1), |rho1| < 1; rho2 = corr(Y1, Y2), |rho2| <= 1 where
/// |rho2| = 1 is a lossless second stage.
struct DpiConfig {
  std::size_t dims = 1;
  double rho1 = 0.9;
  double rho2 = 0.9;
  double beta = 1.0;  // reported only
};

struct DpiReport {
  double i_x_y1 = 0.0;
  double i_x_y2 = 0.0;
  double chain_rho = 0.0;
  double beta = 0.0;
  bool inequality_holds = false;
  bool equality = false;
};

DpiReport dpi_diagnostic(const DpiConfig& cfg);

}  // namespace mmfc::pipeline
