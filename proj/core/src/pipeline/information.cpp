#include "mmfc/pipeline/information.hpp"

#include <cmath>
#include <string>

#include "mmfc/error.hpp"

namespace mmfc::pipeline {

double gaussian_mi(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw ConfigError("gaussian_mi: |rho| must be < 1 (got " + std::to_string(rho) + "); the information diverges");
  }
  return -0.5 * std::log2(1.0 - rho * rho);
}

DpiReport dpi_diagnostic(const DpiConfig& cfg) {
  if (!(std::abs(cfg.rho1) < 1.0) || !(std::abs(cfg.rho2) <= 1.0)) {
    throw ConfigError("dpi_diagnostic: need |rho1| < 1 and |rho2| <= 1");
  }
  if (cfg.dims == 0) throw ConfigError("dpi_diagnostic: dims must be positive");
  DpiReport r;
  const auto dims = static_cast<double>(cfg.dims);
  r.chain_rho = cfg.rho1 * cfg.rho2;
  r.beta = cfg.beta;
  r.i_x_y1 = dims * gaussian_mi(cfg.rho1);
  r.i_x_y2 = dims * gaussian_mi(r.chain_rho);
  r.inequality_holds = r.i_x_y2 <= r.i_x_y1;
  r.equality = r.i_x_y2 == r.i_x_y1;
  return r;
}

}  // namespace mmfc::pipeline
