#pragma once

// Levenberg-Marquardt least squares and the model fits built on it.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlsnoise/errors.hpp"

namespace tlsnoise::fit {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> std_error;  // regression standard errors
  double residual_norm = 0.0;     // final sum of squared residuals
  bool converged = false;
  int n_iter = 0;
  std::vector<std::string> flags;  // e.g. "n_c_unidentifiable"
  std::string message;

  /// Value / standard error by name; UsageError when absent.
  double param(std::string_view name) const;
  double error(std::string_view name) const;
  bool has_flag(std::string_view flag) const;
};

using ResidualFn = std::function<void(std::span<const double> p, std::span<double> r)>;
/// Fills a row-major m x n Jacobian dr_i/dp_j.
using JacobianFn = std::function<void(std::span<const double> p, std::span<double> jac)>;

struct NllsProblem {
  std::size_t n_residuals = 0;
  ResidualFn residuals;
  JacobianFn jacobian;  // optional; central differences when empty
  std::vector<std::string> names;
};

struct NllsOptions {
  int max_iter = 500;
  double cost_rtol = 1e-10;
  double grad_rtol = 1e-12;
  double lambda0 = 1e-8;  // initial damping relative to max diag(J^T J)
  double fd_step = 1e-6;  // relative central-difference step
};

/// Thrown when every trial step keeps producing non-finite residuals.
class NonFiniteResidualError : public DomainError {
 public:
  NonFiniteResidualError(const std::string& what, std::vector<double> last_good)
      : DomainError(what), last_good_params(std::move(last_good)) {}
  std::vector<double> last_good_params;
};

FitResult nlls_minimize(const NllsProblem& problem, std::vector<double> init,
                        const NllsOptions& options = {});

/// Row-major Jacobian of the problem at p (analytic if provided).
std::vector<double> jacobian(const NllsProblem& problem, std::span<const double> p,
                             double fd_step = 1e-6);
/// Gradient of 0.5 |r|^2, i.e. J^T r.
std::vector<double> gradient(const NllsProblem& problem, std::span<const double> p);

/// Weighted regression of ln y on ln x over lo <= x <= hi. Parameters
/// "beta" and "prefactor". y_err may be empty (equal weights).
FitResult fit_powerlaw(std::span<const double> x, std::span<const double> y,
                       std::span<const double> y_err, double lo, double hi);

enum class QiModel { empirical, gtm };
QiModel parse_qi_model(std::string_view label);

/// gtm: 1/Q = p1 ln(sqrt(p2/N)) with parameters "p_gamma_f_tan_delta", "c_nc".
/// empirical: 1/Q = F/(1+N/n_c)^alpha with "f_tan_delta", "n_c", "alpha".
/// Fitted on loss 1/Q with relative residuals.
FitResult fit_qi_vs_n(std::span<const double> n, std::span<const double> qi, QiModel model,
                      const NllsOptions& options = {});

/// S = S0 (1 + N/N_c)^(-1/2) with parameters "plateau", "n_c". s_err may be
/// empty (relative weighting). Flags "n_c_unidentifiable" when the data sit
/// entirely below 0.1 N_c or above 10 N_c.
FitResult fit_noise_vs_n(std::span<const double> n, std::span<const double> s_y,
                         std::span<const double> s_err, const NllsOptions& options = {});

/// "name value stderr" lines followed by convergence metadata.
void write_fit_report(std::ostream& out, const FitResult& result);

}  // namespace tlsnoise::fit
