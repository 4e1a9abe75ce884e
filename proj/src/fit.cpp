#include "tlsnoise/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tlsnoise/csv.hpp"

namespace tlsnoise::fit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool all_finite(const VectorXd& v) { return v.allFinite(); }

VectorXd eval(const NllsProblem& pr, const VectorXd& p) {
  VectorXd r(static_cast<Eigen::Index>(pr.n_residuals));
  pr.residuals(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
               std::span<double>(r.data(), static_cast<std::size_t>(r.size())));
  return r;
}

MatrixXd eval_jacobian(const NllsProblem& pr, const VectorXd& p, double fd_step) {
  const auto m = static_cast<Eigen::Index>(pr.n_residuals);
  const auto n = p.size();
  std::vector<double> rowmajor = jacobian(pr, std::span<const double>(p.data(), static_cast<std::size_t>(n)), fd_step);
  MatrixXd J(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) J(i, j) = rowmajor[static_cast<std::size_t>(i * n + j)];
  }
  return J;
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Wraps a problem so that it is solved in q = ln p.
NllsProblem log_parameterized(const NllsProblem& inner) {
  NllsProblem outer;
  outer.n_residuals = inner.n_residuals;
  outer.names = inner.names;
  outer.residuals = [inner](std::span<const double> q, std::span<double> r) {
    std::vector<double> p(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) p[i] = std::exp(q[i]);
    inner.residuals(p, r);
  };
  return outer;
}

FitResult solve_positive(const NllsProblem& inner, const std::vector<double>& init,
                         const NllsOptions& options) {
  std::vector<double> q(init.size());
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (!(init[i] > 0.0)) throw DomainError("positive parameter initialized at " + csv::fmt(init[i]));
    q[i] = std::log(init[i]);
  }
  FitResult res = nlls_minimize(log_parameterized(inner), q, options);
  for (std::size_t i = 0; i < res.params.size(); ++i) {
    res.params[i] = std::exp(res.params[i]);
    res.std_error[i] *= res.params[i];
  }
  return res;
}

void require_positive(std::span<const double> v, std::string_view what) {
  std::string bad;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) bad += (bad.empty() ? "" : ",") + std::to_string(i);
  }
  if (!bad.empty()) throw DomainError(std::string(what) + " must be positive; offending indices: " + bad);
}

// x where log-interpolated data first falls to `level`, scanning in order of x.
double crossing(std::span<const double> x, std::span<const double> y, double level,
                double fallback) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double y0 = y[idx[k - 1]];
    const double y1 = y[idx[k]];
    if (y0 >= level && y1 < level) {
      const double t = (y0 - level) / (y0 - y1);
      return std::exp(std::log(x[idx[k - 1]]) + t * (std::log(x[idx[k]]) - std::log(x[idx[k - 1]])));
    }
  }
  return fallback;
}

}  // namespace

double FitResult::param(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return params[i];
  }
  throw UsageError("fit result has no parameter '" + std::string(name) + "'");
}

double FitResult::error(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return std_error[i];
  }
  throw UsageError("fit result has no parameter '" + std::string(name) + "'");
}

bool FitResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::vector<double> jacobian(const NllsProblem& problem, std::span<const double> p, double fd_step) {
  const std::size_t m = problem.n_residuals;
  const std::size_t n = p.size();
  std::vector<double> jac(m * n, 0.0);
  if (problem.jacobian) {
    problem.jacobian(p, jac);
    return jac;
  }
  std::vector<double> pp(p.begin(), p.end());
  std::vector<double> rp(m), rm(m);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = fd_step * std::max(1.0, std::abs(p[j]));
    pp[j] = p[j] + h;
    problem.residuals(pp, rp);
    pp[j] = p[j] - h;
    problem.residuals(pp, rm);
    pp[j] = p[j];
    for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rp[i] - rm[i]) / (2.0 * h);
  }
  return jac;
}

std::vector<double> gradient(const NllsProblem& problem, std::span<const double> p) {
  const std::size_t m = problem.n_residuals;
  const std::size_t n = p.size();
  std::vector<double> r(m);
  problem.residuals(p, r);
  const std::vector<double> jac = jacobian(problem, p);
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) g[j] += jac[i * n + j] * r[i];
  }
  return g;
}

FitResult nlls_minimize(const NllsProblem& problem, std::vector<double> init,
                        const NllsOptions& options) {
  if (!problem.residuals) throw UsageError("least-squares problem has no residual function");
  if (init.empty()) throw UsageError("least-squares problem has no parameters");
  if (problem.n_residuals < init.size()) {
    throw UsageError("fewer residuals than parameters");
  }
  VectorXd p = Eigen::Map<const VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
  VectorXd r = eval(problem, p);
  if (!all_finite(r)) throw DomainError("residuals are not finite at the initial point");

  FitResult res;
  res.names = problem.names;
  if (res.names.size() != init.size()) {
    res.names.clear();
    for (std::size_t i = 0; i < init.size(); ++i) res.names.push_back("p" + std::to_string(i));
  }

  double cost = 0.5 * r.squaredNorm();
  MatrixXd J = eval_jacobian(problem, p, options.fd_step);
  MatrixXd JtJ = J.transpose() * J;
  VectorXd g = J.transpose() * r;
  const double g0 = g.norm();
  double lambda = options.lambda0 * std::max(JtJ.diagonal().maxCoeff(), 1e-300);
  double grow = 2.0;
  int bad_trials = 0;

  int iter = 0;
  while (iter < options.max_iter) {
    if (g.norm() <= options.grad_rtol * g0 || cost == 0.0) {
      res.converged = true;
      res.message = "gradient below tolerance";
      break;
    }
    ++iter;
    MatrixXd A = JtJ;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      A(i, i) += lambda * std::max(JtJ(i, i), 1e-12 * JtJ.diagonal().maxCoeff());
    }
    const VectorXd step = A.ldlt().solve(-g);
    const VectorXd p_new = p + step;
    const VectorXd r_new = eval(problem, p_new);
    if (!all_finite(step) || !all_finite(r_new)) {
      if (++bad_trials > 30) {
        throw NonFiniteResidualError("residuals stayed non-finite while damping; last good params " +
                                         [&] {
                                           std::string s;
                                           for (double v : to_std(p)) s += csv::fmt(v) + " ";
                                           return s;
                                         }(),
                                     to_std(p));
      }
      lambda *= 10.0;
      continue;
    }
    bad_trials = 0;
    const double cost_new = 0.5 * r_new.squaredNorm();
    const double predicted = -(g.dot(step) + 0.5 * step.dot(JtJ * step));
    if (cost_new < cost) {
      const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 1.0;
      const double rel = (cost - cost_new) / cost;
      p = p_new;
      r = r_new;
      cost = cost_new;
      J = eval_jacobian(problem, p, options.fd_step);
      JtJ = J.transpose() * J;
      g = J.transpose() * r;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      grow = 2.0;
      if (rel < options.cost_rtol) {
        res.converged = true;
        res.message = "relative cost change below tolerance";
        break;
      }
    } else {
      lambda *= grow;
      grow *= 2.0;
      if (lambda > 1e300) {
        res.converged = true;
        res.message = "no further descent possible";
        break;
      }
    }
  }
  if (!res.converged) res.message = "maximum iterations reached";

  const auto m = static_cast<double>(problem.n_residuals);
  const auto n = static_cast<double>(init.size());
  const double rss = r.squaredNorm();
  const double s2 = m > n ? rss / (m - n) : 0.0;
  const MatrixXd cov = JtJ.completeOrthogonalDecomposition().pseudoInverse() * s2;
  res.params = to_std(p);
  res.std_error.resize(init.size());
  for (std::size_t i = 0; i < init.size(); ++i) {
    res.std_error[i] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
  }
  res.residual_norm = rss;
  res.n_iter = iter;
  return res;
}

FitResult fit_powerlaw(std::span<const double> x, std::span<const double> y,
                       std::span<const double> y_err, double lo, double hi) {
  if (x.size() != y.size() || (!y_err.empty() && y_err.size() != y.size())) {
    throw UsageError("power-law fit inputs differ in length");
  }
  std::vector<std::size_t> in;
  std::string bad;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lo && x[i] <= hi)) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      bad += (bad.empty() ? "" : ",") + std::to_string(i);
      continue;
    }
    in.push_back(i);
  }
  if (!bad.empty()) throw DomainError("non-positive data in fit range at indices " + bad);
  if (in.size() < 3) throw UsageError("power-law fit needs at least three points in range");

  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i : in) {
    const double w = y_err.empty() ? 1.0 : std::pow(y[i] / y_err[i], 2);
    sw += w;
    sx += w * std::log(x[i]);
    sy += w * std::log(y[i]);
  }
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i : in) {
    const double w = y_err.empty() ? 1.0 : std::pow(y[i] / y_err[i], 2);
    const double dx = std::log(x[i]) - xm;
    sxx += w * dx * dx;
    sxy += w * dx * (std::log(y[i]) - ym);
  }
  if (!(sxx > 0.0)) throw DomainError("power-law fit needs distinct x values");
  const double beta = sxy / sxx;
  const double ln_pref = ym - beta * xm;
  double chi2 = 0;
  for (std::size_t i : in) {
    const double w = y_err.empty() ? 1.0 : std::pow(y[i] / y_err[i], 2);
    const double e = std::log(y[i]) - ln_pref - beta * std::log(x[i]);
    chi2 += w * e * e;
  }
  const double s2 = chi2 / static_cast<double>(in.size() - 2);
  FitResult res;
  res.names = {"beta", "prefactor"};
  res.params = {beta, std::exp(ln_pref)};
  const double se_beta = std::sqrt(s2 / sxx);
  const double se_lnpref = std::sqrt(s2 * (1.0 / sw + xm * xm / sxx));
  res.std_error = {se_beta, res.params[1] * se_lnpref};
  res.residual_norm = chi2;
  res.converged = true;
  res.n_iter = 1;
  res.message = "closed-form weighted regression in log-log space";
  return res;
}

QiModel parse_qi_model(std::string_view label) {
  if (label == "empirical") return QiModel::empirical;
  if (label == "gtm") return QiModel::gtm;
  throw UsageError("unknown Q model '" + std::string(label) + "' (expected empirical|gtm)");
}

FitResult fit_qi_vs_n(std::span<const double> n, std::span<const double> qi, QiModel model,
                      const NllsOptions& options) {
  if (n.size() != qi.size()) throw UsageError("photon and Q arrays differ in length");
  if (n.size() < 5) throw UsageError("Q fit needs at least five points");
  require_positive(n, "photon numbers");
  require_positive(qi, "quality factors");
  const auto [nmin, nmax] = std::minmax_element(n.begin(), n.end());
  if (*nmax / *nmin < 100.0 * (1.0 - 1e-9)) throw UsageError("Q fit needs photon numbers spanning two decades");

  std::vector<double> xs(n.begin(), n.end());
  std::vector<double> loss(qi.size());
  for (std::size_t i = 0; i < qi.size(); ++i) loss[i] = 1.0 / qi[i];

  NllsProblem pr;
  pr.n_residuals = xs.size();
  std::vector<double> init;
  if (model == QiModel::gtm) {
    pr.names = {"p_gamma_f_tan_delta", "c_nc"};
    pr.residuals = [xs, loss](std::span<const double> p, std::span<double> r) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double m = 0.5 * p[0] * std::log(p[1] / xs[i]);
        r[i] = (m - loss[i]) / loss[i];
      }
    };
    // loss is linear in ln N: slope -p1/2, intercept (p1/2) ln p2.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double lx = std::log(xs[i]);
      sx += lx; sy += loss[i]; sxx += lx * lx; sxy += lx * loss[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / m;
    if (slope < 0.0) {
      const double p1 = -2.0 * slope;
      init = {p1, std::exp(2.0 * icpt / p1)};
    } else {
      init = {2.0 * *std::max_element(loss.begin(), loss.end()) / std::log(1e3), 1e3 * *nmax};
    }
  } else {
    pr.names = {"f_tan_delta", "n_c", "alpha"};
    pr.residuals = [xs, loss](std::span<const double> p, std::span<double> r) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double m = p[0] * std::pow(1.0 + xs[i] / p[1], -p[2]);
        r[i] = (m - loss[i]) / loss[i];
      }
    };
    const double plateau = *std::max_element(loss.begin(), loss.end());
    init = {plateau, crossing(xs, loss, 0.5 * plateau, *nmax), 0.3};
  }
  return solve_positive(pr, init, options);
}

FitResult fit_noise_vs_n(std::span<const double> n, std::span<const double> s_y,
                         std::span<const double> s_err, const NllsOptions& options) {
  if (n.size() != s_y.size() || (!s_err.empty() && s_err.size() != s_y.size())) {
    throw UsageError("noise fit inputs differ in length");
  }
  if (n.size() < 4) throw UsageError("noise fit needs at least four points");
  require_positive(n, "photon numbers");
  require_positive(s_y, "noise values");
  if (!s_err.empty()) require_positive(s_err, "noise errors");

  std::vector<double> xs(n.begin(), n.end());
  std::vector<double> ys(s_y.begin(), s_y.end());
  std::vector<double> sig(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) sig[i] = s_err.empty() ? ys[i] : s_err[i];

  NllsProblem pr;
  pr.n_residuals = xs.size();
  pr.names = {"plateau", "n_c"};
  pr.residuals = [xs, ys, sig](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      r[i] = (p[0] / std::sqrt(1.0 + xs[i] / p[1]) - ys[i]) / sig[i];
    }
  };
  const auto [nmin, nmax] = std::minmax_element(xs.begin(), xs.end());
  const std::size_t lowest = static_cast<std::size_t>(nmin - xs.begin());
  const double plateau = ys[lowest];
  const double nc0 = crossing(xs, ys, plateau / std::sqrt(2.0), 10.0 * *nmax);
  FitResult res = solve_positive(pr, {plateau, nc0}, options);
  const double nc = res.param("n_c");
  if (*nmax < 0.1 * nc || *nmin > 10.0 * nc) res.flags.push_back("n_c_unidentifiable");
  return res;
}

void write_fit_report(std::ostream& out, const FitResult& result) {
  out << "parameter value stderr\n";
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    out << result.names[i] << ' ' << csv::fmt(result.params[i]) << ' '
        << csv::fmt(result.std_error[i]) << '\n';
  }
  out << "converged " << (result.converged ? "true" : "false") << '\n';
  out << "n_iter " << result.n_iter << '\n';
  out << "residual_norm " << csv::fmt(result.residual_norm) << '\n';
  for (const auto& f : result.flags) out << "flag " << f << '\n';
  if (!result.message.empty()) out << "message " << result.message << '\n';
}

}  // namespace tlsnoise::fit
