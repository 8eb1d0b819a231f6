#include "lagsynth/sgl.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "lagsynth/kernels.hpp"
#include "lagsynth/linalg.hpp"

namespace lagsynth::sgl {

namespace {

struct GroupInfo {
  std::size_t n_groups = 0;
  std::vector<std::vector<std::size_t>> members;
  std::vector<double> sqrt_size;
};

GroupInfo analyze_groups(const std::vector<std::size_t>& group_index,
                         std::size_t p) {
  require(group_index.size() == p, "sgl", "group index size mismatch");
  GroupInfo info;
  for (std::size_t g : group_index) {
    info.n_groups = std::max(info.n_groups, g + 1);
  }
  info.members.resize(info.n_groups);
  for (std::size_t j = 0; j < p; ++j) info.members[group_index[j]].push_back(j);
  info.sqrt_size.resize(info.n_groups);
  for (std::size_t g = 0; g < info.n_groups; ++g) {
    require(!info.members[g].empty(), "sgl", "empty group in group index");
    info.sqrt_size[g] =
        std::sqrt(static_cast<double>(info.members[g].size()));
  }
  return info;
}

void check_hyper(const HyperParams& hyper) {
  require(hyper.lambda >= 0.0, "sgl", "lambda must be >= 0");
  require(hyper.alpha >= 0.0 && hyper.alpha <= 1.0, "sgl",
          "alpha must be in [0, 1]");
}

double penalty(const std::vector<double>& b, const HyperParams& hyper,
               const GroupInfo& groups) {
  double l1 = 0.0;
  for (double v : b) l1 += std::fabs(v);
  double l2 = 0.0;
  for (std::size_t g = 0; g < groups.n_groups; ++g) {
    double ssq = 0.0;
    for (std::size_t j : groups.members[g]) ssq += b[j] * b[j];
    l2 += groups.sqrt_size[g] * std::sqrt(ssq);
  }
  return hyper.lambda * hyper.alpha * l1 +
         hyper.lambda * (1.0 - hyper.alpha) * l2;
}

// Centered copy of the problem; the intercept is recovered at the end.
struct Centered {
  Matrix x;
  std::vector<double> y;
  double ymean = 0.0;
  std::vector<double> colmean;
};

Centered center_problem(const Matrix& x, const std::vector<double>& y) {
  const std::size_t n = x.rows, p = x.cols;
  Centered c;
  c.ymean = kernels::sum(y.data(), n) / static_cast<double>(n);
  c.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.y[i] = y[i] - c.ymean;
  c.colmean.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(1.0, x.row(i), c.colmean.data(), p);
  }
  kernels::scal(1.0 / static_cast<double>(n), c.colmean.data(), p);
  c.x = x;
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(-1.0, c.colmean.data(), c.x.row(i), p);
  }
  return c;
}

// grad = Xc'(Xc b - yc) / n; returns f(b) = (1/2n)||yc - Xc b||^2.
double gradient(const Matrix& xc, const std::vector<double>& yc,
                const std::vector<double>& b, std::vector<double>& resid,
                std::vector<double>& grad) {
  const std::size_t n = xc.rows, p = xc.cols;
  kernels::gemv(xc.data.data(), n, p, b.data(), resid.data());
  for (std::size_t i = 0; i < n; ++i) resid[i] -= yc[i];  // Xc b - yc
  kernels::gemv_t(xc.data.data(), n, p, resid.data(), grad.data());
  kernels::scal(1.0 / static_cast<double>(n), grad.data(), p);
  return 0.5 * kernels::sumsq(resid.data(), n) / static_cast<double>(n);
}

double f_value(const Matrix& xc, const std::vector<double>& yc,
               const std::vector<double>& b, std::vector<double>& resid) {
  const std::size_t n = xc.rows, p = xc.cols;
  kernels::gemv(xc.data.data(), n, p, b.data(), resid.data());
  for (std::size_t i = 0; i < n; ++i) resid[i] -= yc[i];
  return 0.5 * kernels::sumsq(resid.data(), n) / static_cast<double>(n);
}

void prox_inplace(std::vector<double>& v, double step,
                  const HyperParams& hyper, const GroupInfo& groups) {
  const std::size_t p = v.size();
  kernels::soft_threshold(v.data(), step * hyper.lambda * hyper.alpha,
                          v.data(), p);
  const double group_w = step * hyper.lambda * (1.0 - hyper.alpha);
  if (group_w == 0.0) return;
  for (std::size_t g = 0; g < groups.n_groups; ++g) {
    double ssq = 0.0;
    for (std::size_t j : groups.members[g]) ssq += v[j] * v[j];
    double norm = std::sqrt(ssq);
    double thr = group_w * groups.sqrt_size[g];
    if (norm <= thr) {
      for (std::size_t j : groups.members[g]) v[j] = 0.0;
    } else {
      double factor = 1.0 - thr / norm;
      for (std::size_t j : groups.members[g]) v[j] *= factor;
    }
  }
}

// Max first-order violation at b for the centered problem, given grad there.
double kkt_from_gradient(const std::vector<double>& grad,
                         const std::vector<double>& b,
                         const HyperParams& hyper, const GroupInfo& groups) {
  const double l1w = hyper.lambda * hyper.alpha;
  const double l2scale = hyper.lambda * (1.0 - hyper.alpha);
  double worst = 0.0;
  for (std::size_t g = 0; g < groups.n_groups; ++g) {
    double ssq = 0.0;
    for (std::size_t j : groups.members[g]) ssq += b[j] * b[j];
    double gnorm = std::sqrt(ssq);
    double l2w = l2scale * groups.sqrt_size[g];
    if (gnorm > 0.0) {
      for (std::size_t j : groups.members[g]) {
        if (b[j] != 0.0) {
          double r = grad[j] + l1w * (b[j] > 0.0 ? 1.0 : -1.0) +
                     l2w * b[j] / gnorm;
          worst = std::max(worst, std::fabs(r));
        } else {
          worst = std::max(worst, std::max(0.0, std::fabs(grad[j]) - l1w));
        }
      }
    } else {
      double ssq_soft = 0.0;
      for (std::size_t j : groups.members[g]) {
        double soft = std::max(0.0, std::fabs(grad[j]) - l1w);
        ssq_soft += soft * soft;
      }
      worst = std::max(worst, std::max(0.0, std::sqrt(ssq_soft) - l2w));
    }
  }
  return worst;
}

}  // namespace

std::vector<double> sgl_prox(const std::vector<double>& v, double step,
                             const HyperParams& hyper,
                             const std::vector<std::size_t>& group_index) {
  check_hyper(hyper);
  require(step > 0.0, "sgl::sgl_prox", "step must be positive");
  auto groups = analyze_groups(group_index, v.size());
  std::vector<double> out(v);
  prox_inplace(out, step, hyper, groups);
  return out;
}

SglModel fit_sgl(const LaggedDesign& design, const std::vector<double>& y,
                 const HyperParams& hyper, const FitOptions& opts) {
  check_hyper(hyper);
  const std::size_t n = design.matrix.rows;
  const std::size_t p = design.matrix.cols;
  require(n > 0 && p > 0, "sgl::fit_sgl", "empty design");
  require(y.size() == n, "sgl::fit_sgl", "target length mismatch");
  auto groups = analyze_groups(design.group_index, p);

  Centered c = center_problem(design.matrix, y);

  double xtx_norm = opts.xtx_norm;
  if (xtx_norm <= 0.0) {
    xtx_norm = linalg::operator_norm_sq(c.x, 0x9e3779b97f4a7c15ULL);
  }
  double step = xtx_norm > 0.0 ? static_cast<double>(n) / xtx_norm : 1.0;

  std::vector<double> x(p, 0.0);
  if (!opts.init.empty()) {
    require(opts.init.size() == p, "sgl::fit_sgl", "init length mismatch");
    x = opts.init;
  }
  std::vector<double> x_prev(x);
  std::vector<double> yv(x);
  std::vector<double> z(p), grad(p), resid(n), cand(p);
  double t = 1.0;

  double fx = f_value(c.x, c.y, x, resid);
  double objective_x = fx + penalty(x, hyper, groups);

  SglModel model;
  model.hyper = hyper;
  if (opts.record_trace) model.diag.objective_trace.push_back(objective_x);

  bool converged = false;
  double kkt = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < opts.max_iter; ++it) {
    double f_yv = gradient(c.x, c.y, yv, resid, grad);

    // Backtracking: shrink until the quadratic model majorizes f at z.
    double f_z = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < p; ++j) cand[j] = yv[j] - step * grad[j];
      prox_inplace(cand, step, hyper, groups);
      f_z = f_value(c.x, c.y, cand, resid);
      double lin = 0.0, quad = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        double d = cand[j] - yv[j];
        lin += grad[j] * d;
        quad += d * d;
      }
      double bound = f_yv + lin + quad / (2.0 * step);
      if (f_z <= bound + 1e-12 * std::max(1.0, std::fabs(f_z)) ||
          step < 1e-18) {
        break;
      }
      step *= 0.5;
    }
    z = cand;
    double objective_z = f_z + penalty(z, hyper, groups);

    // Monotone step: keep the previous iterate if z would increase F.
    bool accept = objective_z <= objective_x;
    double objective_next = accept ? objective_z : objective_x;
    assert(objective_next <=
           objective_x + 1e-12 * std::max(1.0, std::fabs(objective_x)));

    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // y_{k+1} = x_k + (t_k/t_{k+1})(z_k - x_k) + ((t_k-1)/t_{k+1})(x_k -
    // x_{k-1}) with x_k the monotone iterate.
    x_prev.swap(x);
    if (accept) {
      x = z;
    } else {
      x = x_prev;  // unchanged iterate
    }
    for (std::size_t j = 0; j < p; ++j) {
      yv[j] = x[j] + (t / t_next) * (z[j] - x[j]) +
              ((t - 1.0) / t_next) * (x[j] - x_prev[j]);
    }
    t = t_next;

    double rel_change = std::fabs(objective_x - objective_next) /
                        std::max(1.0, std::fabs(objective_next));
    objective_x = objective_next;
    if (opts.record_trace) model.diag.objective_trace.push_back(objective_x);

    bool check_kkt = (it % 10 == 9) || it + 1 == opts.max_iter;
    if (opts.rel_obj_tol > 0.0 && rel_change <= opts.rel_obj_tol && it > 0) {
      converged = true;
      ++it;
      break;
    }
    if (check_kkt) {
      gradient(c.x, c.y, x, resid, grad);
      kkt = kkt_from_gradient(grad, x, hyper, groups);
      if (kkt <= opts.kkt_tol) {
        converged = true;
        ++it;
        break;
      }
    }
  }

  gradient(c.x, c.y, x, resid, grad);
  kkt = kkt_from_gradient(grad, x, hyper, groups);
  if (kkt <= opts.kkt_tol) converged = true;

  model.coeffs = x;
  model.intercept =
      c.ymean - kernels::dot(x.data(), c.colmean.data(), p);
  model.diag.iterations = it;
  model.diag.objective = objective_x;
  model.diag.kkt_residual = kkt;
  model.diag.converged = converged;
  return model;
}

double lambda_max(const LaggedDesign& design, const std::vector<double>& y,
                  double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "sgl::lambda_max",
          "alpha must be in [0, 1]");
  const std::size_t n = design.matrix.rows;
  const std::size_t p = design.matrix.cols;
  require(n > 0 && p > 0, "sgl::lambda_max", "empty design");
  require(y.size() == n, "sgl::lambda_max", "target length mismatch");
  auto groups = analyze_groups(design.group_index, p);

  double ymean = kernels::sum(y.data(), n) / static_cast<double>(n);
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - ymean;
  std::vector<double> g(p);
  kernels::gemv_t(design.matrix.data.data(), n, p, yc.data(), g.data());
  kernels::scal(1.0 / static_cast<double>(n), g.data(), p);

  double best = 0.0;
  for (std::size_t gi = 0; gi < groups.n_groups; ++gi) {
    const auto& cols = groups.members[gi];
    double max_abs = 0.0, ssq = 0.0;
    for (std::size_t j : cols) {
      max_abs = std::max(max_abs, std::fabs(g[j]));
      ssq += g[j] * g[j];
    }
    if (ssq == 0.0) continue;
    double root;
    if (alpha >= 1.0) {
      root = max_abs;
    } else if (alpha <= 0.0) {
      root = std::sqrt(ssq) / groups.sqrt_size[gi];
    } else {
      // phi(l) = ||S(g, l*alpha)||_2 - l*(1-alpha)*sqrt(p_g), strictly
      // decreasing; phi(0) > 0, phi(max_abs/alpha) <= 0.
      double lo = 0.0, hi = max_abs / alpha;
      for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double thr = mid * alpha;
        double s = 0.0;
        for (std::size_t j : cols) {
          double soft = std::max(0.0, std::fabs(g[j]) - thr);
          s += soft * soft;
        }
        double phi =
            std::sqrt(s) - mid * (1.0 - alpha) * groups.sqrt_size[gi];
        if (phi > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      root = hi;
    }
    best = std::max(best, root);
  }
  return best;
}

std::vector<double> predict(const SglModel& model,
                            const LaggedDesign& design) {
  const std::size_t n = design.matrix.rows;
  const std::size_t p = design.matrix.cols;
  require(model.coeffs.size() == p, "sgl::predict",
          "design width does not match coefficient length");
  std::vector<double> out(n);
  kernels::gemv(design.matrix.data.data(), n, p, model.coeffs.data(),
                out.data());
  for (std::size_t i = 0; i < n; ++i) out[i] += model.intercept;
  return out;
}

double kkt_residual(const SglModel& model, const LaggedDesign& design,
                    const std::vector<double>& y, const HyperParams& hyper) {
  check_hyper(hyper);
  const std::size_t n = design.matrix.rows;
  const std::size_t p = design.matrix.cols;
  require(model.coeffs.size() == p, "sgl::kkt_residual", "shape mismatch");
  require(y.size() == n, "sgl::kkt_residual", "shape mismatch");
  auto groups = analyze_groups(design.group_index, p);

  std::vector<double> resid(n);
  kernels::gemv(design.matrix.data.data(), n, p, model.coeffs.data(),
                resid.data());
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = resid[i] + model.intercept - y[i];
  }
  std::vector<double> grad(p);
  kernels::gemv_t(design.matrix.data.data(), n, p, resid.data(), grad.data());
  kernels::scal(1.0 / static_cast<double>(n), grad.data(), p);

  double intercept_viol =
      std::fabs(kernels::sum(resid.data(), n) / static_cast<double>(n));
  return std::max(intercept_viol,
                  kkt_from_gradient(grad, model.coeffs, hyper, groups));
}

double objective(const SglModel& model, const LaggedDesign& design,
                 const std::vector<double>& y, const HyperParams& hyper) {
  check_hyper(hyper);
  const std::size_t n = design.matrix.rows;
  const std::size_t p = design.matrix.cols;
  require(model.coeffs.size() == p, "sgl::objective", "shape mismatch");
  auto groups = analyze_groups(design.group_index, p);
  std::vector<double> resid(n);
  kernels::gemv(design.matrix.data.data(), n, p, model.coeffs.data(),
                resid.data());
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - model.intercept - resid[i];
    rss += r * r;
  }
  return 0.5 * rss / static_cast<double>(n) +
         penalty(model.coeffs, hyper, groups);
}

double design_lipschitz(const LaggedDesign& design) {
  const std::size_t n = design.matrix.rows;
  require(n > 0, "sgl::design_lipschitz", "empty design");
  std::vector<double> dummy(n, 0.0);
  Centered c = center_problem(design.matrix, dummy);
  return linalg::operator_norm_sq(c.x, 0x9e3779b97f4a7c15ULL);
}

}  // namespace lagsynth::sgl
