#include "lagsynth/cv.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "lagsynth/features.hpp"
#include "lagsynth/gp.hpp"
#include "lagsynth/parallel.hpp"
#include "lagsynth/rng.hpp"
#include "lagsynth/stats.hpp"

namespace lagsynth::cv {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

// ---------------------------------------------------------------------------
// splits and folds
// ---------------------------------------------------------------------------

SplitPlan make_split(std::size_t samples_s1, std::size_t samples_s2,
                     Scheme scheme) {
  require(samples_s1 >= 2 && samples_s2 >= 2, "make_split",
          "both sessions need at least 2 samples");
  SplitPlan plan;
  plan.scheme = scheme;
  plan.samples_s1 = samples_s1;
  plan.samples_s2 = samples_s2;

  if (scheme == Scheme::inter_session) {
    plan.parcellations[0].train = {{0, 0, samples_s1}};
    plan.parcellations[0].test = {{1, 0, samples_s2}};
    plan.parcellations[1].train = {{1, 0, samples_s2}};
    plan.parcellations[1].test = {{0, 0, samples_s1}};
    return plan;
  }

  // Intra: compose the first half of one session with the second half of
  // the other; halves split at floor(n/2).
  const std::size_t h1 = samples_s1 / 2;
  const std::size_t h2 = samples_s2 / 2;
  plan.parcellations[0].train = {{0, 0, h1}, {1, h2, samples_s2}};
  plan.parcellations[0].test = {{0, h1, samples_s1}, {1, 0, h2}};
  plan.parcellations[1].train = {{0, h1, samples_s1}, {1, 0, h2}};
  plan.parcellations[1].test = {{0, 0, h1}, {1, h2, samples_s2}};
  return plan;
}

FoldSet block_kfold(std::size_t n, std::size_t k) {
  require(k >= 2, "block_kfold", "need at least 2 folds");
  require(n >= k, "block_kfold", "fewer samples than folds");
  FoldSet out;
  out.n = n;
  const std::size_t base = n / k;
  const std::size_t rem = n % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < rem ? 1 : 0);
    out.folds.push_back({start, start + len});
    start += len;
  }
  return out;
}

// ---------------------------------------------------------------------------
// GP-guided search
// ---------------------------------------------------------------------------

OptimizationTrace gp_ucb_optimize(
    const std::function<double(double, double)>& objective, double lambda_lo,
    double lambda_hi, const BoOptions& opts) {
  require(lambda_lo > 0.0 && lambda_hi > lambda_lo, "gp_ucb_optimize",
          "need 0 < lambda_lo < lambda_hi");
  require(opts.initial_design >= 1, "gp_ucb_optimize",
          "initial design must be non-empty");
  require(opts.budget >= opts.initial_design, "gp_ucb_optimize",
          "budget smaller than the initial design");
  require(opts.kappa >= 0.0, "gp_ucb_optimize", "kappa must be >= 0");
  require(opts.candidate_pool >= 1, "gp_ucb_optimize",
          "empty candidate pool");

  const double log_lo = std::log(lambda_lo);
  const double log_span = std::log(lambda_hi) - log_lo;
  OptimizationTrace trace;
  trace.lambda_lo = lambda_lo;
  trace.lambda_hi = lambda_hi;

  auto eval_point = [&](double x1, double x2) {
    OptimizationTrace::Eval e;
    e.x1 = x1;
    e.x2 = x2;
    e.lambda = std::exp(log_lo + x1 * log_span);
    e.alpha = x2;
    const double v = objective(e.lambda, e.alpha);
    if (std::isfinite(v)) {
      e.value = v;
    } else {
      e.failed = true;
      e.value = kNan;
    }
    trace.evals.push_back(e);
  };

  // Low-discrepancy initial design; the seed offsets the sequence start.
  const std::uint64_t init_start =
      rng::derive(opts.seed, 0x696e6974ULL) % (1ULL << 20);
  for (const auto& [x1, x2] : rng::halton2d(opts.initial_design, init_start)) {
    eval_point(x1, x2);
  }

  // Sequential acquisition: fit the surrogate on the successes and evaluate
  // the candidate minimizing mu - kappa*sigma.
  const std::uint64_t cand_start =
      (1ULL << 20) + rng::derive(opts.seed, 0x63616e64ULL) % (1ULL << 20);
  std::uint64_t fallback_index =
      (1ULL << 22) + rng::derive(opts.seed, 0x66616c6cULL) % (1ULL << 20);
  std::size_t round = 0;
  while (trace.evals.size() < opts.budget) {
    Matrix x(0, 2);
    std::vector<double> y;
    for (const auto& e : trace.evals) {
      if (e.failed) continue;
      x.data.push_back(e.x1);
      x.data.push_back(e.x2);
      y.push_back(e.value);
    }
    x.rows = y.size();

    double next_x1 = kNan, next_x2 = kNan;
    if (!y.empty()) {
      const gp::GpModel model = gp::fit_gp(x, y);
      const auto candidates =
          rng::halton2d(opts.candidate_pool,
                        cand_start + std::uint64_t(round) * opts.candidate_pool);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [c1, c2] : candidates) {
        bool seen = false;
        for (const auto& e : trace.evals) {
          if (std::fabs(e.x1 - c1) < 1e-9 && std::fabs(e.x2 - c2) < 1e-9) {
            seen = true;
            break;
          }
        }
        if (seen) continue;
        const double p[2] = {c1, c2};
        const auto post = gp::predict(model, p);
        const double acq = post.mean - opts.kappa * post.sd;
        if (acq < best) {
          best = acq;
          next_x1 = c1;
          next_x2 = c2;
        }
      }
    }
    if (!std::isfinite(next_x1)) {
      // No surrogate (everything failed so far) or the pool was exhausted:
      // continue the low-discrepancy sweep.
      const double h1 = rng::halton(fallback_index, 2);
      const double h2 = rng::halton(fallback_index, 3);
      ++fallback_index;
      next_x1 = h1;
      next_x2 = h2;
    }
    eval_point(next_x1, next_x2);
    ++round;
  }

  // Final pick: the evaluated point with the smallest posterior mean under
  // the surrogate trained on everything that succeeded.
  Matrix x(0, 2);
  std::vector<double> y;
  for (const auto& e : trace.evals) {
    if (e.failed) continue;
    x.data.push_back(e.x1);
    x.data.push_back(e.x2);
    y.push_back(e.value);
  }
  x.rows = y.size();
  require(!y.empty(), "gp_ucb_optimize", "all objective evaluations failed");
  const gp::GpModel model = gp::fit_gp(x, y);

  trace.posterior_means.assign(trace.evals.size(), kNan);
  std::size_t best_idx = trace.evals.size();
  double best_mean = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.evals.size(); ++i) {
    const auto& e = trace.evals[i];
    if (e.failed) continue;
    const double p[2] = {e.x1, e.x2};
    const auto post = gp::predict(model, p);
    trace.posterior_means[i] = post.mean;
    if (post.mean < best_mean) {
      best_mean = post.mean;
      best_idx = i;
    }
  }
  const auto& chosen = trace.evals[best_idx];
  trace.chosen = {chosen.lambda, chosen.alpha};
  trace.chosen_x1 = chosen.x1;
  trace.chosen_x2 = chosen.x2;
  const double p[2] = {chosen.x1, chosen.x2};
  const auto post = gp::predict(model, p);
  trace.chosen_posterior_mean = post.mean;
  trace.chosen_posterior_sd = post.sd;
  return trace;
}

// ---------------------------------------------------------------------------
// assembly
// ---------------------------------------------------------------------------

AssembledDesign assemble_blocks(const std::vector<DataBlock>& blocks,
                                std::size_t lags) {
  require(!blocks.empty(), "assemble_blocks", "no blocks");
  for (const auto& b : blocks) {
    require(b.tensor.n_channels == blocks[0].tensor.n_channels &&
                b.tensor.n_freqs == blocks[0].tensor.n_freqs,
            "assemble_blocks", "blocks disagree on channels or frequencies");
    require(b.target.size() == b.tensor.t_samples, "assemble_blocks",
            "target length must match the tensor");
  }

  AssembledDesign out;
  std::size_t total_rows = 0;
  std::vector<LaggedDesign> parts;
  parts.reserve(blocks.size());
  for (const auto& b : blocks) {
    parts.push_back(features::build_lagged_design(b.tensor, lags));
    total_rows += parts.back().matrix.rows;
  }

  out.design.lags = parts[0].lags;
  out.design.n_groups = parts[0].n_groups;
  out.design.group_index = parts[0].group_index;
  out.design.column_meta = parts[0].column_meta;
  const std::size_t cols = parts[0].matrix.cols;
  out.design.matrix = Matrix(total_rows, cols);
  out.y.reserve(total_rows);

  std::size_t row = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Matrix& m = parts[i].matrix;
    std::memcpy(out.design.matrix.row(row), m.data.data(),
                m.data.size() * sizeof(double));
    row += m.rows;
    const auto yb = features::align_target(blocks[i].target, lags);
    out.y.insert(out.y.end(), yb.begin(), yb.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// nested fit
// ---------------------------------------------------------------------------

namespace {

// Copies a subset of rows (two contiguous stretches) into a standalone
// design that shares the column metadata.
LaggedDesign take_rows(const LaggedDesign& d, std::size_t a_begin,
                       std::size_t a_end, std::size_t b_begin,
                       std::size_t b_end) {
  LaggedDesign out;
  out.lags = d.lags;
  out.n_groups = d.n_groups;
  out.group_index = d.group_index;
  out.column_meta = d.column_meta;
  const std::size_t cols = d.matrix.cols;
  out.matrix = Matrix((a_end - a_begin) + (b_end - b_begin), cols);
  std::size_t row = 0;
  for (std::size_t i = a_begin; i < a_end; ++i, ++row) {
    std::memcpy(out.matrix.row(row), d.matrix.row(i), cols * sizeof(double));
  }
  for (std::size_t i = b_begin; i < b_end; ++i, ++row) {
    std::memcpy(out.matrix.row(row), d.matrix.row(i), cols * sizeof(double));
  }
  return out;
}

std::vector<double> take_values(const std::vector<double>& y,
                                std::size_t a_begin, std::size_t a_end,
                                std::size_t b_begin, std::size_t b_end) {
  std::vector<double> out;
  out.reserve((a_end - a_begin) + (b_end - b_begin));
  out.insert(out.end(), y.begin() + std::ptrdiff_t(a_begin),
             y.begin() + std::ptrdiff_t(a_end));
  out.insert(out.end(), y.begin() + std::ptrdiff_t(b_begin),
             y.begin() + std::ptrdiff_t(b_end));
  return out;
}

double mse_of(const std::vector<double>& pred, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = pred[i] - y[i];
    acc += d * d;
  }
  return acc / double(y.size());
}

}  // namespace

NestedFitResult nested_fit(const AssembledDesign& train,
                           const NestedFitOptions& opts) {
  const std::size_t n = train.design.matrix.rows;
  require(n == train.y.size(), "nested_fit", "row count mismatch");

  NestedFitResult out;
  sgl::FitOptions final_fit = opts.fit;
  if (final_fit.xtx_norm <= 0.0) {
    final_fit.xtx_norm = sgl::design_lipschitz(train.design);
  }

  if (opts.use_fixed) {
    out.model = sgl::fit_sgl(train.design, train.y, opts.fixed, final_fit);
    out.trace.chosen = opts.fixed;
    return out;
  }

  const FoldSet folds = block_kfold(n, opts.k_folds);
  struct FoldData {
    LaggedDesign train_d;
    std::vector<double> y_train;
    LaggedDesign val_d;
    std::vector<double> y_val;
    sgl::FitOptions fit;
  };
  std::vector<FoldData> fold_data(folds.folds.size());
  for (std::size_t f = 0; f < folds.folds.size(); ++f) {
    const auto [vb, ve] = folds.folds[f];
    FoldData& fd = fold_data[f];
    fd.train_d = take_rows(train.design, 0, vb, ve, n);
    fd.y_train = take_values(train.y, 0, vb, ve, n);
    fd.val_d = take_rows(train.design, vb, ve, vb, vb);
    fd.y_val = take_values(train.y, vb, ve, vb, vb);
    fd.fit = opts.fit;
    // One spectral-norm estimate per fold, reused by every search point.
    fd.fit.xtx_norm = sgl::design_lipschitz(fd.train_d);
  }

  const double lambda_hi = sgl::lambda_max(train.design, train.y, 1.0);
  require(lambda_hi > 0.0 && std::isfinite(lambda_hi), "nested_fit",
          "degenerate training target (lambda_max is 0)");
  require(opts.lambda_floor_ratio > 0.0 && opts.lambda_floor_ratio < 1.0,
          "nested_fit", "lambda_floor_ratio must be in (0, 1)");
  const double lambda_lo = opts.lambda_floor_ratio * lambda_hi;

  auto objective = [&](double lambda, double alpha) {
    std::vector<double> fold_mse(fold_data.size(), kNan);
    parallel_for(fold_data.size(), [&](std::size_t f) {
      FoldData& fd = fold_data[f];
      const sgl::SglModel m =
          sgl::fit_sgl(fd.train_d, fd.y_train, {lambda, alpha}, fd.fit);
      fold_mse[f] = mse_of(sgl::predict(m, fd.val_d), fd.y_val);
    });
    double acc = 0.0;
    for (double v : fold_mse) {
      if (!std::isfinite(v)) return kNan;
      acc += v;
    }
    return acc / double(fold_mse.size());
  };

  out.trace = gp_ucb_optimize(objective, lambda_lo, lambda_hi, opts.bo);
  out.model = sgl::fit_sgl(train.design, train.y, out.trace.chosen, final_fit);
  return out;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

ParcellationScore evaluate(const sgl::SglModel& model,
                           const AssembledDesign& test) {
  require(test.design.matrix.rows == test.y.size(), "evaluate",
          "row count mismatch");
  require(test.y.size() >= 2, "evaluate", "need at least 2 test samples");
  const std::vector<double> pred = sgl::predict(model, test.design);
  ParcellationScore score;
  score.mse = mse_of(pred, test.y);
  const stats::PearsonResult pr = stats::pearson(pred, test.y);
  score.r = pr.degenerate ? 0.0 : pr.r;
  score.degenerate = pr.degenerate;
  return score;
}

// ---------------------------------------------------------------------------
// full pipeline
// ---------------------------------------------------------------------------

std::vector<DataBlock> gather_blocks(const SessionData& s1,
                                     const SessionData& s2,
                                     const std::vector<BlockRef>& refs) {
  const SessionData* sessions[2] = {&s1, &s2};
  std::vector<DataBlock> blocks;
  blocks.reserve(refs.size());
  for (const BlockRef& ref : refs) {
    require(ref.session < 2, "gather_blocks", "session index out of range");
    const SessionData& s = *sessions[ref.session];
    require(ref.end <= s.target.size() && ref.begin < ref.end,
            "gather_blocks", "block range out of bounds");
    DataBlock block;
    block.tensor = features::slice_time(s.tensor, ref.begin, ref.end);
    block.target.assign(s.target.begin() + std::ptrdiff_t(ref.begin),
                        s.target.begin() + std::ptrdiff_t(ref.end));
    blocks.push_back(std::move(block));
  }
  return blocks;
}

PipelineResult run_pipeline(const SessionData& s1, const SessionData& s2,
                            const PipelineOptions& opts) {
  s1.tensor.validate("run_pipeline: session 1");
  s2.tensor.validate("run_pipeline: session 2");
  require(s1.target.size() == s1.tensor.t_samples &&
              s2.target.size() == s2.tensor.t_samples,
          "run_pipeline", "target length must match the tensor");
  require(s1.tensor.n_channels == s2.tensor.n_channels &&
              s1.tensor.n_freqs == s2.tensor.n_freqs,
          "run_pipeline", "sessions disagree on channels or frequencies");

  PipelineResult result;
  result.plan = make_split(s1.tensor.t_samples, s2.tensor.t_samples,
                           opts.scheme);
  for (std::size_t p = 0; p < result.plan.parcellations.size(); ++p) {
    const Parcellation& parc = result.plan.parcellations[p];
    const AssembledDesign train =
        assemble_blocks(gather_blocks(s1, s2, parc.train), opts.nested.lags);
    const AssembledDesign test =
        assemble_blocks(gather_blocks(s1, s2, parc.test), opts.nested.lags);

    NestedFitOptions nopts = opts.nested;
    nopts.bo.seed = rng::derive(opts.nested.bo.seed, 0x70697065ULL, p);

    ParcellationOutcome outcome;
    NestedFitResult nf = nested_fit(train, nopts);
    outcome.model = std::move(nf.model);
    outcome.trace = std::move(nf.trace);
    outcome.score = evaluate(outcome.model, test);
    result.report.per_parcellation.push_back(outcome.score);
    result.report.mean_r += outcome.score.r;
    result.report.mean_mse += outcome.score.mse;
    result.parcellations.push_back(std::move(outcome));
  }
  result.report.mean_r /= double(result.parcellations.size());
  result.report.mean_mse /= double(result.parcellations.size());
  return result;
}

}  // namespace lagsynth::cv
