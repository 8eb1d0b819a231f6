#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "lagsynth/sgl.hpp"
#include "lagsynth/types.hpp"

// Train/test split schemes, block k-fold cross-validation, and the
// GP-guided hyperparameter search that together form the model-selection
// layer around the solver.

namespace lagsynth::cv {

enum class Scheme { inter_session, intra_session };

// Contiguous sample range [begin, end) within one session.
struct BlockRef {
  std::size_t session = 0;  // 0 or 1
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Parcellation {
  std::vector<BlockRef> train;
  std::vector<BlockRef> test;
};

// Two complementary parcellations of the paired sessions. Inter keeps
// sessions apart (train on one, test on the other); intra composes the
// first half of one session with the second half of the other, halves
// split at floor(n/2).
struct SplitPlan {
  Scheme scheme = Scheme::inter_session;
  std::array<Parcellation, 2> parcellations;
  std::size_t samples_s1 = 0;
  std::size_t samples_s2 = 0;
};

SplitPlan make_split(std::size_t samples_s1, std::size_t samples_s2,
                     Scheme scheme);

// k contiguous validation blocks of size n/k (+1 for the first n mod k);
// the training rows of each fold are the complement.
struct FoldSet {
  struct Fold {
    std::size_t val_begin = 0;
    std::size_t val_end = 0;  // half-open
  };
  std::vector<Fold> folds;
  std::size_t n = 0;
};

FoldSet block_kfold(std::size_t n, std::size_t k);

// ---------------------------------------------------------------------------
// GP-guided hyperparameter search
// ---------------------------------------------------------------------------

struct BoOptions {
  std::size_t budget = 40;          // total objective evaluations
  std::size_t initial_design = 8;   // low-discrepancy seeding points
  std::size_t candidate_pool = 2000;  // acquisition candidates per round
  double kappa = 0.1;               // exploration weight in mu - kappa*sigma
  std::uint64_t seed = 0;
};

struct OptimizationTrace {
  struct Eval {
    double lambda = 0.0;
    double alpha = 0.0;
    double x1 = 0.0;  // normalized log-lambda in [0, 1]
    double x2 = 0.0;  // alpha
    double value = 0.0;  // mean validation MSE; meaningless when failed
    bool failed = false;
  };
  std::vector<Eval> evals;
  // Posterior mean of the final surrogate at each evaluation (NaN for
  // failed points); `chosen` minimizes it.
  std::vector<double> posterior_means;
  sgl::HyperParams chosen;
  double chosen_x1 = 0.0, chosen_x2 = 0.0;
  double chosen_posterior_mean = 0.0;
  double chosen_posterior_sd = 0.0;
  double lambda_lo = 0.0, lambda_hi = 0.0;
};

// Minimizes `objective(lambda, alpha)` over lambda in [lambda_lo,
// lambda_hi] (log scale) x alpha in [0, 1]: low-discrepancy initial design,
// then sequential acquisition at the minimizer of the GP lower confidence
// bound mu - kappa*sigma. Returns the evaluated point with the smallest
// posterior mean. Non-finite objective values are recorded as failed and
// excluded from the surrogate; deterministic given the seed.
OptimizationTrace gp_ucb_optimize(
    const std::function<double(double, double)>& objective, double lambda_lo,
    double lambda_hi, const BoOptions& opts);

// ---------------------------------------------------------------------------
// nested fit and evaluation
// ---------------------------------------------------------------------------

// One contiguous stretch of data: feature tensor plus aligned target.
struct DataBlock {
  SpectralFeatureTensor tensor;
  std::vector<double> target;
};

struct AssembledDesign {
  LaggedDesign design;
  std::vector<double> y;
};

// Lag-stacks each block independently (so no row reaches across a block
// seam) and concatenates the rows. Blocks must agree on channels and
// frequencies.
AssembledDesign assemble_blocks(const std::vector<DataBlock>& blocks,
                                std::size_t lags);

struct NestedFitOptions {
  std::size_t lags = 1;
  std::size_t k_folds = 3;
  BoOptions bo;
  sgl::FitOptions fit;
  // Search floor as a fraction of lambda_max.
  double lambda_floor_ratio = 1e-4;
  // Skip the search and fit `fixed` directly.
  bool use_fixed = false;
  sgl::HyperParams fixed;
};

struct NestedFitResult {
  sgl::SglModel model;
  OptimizationTrace trace;
};

// Chooses (lambda, alpha) by gp_ucb_optimize over the mean validation MSE
// across block k-folds of the assembled training rows, then refits on the
// entire training set with the chosen hyperparameters.
NestedFitResult nested_fit(const AssembledDesign& train,
                           const NestedFitOptions& opts);

struct ParcellationScore {
  double r = 0.0;
  double mse = 0.0;
  // Zero-variance prediction (or truth); r is reported as 0.
  bool degenerate = false;
};

ParcellationScore evaluate(const sgl::SglModel& model,
                           const AssembledDesign& test);

struct PredictionReport {
  std::vector<ParcellationScore> per_parcellation;
  double mean_r = 0.0;
  double mean_mse = 0.0;
};

// ---------------------------------------------------------------------------
// full pipeline over a session pair
// ---------------------------------------------------------------------------

struct SessionData {
  SpectralFeatureTensor tensor;
  std::vector<double> target;
};

// Materializes the blocks referenced by one side of a parcellation: a
// tensor slice plus the aligned target span per BlockRef.
std::vector<DataBlock> gather_blocks(const SessionData& s1,
                                     const SessionData& s2,
                                     const std::vector<BlockRef>& refs);

struct PipelineOptions {
  Scheme scheme = Scheme::inter_session;
  NestedFitOptions nested;
};

struct ParcellationOutcome {
  sgl::SglModel model;
  OptimizationTrace trace;
  ParcellationScore score;
};

struct PipelineResult {
  SplitPlan plan;
  std::vector<ParcellationOutcome> parcellations;
  PredictionReport report;
};

// Splits the session pair, runs the nested fit per parcellation (with a
// parcellation-derived optimizer seed), evaluates on the held-out blocks,
// and averages the scores. This is the single entry point shared by
// observed-data fits and surrogate re-runs.
PipelineResult run_pipeline(const SessionData& s1, const SessionData& s2,
                            const PipelineOptions& opts);

using PipelineFn = std::function<PipelineResult(
    const SessionData&, const SessionData&, const PipelineOptions&)>;

}  // namespace lagsynth::cv
