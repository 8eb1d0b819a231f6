#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "doctest.h"
#include "lagsynth/features.hpp"
#include "lagsynth/stats.hpp"
#include "lagsynth/types.hpp"
#include "oracles.hpp"

using namespace lagsynth;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n,
                               double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("stats");

// ---------------------------------------------------------------------------
// pearson
// ---------------------------------------------------------------------------

TEST_CASE("pearson: identity, negation, fixed vectors") {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::pearson(x, x).r == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> neg{-1.0, -2.0, -3.0, -4.0};
  CHECK(stats::pearson(x, neg).r == doctest::Approx(-1.0).epsilon(1e-12));

  // Direct-formula value for the fixed small vectors.
  std::vector<double> yhat{2.0, 4.0, 5.0, 4.0};
  const double want = oracles::pearson_direct(x, yhat);
  CHECK(want == doctest::Approx(0.7181848464596079).epsilon(1e-12));
  CHECK(stats::pearson(x, yhat).r == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("pearson: matches direct formula on random data") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rep % 40;
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    const auto got = stats::pearson(x, y);
    if (got.degenerate) continue;
    CHECK(std::fabs(got.r - oracles::pearson_direct(x, y)) < 1e-12);
    CHECK(got.r >= -1.0);
    CHECK(got.r <= 1.0);
  }
}

TEST_CASE("pearson: degenerate and error cases") {
  std::vector<double> constant{3.0, 3.0, 3.0};
  std::vector<double> varying{1.0, 2.0, 3.0};
  const auto res = stats::pearson(constant, varying);
  CHECK(res.degenerate);
  CHECK(res.r == 0.0);
  CHECK(stats::pearson(varying, constant).degenerate);

  CHECK_THROWS(stats::pearson({1.0, 2.0}, {1.0, 2.0, 3.0}));
  CHECK_THROWS(stats::pearson({1.0}, {2.0}));
}

// ---------------------------------------------------------------------------
// wilcoxon signed-rank
// ---------------------------------------------------------------------------

TEST_CASE("wilcoxon: equal samples give the degenerate p=1 result") {
  std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const auto res = stats::wilcoxon_signed_rank(a, a);
  CHECK(res.degenerate);
  CHECK(res.p_value == 1.0);
  CHECK(res.n_used == 0);
}

TEST_CASE("wilcoxon: fewer than 5 non-zero differences is refused") {
  std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  std::vector<double> b{0.0, 1.0, 2.0, 3.0};
  CHECK_THROWS(stats::wilcoxon_signed_rank(a, b));
  // Zeros are dropped before the count check.
  std::vector<double> a2{1.0, 2.0, 3.0, 4.0, 5.0, 9.0};
  std::vector<double> b2{0.0, 1.0, 2.0, 3.0, 5.0, 9.0};
  CHECK_THROWS(stats::wilcoxon_signed_rank(a2, b2));
}

TEST_CASE("wilcoxon: n=6 all positive differences") {
  std::vector<double> a{2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  std::vector<double> b{1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  const auto res = stats::wilcoxon_signed_rank(a, b);
  CHECK(res.exact);
  CHECK(res.statistic == doctest::Approx(21.0));  // 1+2+...+6
  CHECK(res.p_value == doctest::Approx(0.03125).epsilon(1e-15));
}

TEST_CASE("wilcoxon: exact mode matches enumeration, n <= 12") {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> val(-6, 6);
  for (int rep = 0; rep < 120; ++rep) {
    const std::size_t n = 5 + rep % 8;  // 5..12, integer data forces ties
    std::vector<double> a(n), b(n);
    std::vector<double> diffs;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = val(rng);
      b[i] = val(rng);
      if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
    }
    if (diffs.size() < 5) continue;
    const auto got = stats::wilcoxon_signed_rank(a, b);
    const auto [w_ref, p_ref] = oracles::wilcoxon_enumerate(diffs);
    CHECK(got.exact);
    CHECK(got.statistic == doctest::Approx(w_ref).epsilon(1e-12));
    CHECK(got.p_value == doctest::Approx(p_ref).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon: textbook-style n=10 case matches enumeration") {
  std::vector<double> a{125, 115, 130, 140, 140, 115, 140, 125, 140, 135};
  std::vector<double> b{110, 122, 125, 120, 140, 124, 123, 137, 135, 145};
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
  }
  const auto got = stats::wilcoxon_signed_rank(a, b);
  const auto [w_ref, p_ref] = oracles::wilcoxon_enumerate(diffs);
  CHECK(got.exact);
  CHECK(got.n_used == 9);  // one zero difference dropped
  CHECK(got.statistic == doctest::Approx(w_ref).epsilon(1e-12));
  CHECK(got.p_value == doctest::Approx(p_ref).epsilon(1e-12));
}

TEST_CASE("wilcoxon: normal approximation above n=25") {
  // Shifted pairs: strong positive effect should give a small p.
  std::mt19937_64 rng(33);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = 40;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = noise(rng);
    a[i] = b[i] + 1.0 + 0.3 * noise(rng);
  }
  const auto res = stats::wilcoxon_signed_rank(a, b);
  CHECK(!res.exact);
  CHECK(res.n_used == n);
  CHECK(res.p_value < 1e-4);

  // Hand-computed z for a fixed small-ish configuration with ties.
  std::vector<double> a2(30), b2(30, 0.0);
  for (std::size_t i = 0; i < 30; ++i) {
    a2[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + double(i / 2 % 5));
  }
  const auto res2 = stats::wilcoxon_signed_rank(a2, b2);
  // Ranks of |d| come in averaged tie groups of 6 across values 1..5.
  // W+ collects the even indices: half of each tie group.
  double w = 0.0, var = 30.0 * 31.0 * 61.0 / 24.0;
  for (int g = 0; g < 5; ++g) {
    const double avg = 6.0 * g + 3.5;  // mean rank of group g
    w += 3.0 * avg;                    // three positive members per group
    var -= (6.0 * 6.0 * 6.0 - 6.0) / 48.0;
  }
  const double z = (w - 30.0 * 31.0 / 4.0) / std::sqrt(var);
  const double p = std::erfc(std::fabs(z) / std::sqrt(2.0));
  CHECK(!res2.exact);
  CHECK(res2.statistic == doctest::Approx(w).epsilon(1e-12));
  CHECK(res2.p_value == doctest::Approx(p).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg
// ---------------------------------------------------------------------------

TEST_CASE("bh_fdr: fixed examples") {
  {
    const auto res = stats::bh_fdr({0.0, 0.0, 0.0}, 0.05);
    CHECK(std::all_of(res.reject.begin(), res.reject.end(),
                      [](bool r) { return r; }));
  }
  {
    const auto res = stats::bh_fdr({0.01, 0.04, 0.03, 0.005}, 0.05);
    CHECK(std::all_of(res.reject.begin(), res.reject.end(),
                      [](bool r) { return r; }));
  }
  {
    const auto res = stats::bh_fdr({0.06}, 0.05);
    CHECK(!res.reject[0]);
    CHECK(res.adjusted[0] == doctest::Approx(0.06));
  }
}

TEST_CASE("bh_fdr: matches hand-applied rule on random vectors") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 1 + rep % 25;
    std::vector<double> p(m);
    for (double& v : p) v = rep % 3 == 0 ? std::round(unif(rng) * 8) / 8 : unif(rng);
    const double q = 0.01 + 0.3 * unif(rng);
    const auto got = stats::bh_fdr(p, q);
    const auto reject_ref = oracles::bh_stepup_hand(p, q);
    const auto adjusted_ref = oracles::bh_adjusted_hand(p);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(got.reject[i] == reject_ref[i]);
      CHECK(got.adjusted[i] == doctest::Approx(adjusted_ref[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("bh_fdr: monotonicity in q and in the sorted order") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(12);
    for (double& v : p) v = unif(rng);
    const auto lo = stats::bh_fdr(p, 0.05);
    const auto hi = stats::bh_fdr(p, 0.2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (lo.reject[i]) CHECK(hi.reject[i]);  // rejecting at q rejects at q' > q
    }
    // Adjusted p-values are monotone along the sorted order.
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
      CHECK(lo.adjusted[order[i]] >= lo.adjusted[order[i - 1]] - 1e-15);
    }
  }
  CHECK_THROWS(stats::bh_fdr({0.5, 1.5}, 0.05));
  CHECK_THROWS(stats::bh_fdr({0.5}, 0.0));
}

// ---------------------------------------------------------------------------
// Student-t helpers
// ---------------------------------------------------------------------------

TEST_CASE("student t: cdf symmetry and frozen critical values") {
  CHECK(stats::student_t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-14));
  for (double t : {0.3, 1.0, 2.5}) {
    CHECK(stats::student_t_cdf(-t, 5.0) ==
          doctest::Approx(1.0 - stats::student_t_cdf(t, 5.0)).epsilon(1e-12));
  }
  // Standard two-sided 5% critical values.
  CHECK(stats::student_t_critical(0.05, 1.0) ==
        doctest::Approx(12.706204736).epsilon(1e-7));
  CHECK(stats::student_t_critical(0.05, 4.0) ==
        doctest::Approx(2.776445105).epsilon(1e-7));
  CHECK(stats::student_t_critical(0.05, 9.0) ==
        doctest::Approx(2.262157163).epsilon(1e-7));
  CHECK(stats::student_t_critical(0.05, 14.0) ==
        doctest::Approx(2.144786688).epsilon(1e-7));
  CHECK(stats::student_t_critical(0.01, 9.0) ==
        doctest::Approx(3.249835542).epsilon(1e-7));
}

// ---------------------------------------------------------------------------
// SMR baseline
// ---------------------------------------------------------------------------

namespace {

SpectralFeatureTensor smr_tensor(std::size_t t_samples) {
  SpectralFeatureTensor tensor(t_samples, 4, 3);
  tensor.sample_rate = 1.0 / 1.26;
  tensor.channel_labels = {"Fz", "C3", "C4", "Pz"};
  tensor.freqs = {4.0, 10.0, 22.0};  // band picks 10 and 22 Hz
  return tensor;
}

}  // namespace

TEST_CASE("smr_predict: constant band power gives a constant prediction") {
  auto tensor = smr_tensor(12);
  for (std::size_t t = 0; t < tensor.t_samples; ++t) {
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t f = 0; f < 3; ++f) {
        tensor.at(t, c, f) = (c == 1 || c == 2) && f > 0 ? 0.7 : 0.1;
      }
    }
  }
  const auto pred = stats::smr_predict(tensor, 1.26);
  REQUIRE(pred.size() == tensor.t_samples);
  for (double v : pred) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("smr_predict: hand-built tensor, shift and edge-hold per run") {
  auto tensor = smr_tensor(10);
  tensor.run_boundaries = {0, 6};
  // Band mean at time t is t (channels C3/C4, 10 and 22 Hz ramp together).
  for (std::size_t t = 0; t < 10; ++t) {
    tensor.at(t, 1, 1) = double(t);
    tensor.at(t, 1, 2) = double(t);
    tensor.at(t, 2, 1) = double(t);
    tensor.at(t, 2, 2) = double(t);
  }
  // tr = 1.26 -> shift of round(6.3/1.26) = 5 samples.
  const auto pred = stats::smr_predict(tensor, 1.26);
  // Run 1 covers samples 0..5: held at band[0] until t=5.
  for (std::size_t t = 0; t < 5; ++t) CHECK(pred[t] == doctest::Approx(0.0));
  CHECK(pred[5] == doctest::Approx(0.0));  // 5-5=0
  // Run 2 covers 6..9: all shifted indices fall before the run start.
  for (std::size_t t = 6; t < 10; ++t) {
    CHECK(pred[t] == doctest::Approx(6.0));
  }
}

TEST_CASE("smr_predict: shift rounds to nearest sample") {
  auto tensor = smr_tensor(8);
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t c : {1u, 2u}) {
      tensor.at(t, c, 1) = double(t);
      tensor.at(t, c, 2) = double(t);
    }
  }
  // tr = 2.0 -> 6.3/2 = 3.15 -> shift 3.
  const auto pred = stats::smr_predict(tensor, 2.0);
  CHECK(pred[7] == doctest::Approx(4.0));
  CHECK(pred[2] == doctest::Approx(0.0));
}

TEST_CASE("smr_predict: missing channels are reported by label") {
  auto tensor = smr_tensor(6);
  tensor.channel_labels[2] = "CP4";  // drop C4
  try {
    stats::smr_predict(tensor, 1.26);
    FAIL("expected an error");
  } catch (const std::runtime_error& err) {
    CHECK(std::string(err.what()).find("C4") != std::string::npos);
  }

  auto tensor2 = smr_tensor(6);
  tensor2.freqs = {1.0, 2.0, 40.0};  // nothing in 8..30
  CHECK_THROWS(stats::smr_predict(tensor2, 1.26));
}

// ---------------------------------------------------------------------------
// MUC baseline
// ---------------------------------------------------------------------------

namespace {

// Small lag design over random features; returns the design plus the raw
// tensor column (channel c, freq f, lag m) series for reference.
LaggedDesign random_design(std::mt19937_64& rng, std::size_t t_samples,
                           std::size_t channels, std::size_t freqs,
                           std::size_t lags) {
  SpectralFeatureTensor tensor(t_samples, channels, freqs);
  tensor.sample_rate = 1.0;
  for (std::size_t c = 0; c < channels; ++c) {
    tensor.channel_labels.push_back("ch" + std::to_string(c));
  }
  for (std::size_t f = 0; f < freqs; ++f) tensor.freqs.push_back(double(f + 1));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& v : tensor.data) v = noise(rng);
  return features::build_lagged_design(tensor, lags);
}

}  // namespace

TEST_CASE("muc: y equal to one column selects it with corr 1") {
  std::mt19937_64 rng(66);
  const auto design = random_design(rng, 60, 3, 2, 2);
  const std::size_t want = 7;
  std::vector<double> y(design.matrix.rows);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = design.matrix(i, want);

  const auto model = stats::muc_fit(design, y);
  CHECK(model.selected_col == want);
  CHECK(model.corr[want] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.sel_channel == design.column_meta[want].channel);
  CHECK(model.sel_freq == design.column_meta[want].freq);
  CHECK(model.sel_lag == design.column_meta[want].lag);
  CHECK(model.scale == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(model.offset == doctest::Approx(0.0).epsilon(1e-10));

  const auto pred = stats::muc_predict(model, design);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-10));
  }
  // Affine transform of a column is recovered exactly by the univariate fit.
  for (double& v : y) v = 3.0 * v - 1.0;
  const auto model2 = stats::muc_fit(design, y);
  CHECK(model2.selected_col == want);
  CHECK(model2.scale == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(model2.offset == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("muc: correlations match the direct formula; |corr| <= 1") {
  std::mt19937_64 rng(77);
  const auto design = random_design(rng, 50, 2, 3, 2);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y(design.matrix.rows);
  for (double& v : y) v = noise(rng);

  const auto model = stats::muc_fit(design, y);
  std::vector<double> col(design.matrix.rows);
  for (std::size_t j = 0; j < design.matrix.cols; ++j) {
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = design.matrix(i, j);
    CHECK(model.corr[j] ==
          doctest::Approx(oracles::pearson_direct(col, y)).epsilon(1e-12));
    CHECK(std::fabs(model.corr[j]) <= 1.0);
    CHECK(std::fabs(model.corr[j]) <=
          std::fabs(model.corr[model.selected_col]) + 1e-15);
  }
}

TEST_CASE("muc: duplicated column ties break to the lowest index") {
  std::mt19937_64 rng(88);
  auto design = random_design(rng, 40, 2, 2, 1);
  // Duplicate column 0 into column 3; make both the strongest predictor.
  std::vector<double> y(design.matrix.rows);
  for (std::size_t i = 0; i < y.size(); ++i) {
    design.matrix(i, 3) = design.matrix(i, 0);
    y[i] = design.matrix(i, 0) + 1e-3 * double(i % 3);
  }
  const auto model = stats::muc_fit(design, y);
  CHECK(model.selected_col == 0);
}

TEST_CASE("muc: zero-variance column records correlation 0") {
  std::mt19937_64 rng(99);
  auto design = random_design(rng, 30, 2, 2, 1);
  for (std::size_t i = 0; i < design.matrix.rows; ++i) {
    design.matrix(i, 2) = 5.0;
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y(design.matrix.rows);
  for (double& v : y) v = noise(rng);
  const auto model = stats::muc_fit(design, y);
  CHECK(model.corr[2] == 0.0);
}

TEST_CASE("muc: selection bias, train max |corr| beats test corr on average") {
  // Independent-noise target: selection inflates the train correlation.
  std::mt19937_64 rng(111);
  std::normal_distribution<double> noise(0.0, 1.0);
  int gap_positive = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    auto design = random_design(rng, 400 + 2, 5, 10, 2);  // 100 columns
    std::vector<double> y(design.matrix.rows);
    for (double& v : y) v = noise(rng);

    // Split rows in half: fit on the first, score on the second.
    const std::size_t half = design.matrix.rows / 2;
    LaggedDesign train = design, test = design;
    train.matrix.rows = half;
    train.matrix.data.assign(design.matrix.data.begin(),
                             design.matrix.data.begin() +
                                 std::ptrdiff_t(half * design.matrix.cols));
    test.matrix.rows = design.matrix.rows - half;
    test.matrix.data.assign(design.matrix.data.begin() +
                                std::ptrdiff_t(half * design.matrix.cols),
                            design.matrix.data.end());
    std::vector<double> y_train(y.begin(), y.begin() + std::ptrdiff_t(half));
    std::vector<double> y_test(y.begin() + std::ptrdiff_t(half), y.end());

    const auto model = stats::muc_fit(train, y_train);
    const double train_r = std::fabs(model.corr[model.selected_col]);
    std::vector<double> col(test.matrix.rows);
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = test.matrix(i, model.selected_col);
    }
    const double test_r = std::fabs(oracles::pearson_direct(col, y_test));
    if (train_r > test_r) ++gap_positive;
    if (rep < 30) {
      CHECK(train_r >= 0.05);  // selection pushes train corr well off zero
      CHECK(train_r <= 0.4);
    }
  }
  CHECK(gap_positive >= 90);  // selection-bias gap positive in >= 90% of seeds
}

// ---------------------------------------------------------------------------
// coefficient map aggregation
// ---------------------------------------------------------------------------

TEST_CASE("aggregate: max-abs preserves sign; ties break low; rescale-invariant") {
  const std::size_t C = 2, F = 2, M = 3;
  // Unit values chosen so (c=0, f=0) has max-abs at lag 2 with sign -1.
  std::vector<double> base(C * F * M, 0.0);
  auto idx = [&](std::size_t c, std::size_t f, std::size_t m) {
    return (c * F + f) * M + m;
  };
  base[idx(0, 0, 0)] = 1.0;
  base[idx(0, 0, 1)] = -0.5;
  base[idx(0, 0, 2)] = -2.0;
  base[idx(1, 0, 0)] = 2.0;
  base[idx(0, 1, 1)] = 0.75;
  base[idx(1, 1, 1)] = -0.75;  // |.| tie across channels -> keep channel 0

  // Two units with noise on a third cell so the t map is defined somewhere.
  std::vector<std::vector<double>> units{base, base, base};
  units[1][idx(1, 0, 0)] = 2.5;
  units[2][idx(1, 0, 0)] = 1.5;

  const auto maps = stats::aggregate_coeff_maps(units, C, F, M);
  const auto& fc = maps.freq_channel;
  REQUIRE(fc.rows == F);
  REQUIRE(fc.cols == C);

  // Aggregated (f=0, c=0) value is -2.0 in every unit: masked, zero variance.
  CHECK(fc.masked[0 * C + 0]);
  // (f=0, c=1) varies across units: t defined.
  CHECK(!fc.masked[0 * C + 1]);
  const double mean = (2.0 + 2.5 + 1.5) / 3.0;
  const double sd = std::sqrt(((0.0) * 0.0 + 0.5 * 0.5 + 0.5 * 0.5) / 2.0);
  CHECK(fc.t[0 * C + 1] ==
        doctest::Approx(mean / (sd / std::sqrt(3.0))).epsilon(1e-12));

  // Tie in |.| across channels at (f=1, m=1): channel 0 value (+0.75) wins.
  const auto& fl = maps.freq_lag;
  REQUIRE(fl.rows == F);
  REQUIRE(fl.cols == M);
  CHECK(fl.masked[1 * M + 1]);  // constant 0.75 across units
  // mean_curve over units and channels at f=1: (0.75 + -0.75)/2.
  CHECK(maps.mean_curve[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(maps.mean_curve[0] ==
        doctest::Approx((-2.0 + (2.0 + 2.5 + 1.5) / 3.0) / 2.0).epsilon(1e-12));

  // Positive rescaling leaves the argmax (and the mask/t pattern) unchanged.
  auto scaled = units;
  for (auto& u : scaled) {
    for (double& v : u) v *= 17.0;
  }
  const auto maps2 = stats::aggregate_coeff_maps(scaled, C, F, M);
  for (std::size_t cell = 0; cell < F * C; ++cell) {
    CHECK(maps2.freq_channel.masked[cell] == fc.masked[cell]);
    if (!fc.masked[cell]) {
      CHECK(maps2.freq_channel.t[cell] ==
            doctest::Approx(fc.t[cell]).epsilon(1e-9));
    }
  }
}

TEST_CASE("aggregate: symmetric +1/-1 coefficient has t near zero") {
  const std::size_t C = 1, F = 1, M = 1;
  std::vector<std::vector<double>> units;
  for (int u = 0; u < 8; ++u) {
    units.push_back({u < 4 ? 1.0 : -1.0});
  }
  const auto maps = stats::aggregate_coeff_maps(units, C, F, M);
  CHECK(!maps.freq_channel.masked[0]);
  CHECK(std::fabs(maps.freq_channel.t[0]) < 1e-12);
  CHECK(maps.freq_channel.n_clusters == 0);
}

TEST_CASE("aggregate: identical constant inputs are masked") {
  std::vector<std::vector<double>> units(4, std::vector<double>{0.3, 0.3});
  const auto maps = stats::aggregate_coeff_maps(units, 2, 1, 1);
  CHECK(maps.freq_channel.masked[0]);
  CHECK(maps.freq_channel.masked[1]);
  CHECK(maps.freq_channel.n_clusters == 0);
}

TEST_CASE("aggregate: planted effect attains max |t| in both views") {
  const std::size_t C = 4, F = 3, M = 3;
  std::mt19937_64 rng(123);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::vector<double>> units;
  for (int u = 0; u < 10; ++u) {
    std::vector<double> v(C * F * M);
    for (double& x : v) x = noise(rng);
    v[(2 * F + 1) * M + 2] += 5.0;  // planted at channel 2, freq 1, lag 2
    units.push_back(std::move(v));
  }
  const auto maps = stats::aggregate_coeff_maps(units, C, F, M);

  std::size_t best_fc = 0, best_fl = 0;
  for (std::size_t i = 0; i < F * C; ++i) {
    if (!maps.freq_channel.masked[i] &&
        std::fabs(maps.freq_channel.t[i]) >
            std::fabs(maps.freq_channel.t[best_fc])) {
      best_fc = i;
    }
  }
  for (std::size_t i = 0; i < F * M; ++i) {
    if (!maps.freq_lag.masked[i] &&
        std::fabs(maps.freq_lag.t[i]) > std::fabs(maps.freq_lag.t[best_fl])) {
      best_fl = i;
    }
  }
  CHECK(best_fc == 1 * C + 2);  // (freq 1, channel 2)
  CHECK(best_fl == 1 * M + 2);  // (freq 1, lag 2)

  // The planted cell is supra-threshold and forms a cluster.
  CHECK(maps.freq_channel.n_clusters >= 1);
  CHECK(maps.freq_channel.cluster[1 * C + 2] > 0);
  CHECK(maps.freq_channel.critical_t ==
        doctest::Approx(stats::student_t_critical(0.05, 9.0)));
}

TEST_CASE("aggregate: cluster labeling follows 4-connectivity") {
  // Two units; values arranged so |t| is huge on a plus-shape and on an
  // isolated corner cell, zero elsewhere.
  const std::size_t C = 5, F = 5, M = 1;
  std::vector<std::vector<double>> units(6, std::vector<double>(C * F, 0.0));
  auto set = [&](std::size_t f, std::size_t c, double v) {
    for (std::size_t u = 0; u < units.size(); ++u) {
      units[u][c * F + f] = v + 0.01 * double(u);  // variance across units
    }
  };
  set(1, 2, 3.0);
  set(2, 1, 3.0);
  set(2, 2, 3.0);
  set(2, 3, 3.0);
  set(3, 2, 3.0);
  set(4, 4, -3.0);  // diagonal neighbor only: separate cluster
  const auto maps = stats::aggregate_coeff_maps(units, C, F, M);
  const auto& fc = maps.freq_channel;
  CHECK(fc.n_clusters == 2);
  CHECK(fc.cluster[1 * C + 2] == fc.cluster[2 * C + 1]);
  CHECK(fc.cluster[2 * C + 2] == fc.cluster[3 * C + 2]);
  CHECK(fc.cluster[4 * C + 4] != 0);
  CHECK(fc.cluster[4 * C + 4] != fc.cluster[2 * C + 2]);
}

TEST_CASE("aggregate: shape validation") {
  std::vector<std::vector<double>> one{{1.0, 2.0}};
  CHECK_THROWS(stats::aggregate_coeff_maps(one, 2, 1, 1));
  std::vector<std::vector<double>> bad{{1.0, 2.0}, {1.0}};
  CHECK_THROWS(stats::aggregate_coeff_maps(bad, 2, 1, 1));
}

TEST_SUITE_END();
