#include "lagsynth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "lagsynth/linalg.hpp"

namespace lagsynth::stats {

namespace {

// Variance at or below this relative floor is treated as zero.
bool negligible_variance(double var, double mean) {
  return var <= 1e-24 * std::max(1.0, mean * mean);
}

}  // namespace

// ---------------------------------------------------------------------------
// Pearson correlation
// ---------------------------------------------------------------------------

PearsonResult pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  require(x.size() == y.size(), "pearson", "length mismatch");
  require(x.size() >= 2, "pearson", "need at least 2 samples");
  const std::size_t n = x.size();
  const double mx = linalg::mean(x.data(), n);
  const double my = linalg::mean(y.data(), n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  PearsonResult out;
  if (negligible_variance(sxx / double(n), mx) ||
      negligible_variance(syy / double(n), my)) {
    out.degenerate = true;
    return out;
  }
  out.r = sxy / std::sqrt(sxx * syy);
  out.r = std::clamp(out.r, -1.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test
// ---------------------------------------------------------------------------

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  require(a.size() == b.size(), "wilcoxon_signed_rank", "length mismatch");
  std::vector<double> diff;
  diff.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diff.push_back(d);
  }

  WilcoxonResult out;
  if (diff.empty()) {
    out.degenerate = true;
    out.p_value = 1.0;
    return out;
  }
  require(diff.size() >= 5, "wilcoxon_signed_rank",
          "need at least 5 non-zero differences, got " +
              std::to_string(diff.size()));

  const std::size_t n = diff.size();
  out.n_used = n;

  // Average ranks of |d|, ascending.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::fabs(diff[i]) < std::fabs(diff[j]);
  });
  std::vector<double> rank(n, 0.0);
  std::vector<std::size_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n &&
           std::fabs(diff[order[j]]) == std::fabs(diff[order[i]])) {
      ++j;
    }
    const double avg = 0.5 * double(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
    tie_sizes.push_back(j - i);
    i = j;
  }

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diff[i] > 0.0) w_plus += rank[i];
  }
  out.statistic = w_plus;

  if (n <= 25) {
    out.exact = true;
    // Doubled ranks are integers even under averaging; convolve subset sums
    // over all 2^n sign assignments.
    std::vector<long long> r2(n);
    long long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = std::llround(2.0 * rank[i]);
      total += r2[i];
    }
    std::vector<double> count(std::size_t(total) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long long w = total; w >= r2[i]; --w) {
        count[std::size_t(w)] += count[std::size_t(w - r2[i])];
      }
    }
    const long long obs = std::llround(2.0 * w_plus);
    const double denom = std::ldexp(1.0, int(n));  // 2^n
    double lo = 0.0, hi = 0.0;
    for (long long w = 0; w <= total; ++w) {
      if (w <= obs) lo += count[std::size_t(w)];
      if (w >= obs) hi += count[std::size_t(w)];
    }
    out.p_value = std::min(1.0, 2.0 * std::min(lo, hi) / denom);
    return out;
  }

  // Tie-corrected normal approximation, no continuity correction.
  const double dn = double(n);
  const double mean = dn * (dn + 1.0) / 4.0;
  double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
  for (std::size_t t : tie_sizes) {
    const double dt = double(t);
    var -= (dt * dt * dt - dt) / 48.0;
  }
  if (var <= 0.0) {
    out.p_value = 1.0;
    return out;
  }
  const double z = (w_plus - mean) / std::sqrt(var);
  out.p_value = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
  return out;
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg FDR
// ---------------------------------------------------------------------------

BhResult bh_fdr(const std::vector<double>& pvals, double q) {
  require(!pvals.empty(), "bh_fdr", "empty p-value list");
  require(q > 0.0 && q < 1.0, "bh_fdr", "q must be in (0, 1)");
  for (double p : pvals) {
    require(p >= 0.0 && p <= 1.0 && std::isfinite(p), "bh_fdr",
            "p-values must lie in [0, 1]");
  }
  const std::size_t m = pvals.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) {
                     return pvals[i] < pvals[j];
                   });

  BhResult out;
  out.reject.assign(m, false);
  out.adjusted.assign(m, 1.0);

  // Step-up: largest i with p_(i) <= q * i / m; reject everything at or
  // below it.
  std::size_t cutoff = 0;  // 1-based rank of the last rejection
  for (std::size_t i = 0; i < m; ++i) {
    if (pvals[order[i]] <= q * double(i + 1) / double(m)) cutoff = i + 1;
  }
  for (std::size_t i = 0; i < cutoff; ++i) out.reject[order[i]] = true;

  double running = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    const double adj =
        std::min(1.0, pvals[order[i]] * double(m) / double(i + 1));
    running = std::min(running, adj);
    out.adjusted[order[i]] = running;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Student-t distribution
// ---------------------------------------------------------------------------

namespace {

// Continued fraction for the regularized incomplete beta function.
double beta_cf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 3e-16;
  const double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double t, double df) {
  require(df > 0.0, "student_t_cdf", "df must be positive");
  const double x = df / (df + t * t);
  const double tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_critical(double alpha_two_sided, double df) {
  require(alpha_two_sided > 0.0 && alpha_two_sided < 1.0,
          "student_t_critical", "alpha must be in (0, 1)");
  require(df > 0.0, "student_t_critical", "df must be positive");
  const double target = 1.0 - 0.5 * alpha_two_sided;
  double lo = 0.0, hi = 1.0;
  while (student_t_cdf(hi, df) < target) {
    hi *= 2.0;
    require(hi < 1e12, "student_t_critical", "quantile bracket overflow");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Sensorimotor-rhythm baseline
// ---------------------------------------------------------------------------

std::vector<double> smr_predict(const SpectralFeatureTensor& tensor,
                                double tr) {
  tensor.validate("smr_predict");
  require(tr > 0.0, "smr_predict", "tr must be positive");

  std::vector<std::size_t> chans;
  for (const char* want : {"C3", "C4"}) {
    bool found = false;
    for (std::size_t c = 0; c < tensor.n_channels; ++c) {
      if (tensor.channel_labels[c] == want) {
        chans.push_back(c);
        found = true;
        break;
      }
    }
    require(found, "smr_predict",
            std::string("channel ") + want + " not present");
  }
  std::vector<std::size_t> band;
  for (std::size_t f = 0; f < tensor.n_freqs; ++f) {
    if (tensor.freqs[f] >= 8.0 - 1e-9 && tensor.freqs[f] <= 30.0 + 1e-9) {
      band.push_back(f);
    }
  }
  require(!band.empty(), "smr_predict",
          "no frequencies inside the 8-30 Hz band");

  const std::size_t n = tensor.t_samples;
  std::vector<double> power(n, 0.0);
  const double inv = 1.0 / double(chans.size() * band.size());
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t c : chans) {
      for (std::size_t f : band) acc += tensor.at(t, c, f);
    }
    power[t] = acc * inv;
  }

  // Shift forward to meet the delayed response; hold the first value of each
  // run where the shifted index would cross the run start.
  const std::size_t shift = std::size_t(std::lround(6.3 / tr));
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < tensor.n_runs(); ++r) {
    const auto [begin, end] = tensor.run_extent(r);
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t src = (t >= begin + shift) ? t - shift : begin;
      out[t] = power[src];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Massive univariate correlation baseline
// ---------------------------------------------------------------------------

MucModel muc_fit(const LaggedDesign& design, const std::vector<double>& y) {
  const Matrix& x = design.matrix;
  require(x.rows == y.size(), "muc_fit", "row count mismatch");
  require(x.rows >= 2 && x.cols >= 1, "muc_fit", "design too small");
  require(design.n_groups > 0 && design.lags > 0, "muc_fit",
          "design missing group metadata");

  MucModel model;
  model.channels = design.n_groups;
  model.lags = design.lags;
  model.freqs = x.cols / (model.channels * model.lags);
  require(model.channels * model.freqs * model.lags == x.cols, "muc_fit",
          "column count inconsistent with metadata");

  const std::size_t n = x.rows;
  std::vector<double> col(n);
  model.corr.assign(x.cols, 0.0);
  for (std::size_t j = 0; j < x.cols; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = x(i, j);
    const PearsonResult pr = pearson(col, y);
    model.corr[j] = pr.degenerate ? 0.0 : pr.r;
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < x.cols; ++j) {
    if (std::fabs(model.corr[j]) > std::fabs(model.corr[best])) best = j;
  }
  model.selected_col = best;
  model.sel_channel = design.column_meta[best].channel;
  model.sel_freq = design.column_meta[best].freq;
  model.sel_lag = design.column_meta[best].lag;

  for (std::size_t i = 0; i < n; ++i) col[i] = x(i, best);
  const double mx = linalg::mean(col.data(), n);
  const double my = linalg::mean(y.data(), n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (col[i] - mx) * (col[i] - mx);
    sxy += (col[i] - mx) * (y[i] - my);
  }
  if (negligible_variance(sxx / double(n), mx)) {
    model.scale = 0.0;
    model.offset = my;
  } else {
    model.scale = sxy / sxx;
    model.offset = my - model.scale * mx;
  }
  return model;
}

std::vector<double> muc_predict(const MucModel& model,
                                const LaggedDesign& design) {
  const Matrix& x = design.matrix;
  require(model.selected_col < x.cols, "muc_predict",
          "selected column out of range");
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out[i] = model.scale * x(i, model.selected_col) + model.offset;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coefficient map aggregation
// ---------------------------------------------------------------------------

namespace {

// Builds the t map over a rows x cols grid from per-unit aggregated values
// (unit-major: vals[u * rows * cols + cell]).
TMap build_tmap(const std::vector<double>& vals, std::size_t n_units,
                std::size_t rows, std::size_t cols, double alpha) {
  TMap map;
  map.rows = rows;
  map.cols = cols;
  map.t.assign(rows * cols, 0.0);
  map.masked.assign(rows * cols, false);
  map.critical_t = student_t_critical(alpha, double(n_units - 1));

  const std::size_t cells = rows * cols;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double mean = 0.0;
    for (std::size_t u = 0; u < n_units; ++u) {
      mean += vals[u * cells + cell];
    }
    mean /= double(n_units);
    double ss = 0.0;
    for (std::size_t u = 0; u < n_units; ++u) {
      const double d = vals[u * cells + cell] - mean;
      ss += d * d;
    }
    const double var = ss / double(n_units - 1);  // sample variance
    if (negligible_variance(var, mean)) {
      map.masked[cell] = true;
      continue;
    }
    map.t[cell] = mean / std::sqrt(var / double(n_units));
  }

  // 4-connected components of supra-threshold cells, labeled in row-major
  // discovery order.
  map.cluster.assign(cells, 0);
  auto above = [&](std::size_t cell) {
    return !map.masked[cell] && std::fabs(map.t[cell]) > map.critical_t;
  };
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (!above(cell) || map.cluster[cell] != 0) continue;
    ++next;
    stack.assign(1, cell);
    map.cluster[cell] = next;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const std::size_t r = cur / cols, c = cur % cols;
      const std::size_t neigh[4] = {
          r > 0 ? cur - cols : cur, r + 1 < rows ? cur + cols : cur,
          c > 0 ? cur - 1 : cur, c + 1 < cols ? cur + 1 : cur};
      for (std::size_t nb : neigh) {
        if (nb != cur && above(nb) && map.cluster[nb] == 0) {
          map.cluster[nb] = next;
          stack.push_back(nb);
        }
      }
    }
  }
  map.n_clusters = std::size_t(next);
  return map;
}

}  // namespace

TMapSet aggregate_coeff_maps(const std::vector<std::vector<double>>& units,
                             std::size_t channels, std::size_t freqs,
                             std::size_t lags, double alpha) {
  const std::size_t n_units = units.size();
  require(n_units >= 2, "aggregate_coeff_maps",
          "need at least 2 units for a t test");
  const std::size_t len = channels * freqs * lags;
  require(len > 0, "aggregate_coeff_maps", "empty tensor shape");
  for (const auto& u : units) {
    require(u.size() == len, "aggregate_coeff_maps",
            "unit tensor size mismatch");
  }

  auto at = [&](const std::vector<double>& u, std::size_t c, std::size_t f,
                std::size_t m) { return u[(c * freqs + f) * lags + m]; };
  // Signed value of maximum magnitude; strict comparison keeps the lowest
  // index on ties.
  auto max_abs = [](double best, double cand) {
    return std::fabs(cand) > std::fabs(best) ? cand : best;
  };

  std::vector<double> fc(n_units * freqs * channels, 0.0);
  std::vector<double> fl(n_units * freqs * lags, 0.0);
  for (std::size_t u = 0; u < n_units; ++u) {
    for (std::size_t f = 0; f < freqs; ++f) {
      for (std::size_t c = 0; c < channels; ++c) {
        double v = at(units[u], c, f, 0);
        for (std::size_t m = 1; m < lags; ++m) {
          v = max_abs(v, at(units[u], c, f, m));
        }
        fc[(u * freqs + f) * channels + c] = v;
      }
      for (std::size_t m = 0; m < lags; ++m) {
        double v = at(units[u], 0, f, m);
        for (std::size_t c = 1; c < channels; ++c) {
          v = max_abs(v, at(units[u], c, f, m));
        }
        fl[(u * freqs + f) * lags + m] = v;
      }
    }
  }

  TMapSet out;
  out.alpha = alpha;
  out.freq_channel = build_tmap(fc, n_units, freqs, channels, alpha);
  out.freq_lag = build_tmap(fl, n_units, freqs, lags, alpha);
  out.mean_curve.assign(freqs, 0.0);
  for (std::size_t u = 0; u < n_units; ++u) {
    for (std::size_t f = 0; f < freqs; ++f) {
      for (std::size_t c = 0; c < channels; ++c) {
        out.mean_curve[f] += fc[(u * freqs + f) * channels + c];
      }
    }
  }
  for (double& v : out.mean_curve) v /= double(n_units * channels);
  return out;
}

}  // namespace lagsynth::stats
