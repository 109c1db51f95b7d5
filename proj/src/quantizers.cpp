#include "llrq/quantizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "llrq/errors.hpp"

namespace llrq {

void validate(const UniformQuantizerSpec& spec) {
  if (!(spec.delta > 0.0)) throw ConfigError("quantizer delta must be > 0");
  if (spec.n_bits < 1 || spec.n_bits > 16) throw ConfigError("quantizer n_bits must be in [1, 16]");
}

double quantizer_level(int index, const UniformQuantizerSpec& spec) {
  const int levels = spec.interior_levels();
  if (index == 0) return -spec.delta;
  if (index == levels + 1) return spec.delta;
  if (index < 0 || index > levels + 1) throw std::invalid_argument("quantizer_level: bad index");
  const int k = index - 1;
  return spec.delta * static_cast<double>(-levels + 2 * k + 1) / static_cast<double>(levels);
}

QuantizedValue quantize_uniform(double x, const UniformQuantizerSpec& spec) {
  validate(spec);
  const int levels = spec.interior_levels();
  // saturation is inclusive at |x| == delta so every output level is a fixed
  // point of the map
  if (x >= spec.delta) {
    if (spec.fold_saturation) return {levels, quantizer_level(levels, spec)};
    return {levels + 1, spec.delta};
  }
  if (x <= -spec.delta) {
    if (spec.fold_saturation) return {1, quantizer_level(1, spec)};
    return {0, -spec.delta};
  }
  // bin width delta / 2^(Nb-1); interior boundaries resolve to the upper cell
  const double width = spec.delta / static_cast<double>(levels / 2);
  int k = static_cast<int>(std::floor((x + spec.delta) / width));
  k = std::clamp(k, 0, levels - 1);
  return {k + 1, quantizer_level(k + 1, spec)};
}

QuantizedTriple quantize_latent(const std::array<double, 3>& z, const UniformQuantizerSpec& spec) {
  QuantizedTriple out{};
  for (int i = 0; i < 3; ++i) {
    auto q = quantize_uniform(z[i], spec);
    out.index[i] = q.index;
    out.level[i] = q.level;
  }
  return out;
}

LlrVector scalar_llr_baseline(const LlrVector& llrs, int n_bits, double delta) {
  UniformQuantizerSpec spec{delta, n_bits, false};
  validate(spec);
  LlrVector out(llrs.size());
  for (size_t i = 0; i < llrs.size(); ++i) out[i] = quantize_uniform(llrs[i], spec).level;
  return out;
}

double apply_codebook(double x, const ScalarCodebook& cb) {
  auto it = std::lower_bound(cb.thresholds.begin(), cb.thresholds.end(), x);
  return cb.levels[static_cast<size_t>(it - cb.thresholds.begin())];
}

namespace {

double sigmoid(double l) { return 1.0 / (1.0 + std::exp(-l)); }

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

// MI in bits from per-cell posterior-weighted counts: n[c] samples in cell c
// of which s[c] expected-ones.
double mi_from_cells(const std::vector<double>& ones, const std::vector<double>& counts,
                     double total) {
  double total_ones = 0.0;
  for (double s : ones) total_ones += s;
  const double h_prior = binary_entropy(total_ones / total);
  double h_cond = 0.0;
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] <= 0.0) continue;
    h_cond += counts[c] / total * binary_entropy(ones[c] / counts[c]);
  }
  return h_prior - h_cond;
}

// Boundary between adjacent reconstruction LLRs l1 < l2: the posterior p at
// which assigning to either cell changes the soft cross-entropy equally.
double kl_boundary(double l1, double l2) {
  if (!(l2 - l1 > 1e-12)) return 0.5 * (l1 + l2);
  double a = std::log(sigmoid(l2) / sigmoid(l1));
  double b = std::log((1.0 - sigmoid(l2)) / (1.0 - sigmoid(l1)));
  double p = b / (b - a);
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  return std::log(p / (1.0 - p));
}

}  // namespace

double estimate_cell_mi(const std::vector<double>& llrs, const ScalarCodebook& cb) {
  const size_t n_cells = cb.levels.size();
  std::vector<double> ones(n_cells, 0.0), counts(n_cells, 0.0);
  for (double l : llrs) {
    auto it = std::lower_bound(cb.thresholds.begin(), cb.thresholds.end(), l);
    size_t c = static_cast<size_t>(it - cb.thresholds.begin());
    ones[c] += sigmoid(l);
    counts[c] += 1.0;
  }
  return mi_from_cells(ones, counts, static_cast<double>(llrs.size()));
}

ScalarCodebook fit_max_mi(const std::vector<LabeledLlr>& samples, int n_levels,
                          const MaxMiOptions& opts) {
  if (n_levels < 1) throw std::invalid_argument("fit_max_mi: n_levels must be >= 1");
  if (samples.empty()) throw FitError("fit_max_mi: no samples");
  bool saw0 = false, saw1 = false;
  for (const auto& s : samples) (s.bit ? saw1 : saw0) = true;
  if (!saw0 || !saw1) throw FitError("fit_max_mi: degenerate samples (single bit value)");

  std::vector<double> llrs(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) llrs[i] = samples[i].llr;
  std::sort(llrs.begin(), llrs.end());

  // prefix sums over the sorted LLRs for O(log n) cell statistics
  std::vector<double> pre_ones(llrs.size() + 1, 0.0);
  for (size_t i = 0; i < llrs.size(); ++i) pre_ones[i + 1] = pre_ones[i] + sigmoid(llrs[i]);

  ScalarCodebook cb;
  cb.levels.resize(n_levels);
  for (int j = 0; j < n_levels; ++j)
    cb.levels[j] = opts.init_lo + (opts.init_hi - opts.init_lo) * (j + 0.5) / n_levels;
  cb.thresholds.assign(n_levels - 1, 0.0);

  ScalarCodebook best = cb;
  double best_mi = -1.0;
  double prev_mi = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;

  auto cell_range = [&](double lo_thr, double hi_thr) {
    // samples with lo_thr < L <= hi_thr
    size_t lo = std::upper_bound(llrs.begin(), llrs.end(), lo_thr) - llrs.begin();
    size_t hi = std::upper_bound(llrs.begin(), llrs.end(), hi_thr) - llrs.begin();
    return std::pair<size_t, size_t>(lo, hi);
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // assignment: exact soft-divergence boundaries between adjacent levels
    for (int j = 0; j + 1 < n_levels; ++j)
      cb.thresholds[j] = kl_boundary(cb.levels[j], cb.levels[j + 1]);
    for (int j = 1; j + 1 < n_levels; ++j)
      cb.thresholds[j] = std::max(cb.thresholds[j], cb.thresholds[j - 1]);

    // centroid update + MI bookkeeping
    std::vector<double> ones(n_levels, 0.0), counts(n_levels, 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_levels; ++j) {
      double lo = j == 0 ? -inf : cb.thresholds[j - 1];
      double hi = j == n_levels - 1 ? inf : cb.thresholds[j];
      auto [a, b] = cell_range(lo, hi);
      counts[j] = static_cast<double>(b - a);
      ones[j] = pre_ones[b] - pre_ones[a];
      if (counts[j] > 0.0) {
        double p = std::clamp(ones[j] / counts[j], 1e-15, 1.0 - 1e-15);
        cb.levels[j] = std::log(p / (1.0 - p));
      }
    }
    double mi = mi_from_cells(ones, counts, static_cast<double>(llrs.size()));
    if (mi > best_mi) {
      best_mi = mi;
      best.thresholds = cb.thresholds;
      best.levels = cb.levels;
    }
    trace.push_back(best_mi);
    if (mi - prev_mi < opts.tol) break;
    prev_mi = mi;
  }
  best.trace = std::move(trace);
  return best;
}

ScalarCodebook fit_lloyd(std::vector<double> samples, int n_levels, int max_iter) {
  if (n_levels < 1) throw std::invalid_argument("fit_lloyd: n_levels must be >= 1");
  if (samples.empty()) throw FitError("fit_lloyd: no samples");
  std::sort(samples.begin(), samples.end());
  const size_t n = samples.size();

  std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) {
    pre[i + 1] = pre[i] + samples[i];
    pre2[i + 1] = pre2[i] + samples[i] * samples[i];
  }

  ScalarCodebook cb;
  cb.levels.resize(n_levels);
  // quantile init
  for (int j = 0; j < n_levels; ++j)
    cb.levels[j] = samples[std::min(n - 1, static_cast<size_t>((j + 0.5) / n_levels * n))];
  cb.thresholds.assign(n_levels - 1, 0.0);

  double prev_dist = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    for (int j = 0; j + 1 < n_levels; ++j)
      cb.thresholds[j] = 0.5 * (cb.levels[j] + cb.levels[j + 1]);
    double dist = 0.0;
    size_t lo = 0;
    for (int j = 0; j < n_levels; ++j) {
      size_t hi = j == n_levels - 1
                      ? n
                      : std::upper_bound(samples.begin(), samples.end(), cb.thresholds[j]) -
                            samples.begin();
      if (hi > lo) {
        double cnt = static_cast<double>(hi - lo);
        double mean = (pre[hi] - pre[lo]) / cnt;
        cb.levels[j] = mean;
        dist += (pre2[hi] - pre2[lo]) - cnt * mean * mean;
      }
      lo = hi;
    }
    dist /= static_cast<double>(n);
    cb.trace.push_back(dist);
    if (prev_dist - dist < 1e-12 * std::max(1.0, prev_dist)) break;
    prev_dist = dist;
  }
  return cb;
}

ScalarCodebook fit_rayleigh_quantizer(int n_levels, RngStream rng, std::size_t n_samples,
                                      double scale) {
  std::vector<double> amp(n_samples);
  for (auto& a : amp) a = std::abs(rng.next_cgaussian(1.0)) * scale;
  return fit_lloyd(std::move(amp), n_levels);
}

LlrVector quantize_stats_baseline(const SufficientStat& s, const StatsQuantizer& q,
                                  const Constellation& c) {
  SufficientStat rec = s;
  if (q.amplitude) {
    double a = apply_codebook(std::sqrt(s.g), *q.amplitude);
    rec.g = a * a;
  }
  if (q.r_spec) {
    rec.r_re = quantize_uniform(s.r_re, *q.r_spec).level;
    rec.r_im = quantize_uniform(s.r_im, *q.r_spec).level;
  }
  return llr_from_stats(rec, c);
}

ReconstructionLut build_lut(const MlpParams& p, const UniformQuantizerSpec& spec) {
  validate(spec);
  if (spec.n_bits > 8) {
    const double cells = std::pow(static_cast<double>(spec.interior_levels() + 2), 3.0);
    throw ConfigError("build_lut: n_bits=" + std::to_string(spec.n_bits) + " needs " +
                      std::to_string(static_cast<long long>(cells * p.k * sizeof(double))) +
                      " bytes; refusing above 8 bits");
  }
  ReconstructionLut lut;
  lut.spec = spec;
  lut.side = spec.interior_levels() + 2;
  lut.k = p.k;
  lut.values.resize(static_cast<std::size_t>(lut.side) * lut.side * lut.side * p.k);

  Mat z(1, 3);
  std::size_t flat = 0;
  for (int i0 = 0; i0 < lut.side; ++i0) {
    for (int i1 = 0; i1 < lut.side; ++i1) {
      for (int i2 = 0; i2 < lut.side; ++i2, ++flat) {
        z.at(0, 0) = quantizer_level(i0, spec);
        z.at(0, 1) = quantizer_level(i1, spec);
        z.at(0, 2) = quantizer_level(i2, spec);
        Mat out = decoder_forward(z, p);
        std::copy(out.d.begin(), out.d.end(), lut.values.begin() + flat * p.k);
      }
    }
  }
  return lut;
}

}  // namespace llrq
