#include "llrq/modem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "llrq/errors.hpp"

namespace llrq {

namespace {

// Gray code of an axis level index, axis-MSB first in the returned bits.
std::uint32_t axis_gray(std::uint32_t level_index) { return level_index ^ (level_index >> 1); }

double clamp_llr(double x) { return std::clamp(x, -kLlrMax, kLlrMax); }

// log sum exp over a subset of exponents, with max subtraction
double logsumexp_subset(const std::vector<double>& a, const std::vector<std::uint32_t>& idx) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::uint32_t i : idx) m = std::max(m, a[i]);
  double s = 0.0;
  for (std::uint32_t i : idx) s += std::exp(a[i] - m);
  return m + std::log(s);
}

LlrVector llrs_from_exponents(const std::vector<double>& a, const Constellation& c) {
  LlrVector out(c.bits_per_symbol);
  for (int bit = 0; bit < c.bits_per_symbol; ++bit) {
    double l1 = logsumexp_subset(a, c.subset_bit1[bit]);
    double l0 = logsumexp_subset(a, c.subset_bit0[bit]);
    out[bit] = clamp_llr(l1 - l0);
  }
  return out;
}

}  // namespace

Constellation build_constellation(int k_bits) {
  if (k_bits != 1 && k_bits != 2 && k_bits != 4 && k_bits != 6 && k_bits != 8)
    throw ConfigError("unsupported constellation order k_bits=" + std::to_string(k_bits));

  Constellation c;
  c.bits_per_symbol = k_bits;
  const int n_points = 1 << k_bits;
  c.points.resize(n_points);
  c.labels.resize(n_points);

  if (k_bits == 1) {
    c.points = {{-1.0, 0.0}, {1.0, 0.0}};
    c.labels = {0u, 1u};
  } else {
    const int half = k_bits / 2;
    const int m = 1 << half;  // levels per axis
    // odd-integer grid, normalized to unit average energy afterwards
    std::vector<double> level(m);
    for (int i = 0; i < m; ++i) level[i] = static_cast<double>(2 * i - (m - 1));
    double energy = 0.0;
    int p = 0;
    for (int ii = 0; ii < m; ++ii) {
      for (int qi = 0; qi < m; ++qi, ++p) {
        c.points[p] = {level[ii], level[qi]};
        energy += std::norm(c.points[p]);
        std::uint32_t gi = axis_gray(static_cast<std::uint32_t>(ii));
        std::uint32_t gq = axis_gray(static_cast<std::uint32_t>(qi));
        std::uint32_t label = 0;
        for (int t = 0; t < half; ++t) {
          std::uint32_t ibit = (gi >> (half - 1 - t)) & 1u;
          std::uint32_t qbit = (gq >> (half - 1 - t)) & 1u;
          label |= ibit << t;
          label |= qbit << (half + t);
        }
        c.labels[p] = label;
      }
    }
    double scale = 1.0 / std::sqrt(energy / n_points);
    for (auto& pt : c.points) pt *= scale;
  }

  c.index_of_label.assign(n_points, 0);
  for (int i = 0; i < n_points; ++i) c.index_of_label[c.labels[i]] = static_cast<std::uint32_t>(i);

  c.subset_bit0.assign(k_bits, {});
  c.subset_bit1.assign(k_bits, {});
  for (int bit = 0; bit < k_bits; ++bit) {
    for (int i = 0; i < n_points; ++i) {
      if ((c.labels[i] >> bit) & 1u)
        c.subset_bit1[bit].push_back(static_cast<std::uint32_t>(i));
      else
        c.subset_bit0[bit].push_back(static_cast<std::uint32_t>(i));
    }
  }
  return c;
}

std::vector<int> label_bits(std::uint32_t label, int k_bits) {
  std::vector<int> bits(k_bits);
  for (int i = 0; i < k_bits; ++i) bits[i] = static_cast<int>((label >> i) & 1u);
  return bits;
}

std::complex<double> modulate(const std::vector<int>& bits, const Constellation& c) {
  if (static_cast<int>(bits.size()) != c.bits_per_symbol)
    throw std::invalid_argument("modulate: expected " + std::to_string(c.bits_per_symbol) +
                                " bits, got " + std::to_string(bits.size()));
  std::uint32_t label = 0;
  for (int i = 0; i < c.bits_per_symbol; ++i)
    if (bits[i]) label |= 1u << i;
  return c.points[c.index_of_label[label]];
}

LlrVector compute_llr(const ChannelObservation& obs, const Constellation& c) {
  if (obs.h == std::complex<double>(0.0, 0.0))
    throw DegenerateChannelError("compute_llr: zero channel coefficient");
  if (!(obs.noise_var > 0.0)) throw std::invalid_argument("compute_llr: noise_var must be > 0");

  std::vector<double> a(c.points.size());
  const double inv_var = 1.0 / obs.noise_var;
  for (size_t i = 0; i < c.points.size(); ++i)
    a[i] = -std::norm(obs.r - obs.h * c.points[i]) * inv_var;
  return llrs_from_exponents(a, c);
}

SufficientStat sufficient_stats(const ChannelObservation& obs) {
  if (obs.h == std::complex<double>(0.0, 0.0))
    throw DegenerateChannelError("sufficient_stats: zero channel coefficient");
  std::complex<double> rt = obs.r / obs.h;
  return {std::norm(obs.h) / obs.noise_var, rt.real(), rt.imag()};
}

LlrVector llr_from_stats(const SufficientStat& s, const Constellation& c) {
  if (!(s.g >= 0.0)) throw std::invalid_argument("llr_from_stats: g must be >= 0");
  std::vector<double> a(c.points.size());
  const std::complex<double> rt(s.r_re, s.r_im);
  for (size_t i = 0; i < c.points.size(); ++i) a[i] = -s.g * std::norm(rt - c.points[i]);
  return llrs_from_exponents(a, c);
}

SoftBitVector to_soft_bits(const LlrVector& llrs) {
  SoftBitVector out(llrs.size());
  for (size_t i = 0; i < llrs.size(); ++i) out[i] = std::tanh(0.5 * llrs[i]);
  return out;
}

LlrVector from_soft_bits(const SoftBitVector& soft) {
  LlrVector out(soft.size());
  for (size_t i = 0; i < soft.size(); ++i) {
    double v = soft[i];
    if (v < -1.0 || v > 1.0 || !std::isfinite(v))
      throw std::invalid_argument("from_soft_bits: value outside [-1, 1]");
    // saturated soft bits carry maximal certainty and map straight to the clamp
    if (v >= 1.0 - kAtanhGuard)
      out[i] = kLlrMax;
    else if (v <= -1.0 + kAtanhGuard)
      out[i] = -kLlrMax;
    else
      out[i] = clamp_llr(2.0 * std::atanh(v));
  }
  return out;
}

}  // namespace llrq
