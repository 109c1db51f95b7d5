// Independent reference implementations used only by tests. These stay
// deliberately naive (direct sums, exhaustive scans) so they cannot share a
// failure mode with the library code they check.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "llrq/ldpc.hpp"
#include "llrq/modem.hpp"

namespace oracle {

// Direct two-sum evaluation of the bit LLRs in extended precision, no
// log-sum-exp. Only valid where the exponents stay in range (moderate G).
inline std::vector<double> naive_llr(const llrq::ChannelObservation& obs,
                                     const llrq::Constellation& c) {
  std::vector<double> out(c.bits_per_symbol);
  for (int bit = 0; bit < c.bits_per_symbol; ++bit) {
    long double num = 0.0L, den = 0.0L;
    for (size_t i = 0; i < c.points.size(); ++i) {
      std::complex<double> diff = obs.r - obs.h * c.points[i];
      long double e = expl(-static_cast<long double>(std::norm(diff)) / obs.noise_var);
      if ((c.labels[i] >> bit) & 1u)
        num += e;
      else
        den += e;
    }
    out[bit] = static_cast<double>(logl(num / den));
  }
  return out;
}

// All codewords of a small code by exhaustive search.
inline std::vector<std::vector<std::uint8_t>> enumerate_codewords(const llrq::ParityMatrix& pm) {
  std::vector<std::vector<std::uint8_t>> words;
  for (std::uint32_t v = 0; v < (1u << pm.n); ++v) {
    std::vector<std::uint8_t> cand(pm.n);
    for (int i = 0; i < pm.n; ++i) cand[i] = (v >> i) & 1u;
    if (pm.parity_ok(cand)) words.push_back(cand);
  }
  return words;
}

// Exact bit-MAP decisions from channel LLRs (log P(1)/P(0) convention) by
// summing over the full codebook.
inline std::vector<std::uint8_t> bit_map_decode(const std::vector<double>& llrs,
                                                const std::vector<std::vector<std::uint8_t>>& words) {
  const int n = static_cast<int>(llrs.size());
  std::vector<long double> w(words.size());
  for (size_t j = 0; j < words.size(); ++j) {
    long double acc = 0.0L;
    for (int i = 0; i < n; ++i)
      if (words[j][i]) acc += llrs[i];
    w[j] = acc;
  }
  long double mx = w[0];
  for (auto v : w) mx = std::max(mx, v);
  std::vector<std::uint8_t> out(n);
  for (int i = 0; i < n; ++i) {
    long double p1 = 0.0L, p0 = 0.0L;
    for (size_t j = 0; j < words.size(); ++j) {
      long double e = expl(w[j] - mx);
      if (words[j][i])
        p1 += e;
      else
        p0 += e;
    }
    out[i] = p1 > p0 ? 1 : 0;
  }
  return out;
}

// Exhaustive scan over every quantizer cell: smallest-distance level index
// for the uniform clip quantizer geometry, used to cross-check bin math.
inline double nearest_of(const std::vector<double>& levels, double x) {
  double best = levels[0];
  for (double l : levels)
    if (std::fabs(l - x) < std::fabs(best - x)) best = l;
  return best;
}

}  // namespace oracle
