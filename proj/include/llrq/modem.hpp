#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace llrq {

using LlrVector = std::vector<double>;
using SoftBitVector = std::vector<double>;

// LLR magnitudes are clamped here; tanh(L_max/2) is already 1.0 in double
// precision, so larger values carry no decoder information.
inline constexpr double kLlrMax = 40.0;
// atanh guard when inverting soft bits.
inline constexpr double kAtanhGuard = 1e-12;

// Gray-labeled unit-energy constellation. Label bit value 0 maps to the
// negative coordinate of its axis. For square QAM the first K/2 label bits
// select the in-phase level (axis-MSB first), the rest the quadrature level.
struct Constellation {
  int bits_per_symbol = 0;                   // K
  std::vector<std::complex<double>> points;  // 2^K points, mean |p|^2 == 1
  std::vector<std::uint32_t> labels;         // labels[i] = K-bit label of points[i]
  std::vector<std::uint32_t> index_of_label; // inverse permutation

  // Point indices partitioned by the value of each label bit, precomputed for
  // the LLR sums: subset[bit][b] lists indices with label bit `bit` equal b.
  std::vector<std::vector<std::uint32_t>> subset_bit0;
  std::vector<std::vector<std::uint32_t>> subset_bit1;

  int size() const { return static_cast<int>(points.size()); }
};

struct ChannelObservation {
  std::complex<double> r;  // received sample
  std::complex<double> h;  // channel coefficient
  double noise_var = 1.0;  // sigma_n^2
};

// (G, re(r/h), im(r/h)): everything the LLRs depend on for one channel use.
struct SufficientStat {
  double g = 0.0;     // instantaneous SNR |h|^2 / sigma_n^2
  double r_re = 0.0;
  double r_im = 0.0;
};

// k_bits in {1, 2, 4, 6, 8}: BPSK plus square QAM up to 256 points.
Constellation build_constellation(int k_bits);

// bits[i] in {0,1}, length K; returns the unique matching point.
std::complex<double> modulate(const std::vector<int>& bits, const Constellation& c);

// Label of a point index, unpacked to a bit vector (position 0 first).
std::vector<int> label_bits(std::uint32_t label, int k_bits);

// Exact per-bit LLRs, log(P(r|b=1)/P(r|b=0)), evaluated directly on (r, h)
// with max-subtracted log-sum-exp. Output clamped to [-kLlrMax, kLlrMax].
LlrVector compute_llr(const ChannelObservation& obs, const Constellation& c);

SufficientStat sufficient_stats(const ChannelObservation& obs);

// Same LLRs evaluated from the factored statistics.
LlrVector llr_from_stats(const SufficientStat& s, const Constellation& c);

SoftBitVector to_soft_bits(const LlrVector& llrs);

// Inverse soft-bit transform; input must lie in [-1, 1].
LlrVector from_soft_bits(const SoftBitVector& soft);

}  // namespace llrq
