#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "llrq/autonet.hpp"
#include "llrq/modem.hpp"
#include "llrq/rng.hpp"

namespace llrq {

// Uniform clip quantizer: values with |x| >= delta saturate to sgn(x)*delta,
// anything inside maps to the bin-center level delta*(-2^Nb + 2k + 1)/2^Nb of
// its cell (bin width delta/2^(Nb-1), interior boundaries resolve upward).
// Saturation keeps two reserved indices beyond the 2^Nb interior codes; with
// fold_saturation the saturated values collapse into the extreme interior
// cells instead, so exactly Nb bits are stored per value.
struct UniformQuantizerSpec {
  double delta = 0.8;
  int n_bits = 3;
  bool fold_saturation = false;

  int interior_levels() const { return 1 << n_bits; }
  // index space size, including the two saturation states
  int index_count() const { return fold_saturation ? interior_levels() : interior_levels() + 2; }
};

struct QuantizedValue {
  int index = 0;    // monotone in value: 0 = -delta saturation (unfolded)
  double level = 0.0;
};

void validate(const UniformQuantizerSpec& spec);

// Reconstruction level for an index (unfolded indexing: 0 and 2^Nb+1 are the
// +-delta saturation states, 1..2^Nb the interior cells).
double quantizer_level(int index, const UniformQuantizerSpec& spec);

QuantizedValue quantize_uniform(double x, const UniformQuantizerSpec& spec);

struct QuantizedTriple {
  std::array<int, 3> index;
  std::array<double, 3> level;
};

QuantizedTriple quantize_latent(const std::array<double, 3>& z, const UniformQuantizerSpec& spec);

// Reference scheme: per-LLR uniform quantization with saturation at +-4.
LlrVector scalar_llr_baseline(const LlrVector& llrs, int n_bits, double delta = 4.0);

// Generic scalar codebook: len(levels) == len(thresholds) + 1, thresholds
// strictly increasing, x <= thresholds[i] selects level i (upper cells
// otherwise).
struct ScalarCodebook {
  std::vector<double> thresholds;
  std::vector<double> levels;
  std::vector<double> trace;  // per-iteration objective from the fit
};

double apply_codebook(double x, const ScalarCodebook& cb);

struct LabeledLlr {
  double llr = 0.0;
  int bit = 0;
};

struct MaxMiOptions {
  double init_lo = -3.0;
  double init_hi = 3.0;
  double tol = 1e-9;
  int max_iter = 500;
};

// Mutual-information-maximizing scalar LLR quantizer. Alternates exact
// KL-boundary assignment with conditional-LLR centroid updates; both steps
// use the posterior P(b=1|L) = 1/(1+exp(-L)), so the empirical (soft) MI
// is non-decreasing. trace holds the per-iteration MI in bits.
ScalarCodebook fit_max_mi(const std::vector<LabeledLlr>& samples, int n_levels,
                          const MaxMiOptions& opts = {});

// Posterior-weighted MI estimate (bits) of a fitted codebook on samples.
double estimate_cell_mi(const std::vector<double>& llrs, const ScalarCodebook& cb);

// Lloyd-Max MSE quantizer for the channel amplitude |h|/sigma_n. Draws
// Rayleigh(1/sqrt(2)) amplitudes scaled by `scale`; G reconstructs as level^2.
// trace holds per-iteration mean squared distortion.
ScalarCodebook fit_rayleigh_quantizer(int n_levels, RngStream rng, std::size_t n_samples = 1000000,
                                      double scale = 1.0);

// Lloyd-Max for arbitrary sample sets (exponential-G sensitivity option).
ScalarCodebook fit_lloyd(std::vector<double> samples, int n_levels, int max_iter = 200);

// Scalar quantization of the sufficient statistic; absent codebooks pass the
// corresponding component through unchanged (infinite-resolution limit).
struct StatsQuantizer {
  std::optional<ScalarCodebook> amplitude;     // quantizes sqrt(G), reconstructs G = level^2
  std::optional<UniformQuantizerSpec> r_spec;  // applied to both r components
};

LlrVector quantize_stats_baseline(const SufficientStat& s, const StatsQuantizer& q,
                                  const Constellation& c);

// All decoder reconstructions over the (2^Nb + 2)^3 latent cells.
struct ReconstructionLut {
  UniformQuantizerSpec spec;
  int side = 0;  // levels per axis including saturation states
  int k = 0;
  std::vector<double> values;  // cell-major, k outputs per cell

  const double* cell(const std::array<int, 3>& idx) const {
    std::size_t flat = (static_cast<std::size_t>(idx[0]) * side + idx[1]) * side + idx[2];
    return values.data() + flat * k;
  }
};

// n_bits > 8 is refused (the table would not fit the intended memory budget).
ReconstructionLut build_lut(const MlpParams& p, const UniformQuantizerSpec& spec);

}  // namespace llrq
