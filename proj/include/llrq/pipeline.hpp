#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "llrq/autonet.hpp"
#include "llrq/channel.hpp"
#include "llrq/ldpc.hpp"
#include "llrq/modem.hpp"
#include "llrq/quantizers.hpp"

namespace llrq {

enum class Method { FullPrecision, Deep, ScalarLlr, MaxMi, Stats };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  int k_bits = 4;
  std::string alist_path;
  std::vector<double> snr_grid_db;
  int codewords_per_snr = 1000;
  Method method = Method::FullPrecision;
  int n_bits = 5;
  std::uint64_t seed = 1;
  int max_iter = 50;
  BpVariant bp_variant = BpVariant::SumProduct;
  std::string model_path;       // deep method
  double delta = 0.8;           // latent clipping threshold
  bool fold_saturation = true;  // deep path stores exactly 3*n_bits per symbol
  bool use_lut = false;         // replace decoder inference by the table
  double stats_delta_r = 2.0;   // clip for the equalized observation parts
  int mi_fit_codewords = 200;   // codewords per SNR used to fit max-MI books
  int amp_fit_samples = 200000; // Lloyd draws for the amplitude codebook
  int threads = 1;
};

struct SnrPointResult {
  double snr_db = 0.0;
  long trials = 0;
  long errors = 0;
  double bler = 0.0;
};

struct BlerResult {
  std::vector<SnrPointResult> points;
  Method method = Method::FullPrecision;
  int n_bits = 0;
  std::uint64_t seed = 0;
  int storage_bits_per_symbol = 0;
};

// Loaded assets shared across runs; model may be null for non-deep methods.
struct EvalAssets {
  const ParityMatrix* pm = nullptr;
  const SystematicEncoder* enc = nullptr;
  const Constellation* constellation = nullptr;
  const MlpParams* model = nullptr;
};

// Per-symbol LLR reconstruction path. Pure and shareable across frames.
class LlrTransform {
 public:
  virtual ~LlrTransform() = default;
  virtual LlrVector apply(const LlrVector& llrs, const SufficientStat& stats) const = 0;
};

// Builds the transform for one SNR point (the max-MI and amplitude codebooks
// are refit per point; fitting draws its own labeled streams from the seed).
std::unique_ptr<LlrTransform> make_transform(const ExperimentConfig& cfg, const EvalAssets& assets,
                                             double snr_db, int snr_index);

// Headline storage accounting per symbol (saturation folded for the deep
// path; the reference full-precision figure assumes 32-bit scalars).
int storage_bits_per_symbol(Method m, int k_bits, int n_bits);

BlerResult run_single(const ExperimentConfig& cfg, const EvalAssets& assets);
// Same loop with a caller-supplied transform for every SNR point.
BlerResult run_single_with(const ExperimentConfig& cfg, const EvalAssets& assets,
                           const LlrTransform& transform);

struct HarqSplit {
  std::vector<std::uint32_t> t1;  // bit indices of transmission 1 (sorted)
  std::vector<std::uint32_t> t2;
};

// Random fixed halving plus a third of the other half each; |T1| = |T2| =
// 2n/3 for n divisible by 6, remainder assigned round-robin.
HarqSplit harq_split(int n, RngStream& rng);

// Equal gain combining of a reconstructed and a full-precision LLR.
inline double combine_llrs(double l1, double l2) { return l1 + l2; }

// Two overlapping transmissions; the first passes through the configured
// reconstruction path, the second stays full precision. One decode per frame.
BlerResult run_harq(const ExperimentConfig& cfg, const EvalAssets& assets);
BlerResult run_harq_with(const ExperimentConfig& cfg, const EvalAssets& assets,
                         const LlrTransform& transform);

struct Histogram1D {
  std::vector<double> edges;  // bins+1
  std::vector<long> counts;   // bins
};

struct Histogram2D {
  std::vector<double> x_edges, y_edges;
  std::vector<long> counts;  // row-major, x index major
};

struct LatentHistograms {
  Histogram1D marginal[3];
  Histogram2D joint_logg_z3;  // (log G, z3)
  std::size_t n_samples = 0;
  double z_mean[3] = {0, 0, 0};
  double z_var[3] = {0, 0, 0};
};

// Marginal latent distributions plus the joint (log G, z3) diagnostic.
LatentHistograms emit_latent_histograms(const MlpParams& model, const Dataset& data, int bins);

}  // namespace llrq
