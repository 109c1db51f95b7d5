#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "llrq/ldpc.hpp"
#include "llrq/modem.hpp"
#include "llrq/rng.hpp"

namespace llrq {

// Minimal row-major matrix used by the network code.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), d(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return d[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return d[r * cols + c]; }
  double* row(std::size_t r) { return d.data() + r * cols; }
  const double* row(std::size_t r) const { return d.data() + r * cols; }
};

enum class Activation : std::uint8_t { Relu = 0, Tanh = 1 };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::Relu;
};

struct Layer {
  LayerSpec spec;
  Mat weights;              // out_dim x in_dim
  std::vector<double> bias; // out_dim
};

// Symmetric autoencoder K -> 4K -> 4K -> 3 -> 4K -> 4K -> K with ReLU hidden
// layers and tanh on the last layer of each half.
struct MlpParams {
  int k = 0;
  int latent_dim = 3;
  std::vector<Layer> layers;  // 6 layers; [0..2] encoder, [3..5] decoder

  std::size_t parameter_count() const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 65536;
  int epochs = 2000;
  double noise_std = 1e-3;   // sigma_t
  double eps_loss = 1e-4;    // epsilon in the weighted loss
  std::uint64_t seed = 1;
};

struct Dataset {
  Mat samples;                      // N x K soft bits
  std::vector<double> snr_db;       // per-sample provenance
  std::vector<SufficientStat> stats;  // per-sample (G, r_re, r_im)

  std::size_t size() const { return samples.rows; }
};

// Fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
MlpParams init_params(int k, RngStream& rng);

// Forward passes on immutable parameters; outputs lie in [-1, 1].
Mat encoder_forward(const Mat& soft_bits, const MlpParams& p);
Mat decoder_forward(const Mat& latent, const MlpParams& p);

// Training-mode latent perturbation; identity gradient.
Mat noise_layer(const Mat& latent, double noise_std, RngStream& rng);

// Sum over samples and components of (target - recon)^2 / (|target| + eps).
// The denominator depends on targets only.
double weighted_loss(const Mat& target, const Mat& recon, double eps);

struct MlpGrads {
  std::vector<Mat> d_weights;
  std::vector<std::vector<double>> d_bias;
};

// Loss of the full train-time path (encoder, +noise, decoder) for a fixed
// latent noise realization. `latent_noise` must be batch x latent_dim.
double loss_with_noise(const MlpParams& p, const Mat& batch, const Mat& latent_noise, double eps);

// Same path, also filling exact reverse-mode gradients.
double loss_and_gradients(const MlpParams& p, const Mat& batch, const Mat& latent_noise,
                          double eps, MlpGrads& grads);

struct AdamState {
  std::vector<Mat> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;
  long step = 0;

  static AdamState zeros_like(const MlpParams& p);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void adam_step(MlpParams& p, const MlpGrads& grads, AdamState& state, double lr);

// Full chain: payload -> encode -> interleave -> modulate -> fade -> exact
// LLRs -> soft bits, for every SNR in the list, concatenated and shuffled.
Dataset generate_dataset(const std::vector<double>& snr_list_db, int codewords_per_snr,
                         const ParityMatrix& pm, const SystematicEncoder& enc,
                         const Constellation& c, RngStream rng);

struct TrainResult {
  MlpParams params;
  std::vector<double> loss_history;  // mean per-sample loss per epoch
};

TrainResult train(const TrainConfig& cfg, const Dataset& data, int k);

// Versioned binary container; round-trips bit-exactly.
void save_params(const MlpParams& p, std::ostream& out);
void save_params_file(const MlpParams& p, const std::string& path);
// expected_k < 0 skips the arity check.
MlpParams load_params(std::istream& in, int expected_k = -1);
MlpParams load_params_file(const std::string& path, int expected_k = -1);

}  // namespace llrq
