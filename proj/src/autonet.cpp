#include "llrq/autonet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "llrq/channel.hpp"
#include "llrq/errors.hpp"

namespace llrq {

namespace {

void apply_activation(Mat& x, Activation act) {
  if (act == Activation::Relu) {
    for (double& v : x.d) v = v > 0.0 ? v : 0.0;
  } else {
    for (double& v : x.d) v = std::tanh(v);
  }
}

// y = act(x * W^T + b), x is batch x in, W is out x in
Mat layer_forward(const Mat& x, const Layer& l) {
  const std::size_t out_dim = l.weights.rows, in_dim = l.weights.cols;
  Mat y(x.rows, out_dim);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xin = x.row(r);
    double* yout = y.row(r);
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* w = l.weights.row(o);
      double acc = l.bias[o];
      for (std::size_t i = 0; i < in_dim; ++i) acc += w[i] * xin[i];
      yout[o] = acc;
    }
  }
  apply_activation(y, l.spec.activation);
  return y;
}

Mat forward_layers(const Mat& input, const MlpParams& p, int first, int last) {
  Mat cur = input;
  for (int li = first; li <= last; ++li) cur = layer_forward(cur, p.layers[li]);
  return cur;
}

void check_width(const Mat& x, int expect, const char* what) {
  if (static_cast<int>(x.cols) != expect)
    throw std::invalid_argument(std::string(what) + ": expected width " + std::to_string(expect) +
                                ", got " + std::to_string(x.cols));
}

// dL/d(pre-activation) from dL/d(post) and the stored post-activation values
void backprop_activation(const Mat& post, Mat& dpost, Activation act) {
  if (act == Activation::Relu) {
    for (std::size_t i = 0; i < post.d.size(); ++i)
      if (post.d[i] <= 0.0) dpost.d[i] = 0.0;
  } else {
    for (std::size_t i = 0; i < post.d.size(); ++i) dpost.d[i] *= 1.0 - post.d[i] * post.d[i];
  }
}

struct ForwardTrace {
  // post-activation outputs per layer, plus the noised latent
  std::vector<Mat> post;  // size 6
  Mat noised_latent;
  Mat recon;
};

ForwardTrace forward_train(const MlpParams& p, const Mat& batch, const Mat& latent_noise) {
  ForwardTrace t;
  t.post.reserve(p.layers.size());
  Mat cur = batch;
  for (int li = 0; li < 3; ++li) {
    cur = layer_forward(cur, p.layers[li]);
    t.post.push_back(cur);
  }
  t.noised_latent = cur;
  for (std::size_t i = 0; i < t.noised_latent.d.size(); ++i)
    t.noised_latent.d[i] += latent_noise.d[i];
  cur = t.noised_latent;
  for (int li = 3; li < 6; ++li) {
    cur = layer_forward(cur, p.layers[li]);
    t.post.push_back(cur);
  }
  t.recon = t.post.back();
  return t;
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.d.size() + l.bias.size();
  return n;
}

MlpParams init_params(int k, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("init_params: k must be >= 1");
  MlpParams p;
  p.k = k;
  p.latent_dim = 3;
  const int h = 4 * k;
  const LayerSpec specs[6] = {
      {k, h, Activation::Relu},  {h, h, Activation::Relu}, {h, 3, Activation::Tanh},
      {3, h, Activation::Relu},  {h, h, Activation::Relu}, {h, k, Activation::Tanh},
  };
  for (const auto& s : specs) {
    Layer l;
    l.spec = s;
    l.weights = Mat(s.out_dim, s.in_dim);
    l.bias.assign(s.out_dim, 0.0);
    double bound = 1.0 / std::sqrt(static_cast<double>(s.in_dim));
    for (double& w : l.weights.d) w = (2.0 * rng.next_unit() - 1.0) * bound;
    for (double& b : l.bias) b = (2.0 * rng.next_unit() - 1.0) * bound;
    p.layers.push_back(std::move(l));
  }
  return p;
}

Mat encoder_forward(const Mat& soft_bits, const MlpParams& p) {
  check_width(soft_bits, p.k, "encoder_forward");
  return forward_layers(soft_bits, p, 0, 2);
}

Mat decoder_forward(const Mat& latent, const MlpParams& p) {
  check_width(latent, p.latent_dim, "decoder_forward");
  return forward_layers(latent, p, 3, 5);
}

Mat noise_layer(const Mat& latent, double noise_std, RngStream& rng) {
  if (noise_std < 0.0) throw std::invalid_argument("noise_layer: noise_std must be >= 0");
  Mat out = latent;
  if (noise_std > 0.0)
    for (double& v : out.d) v += noise_std * rng.next_gaussian();
  return out;
}

double weighted_loss(const Mat& target, const Mat& recon, double eps) {
  if (target.rows != recon.rows || target.cols != recon.cols)
    throw std::invalid_argument("weighted_loss: shape mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("weighted_loss: eps must be > 0");
  double loss = 0.0;
  for (std::size_t i = 0; i < target.d.size(); ++i) {
    double diff = target.d[i] - recon.d[i];
    loss += diff * diff / (std::fabs(target.d[i]) + eps);
  }
  return loss;
}

double loss_with_noise(const MlpParams& p, const Mat& batch, const Mat& latent_noise, double eps) {
  check_width(batch, p.k, "loss_with_noise");
  ForwardTrace t = forward_train(p, batch, latent_noise);
  return weighted_loss(batch, t.recon, eps);
}

double loss_and_gradients(const MlpParams& p, const Mat& batch, const Mat& latent_noise,
                          double eps, MlpGrads& grads) {
  check_width(batch, p.k, "loss_and_gradients");
  if (latent_noise.rows != batch.rows || static_cast<int>(latent_noise.cols) != p.latent_dim)
    throw std::invalid_argument("loss_and_gradients: latent noise shape mismatch");

  ForwardTrace t = forward_train(p, batch, latent_noise);
  double loss = weighted_loss(batch, t.recon, eps);

  grads.d_weights.clear();
  grads.d_bias.clear();
  for (const auto& l : p.layers) {
    grads.d_weights.emplace_back(l.weights.rows, l.weights.cols);
    grads.d_bias.emplace_back(l.bias.size(), 0.0);
  }

  // d loss / d recon; the |target|+eps weight is a constant w.r.t. parameters
  Mat delta(batch.rows, p.k);
  for (std::size_t i = 0; i < delta.d.size(); ++i)
    delta.d[i] = -2.0 * (batch.d[i] - t.recon.d[i]) / (std::fabs(batch.d[i]) + eps);

  // walk layers backwards; layer input is the previous post-activation
  // (or the noised latent for layer 3, or the batch for layer 0)
  for (int li = 5; li >= 0; --li) {
    const Layer& l = p.layers[li];
    const Mat& post = t.post[li];
    backprop_activation(post, delta, l.spec.activation);

    const Mat* input;
    if (li == 0)
      input = &batch;
    else if (li == 3)
      input = &t.noised_latent;
    else
      input = &t.post[li - 1];

    Mat& dW = grads.d_weights[li];
    auto& db = grads.d_bias[li];
    const std::size_t out_dim = l.weights.rows, in_dim = l.weights.cols;
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double* drow = delta.row(r);
      const double* xin = input->row(r);
      for (std::size_t o = 0; o < out_dim; ++o) {
        double dv = drow[o];
        if (dv == 0.0) continue;
        db[o] += dv;
        double* wrow = dW.row(o);
        for (std::size_t i = 0; i < in_dim; ++i) wrow[i] += dv * xin[i];
      }
    }

    if (li > 0) {
      // additive latent noise has unit gradient, so the pass through the
      // noise layer (between layers 2 and 3) needs no extra term
      Mat dx(delta.rows, in_dim);
      for (std::size_t r = 0; r < delta.rows; ++r) {
        const double* drow = delta.row(r);
        double* dxrow = dx.row(r);
        for (std::size_t o = 0; o < out_dim; ++o) {
          double dv = drow[o];
          if (dv == 0.0) continue;
          const double* wrow = l.weights.row(o);
          for (std::size_t i = 0; i < in_dim; ++i) dxrow[i] += dv * wrow[i];
        }
      }
      delta = std::move(dx);
    }
  }
  return loss;
}

AdamState AdamState::zeros_like(const MlpParams& p) {
  AdamState s;
  for (const auto& l : p.layers) {
    s.m_w.emplace_back(l.weights.rows, l.weights.cols);
    s.v_w.emplace_back(l.weights.rows, l.weights.cols);
    s.m_b.emplace_back(l.bias.size(), 0.0);
    s.v_b.emplace_back(l.bias.size(), 0.0);
  }
  return s;
}

void adam_step(MlpParams& p, const MlpGrads& grads, AdamState& state, double lr) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    auto update = [&](double& param, double g, double& m, double& v) {
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
      double mh = m / bc1;
      double vh = v / bc2;
      param -= lr * mh / (std::sqrt(vh) + kAdamEps);
    };
    Layer& l = p.layers[li];
    for (std::size_t i = 0; i < l.weights.d.size(); ++i)
      update(l.weights.d[i], grads.d_weights[li].d[i], state.m_w[li].d[i], state.v_w[li].d[i]);
    for (std::size_t i = 0; i < l.bias.size(); ++i)
      update(l.bias[i], grads.d_bias[li][i], state.m_b[li][i], state.v_b[li][i]);
  }
}

Dataset generate_dataset(const std::vector<double>& snr_list_db, int codewords_per_snr,
                         const ParityMatrix& pm, const SystematicEncoder& enc,
                         const Constellation& c, RngStream rng) {
  if (snr_list_db.empty()) throw std::invalid_argument("generate_dataset: empty SNR list");
  if (codewords_per_snr < 1) throw std::invalid_argument("generate_dataset: need >= 1 codeword");
  const int kbits = c.bits_per_symbol;
  if (pm.n % kbits != 0)
    throw ConfigError("codeword length " + std::to_string(pm.n) +
                      " not divisible by bits per symbol " + std::to_string(kbits));

  const int symbols_per_cw = pm.n / kbits;
  const std::size_t total =
      snr_list_db.size() * static_cast<std::size_t>(codewords_per_snr) * symbols_per_cw;

  Dataset ds;
  ds.samples = Mat(total, kbits);
  ds.snr_db.resize(total);
  ds.stats.resize(total);

  RngStream perm_rng = rng.derive("interleaver");
  auto perm = make_permutation(pm.n, perm_rng);

  std::size_t row = 0;
  std::vector<int> sym_bits(kbits);
  for (std::size_t si = 0; si < snr_list_db.size(); ++si) {
    NoiseModel nm = make_noise_model(snr_list_db[si]);
    for (int cw = 0; cw < codewords_per_snr; ++cw) {
      RngStream frame_rng = rng.derive("frame", si * 1000003ull + static_cast<std::uint64_t>(cw));
      std::vector<std::uint8_t> info(enc.k());
      for (auto& b : info) b = static_cast<std::uint8_t>(frame_rng.next_u64() & 1u);
      auto coded = enc.encode(info);
      auto tx = interleave(coded, perm);
      for (int s = 0; s < symbols_per_cw; ++s) {
        for (int b = 0; b < kbits; ++b) sym_bits[b] = tx[s * kbits + b];
        auto obs = apply_channel(modulate(sym_bits, c), nm, frame_rng);
        auto llrs = compute_llr(obs, c);
        auto soft = to_soft_bits(llrs);
        std::copy(soft.begin(), soft.end(), ds.samples.row(row));
        ds.snr_db[row] = snr_list_db[si];
        ds.stats[row] = sufficient_stats(obs);
        ++row;
      }
    }
  }

  // global shuffle so minibatches mix SNRs
  RngStream shuf = rng.derive("shuffle");
  for (std::size_t i = total - 1; i > 0; --i) {
    std::uint64_t j = shuf.next_u64() % (i + 1);
    if (j == i) continue;
    for (int col = 0; col < kbits; ++col) std::swap(ds.samples.at(i, col), ds.samples.at(j, col));
    std::swap(ds.snr_db[i], ds.snr_db[j]);
    std::swap(ds.stats[i], ds.stats[j]);
  }
  return ds;
}

TrainResult train(const TrainConfig& cfg, const Dataset& data, int k) {
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (static_cast<int>(data.samples.cols) != k)
    throw std::invalid_argument("train: dataset width does not match k");
  if (cfg.batch_size < 1 || cfg.epochs < 1 || !(cfg.learning_rate > 0.0))
    throw std::invalid_argument("train: invalid config");
  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, data.size());

  RngStream root(cfg.seed);
  RngStream init_rng = root.derive("train/init");
  RngStream noise_rng = root.derive("train/noise");
  RngStream shuffle_rng = root.derive("train/shuffle");

  MlpParams params = init_params(k, init_rng);
  AdamState adam = AdamState::zeros_like(params);
  MlpGrads grads;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.loss_history.reserve(cfg.epochs);
  Mat bx(batch, k);
  Mat noise(batch, params.latent_dim);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::uint64_t j = shuffle_rng.next_u64() % (i + 1);
      std::swap(order[i], order[j]);
    }
    const std::size_t n_batches = data.size() / batch;  // drop trailing partial batch
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      for (std::size_t r = 0; r < batch; ++r) {
        const double* src = data.samples.row(order[b * batch + r]);
        std::copy(src, src + k, bx.row(r));
      }
      if (cfg.noise_std > 0.0) {
        for (double& v : noise.d) v = cfg.noise_std * noise_rng.next_gaussian();
      } else {
        std::fill(noise.d.begin(), noise.d.end(), 0.0);
      }
      double loss = loss_and_gradients(params, bx, noise, cfg.eps_loss, grads);
      if (!std::isfinite(loss)) throw TrainingError("training loss diverged", epoch);
      epoch_loss += loss;
      adam_step(params, grads, adam, cfg.learning_rate);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n_batches * batch));
  }
  result.params = std::move(params);
  return result;
}

namespace {
constexpr char kMagic[8] = {'L', 'L', 'R', 'Q', 'N', 'E', 'T', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw LoadError("weight file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

void read_doubles(std::istream& in, std::vector<double>& v) {
  for (double& x : v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw LoadError("weight file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    std::memcpy(&x, &bits, 8);
  }
}
}  // namespace

void save_params(const MlpParams& p, std::ostream& out) {
  out.write(kMagic, 8);
  write_u32(out, 1);  // format version
  write_u32(out, static_cast<std::uint32_t>(p.k));
  write_u32(out, static_cast<std::uint32_t>(p.latent_dim));
  write_u32(out, static_cast<std::uint32_t>(p.layers.size()));
  for (const auto& l : p.layers) {
    write_u32(out, static_cast<std::uint32_t>(l.spec.in_dim));
    write_u32(out, static_cast<std::uint32_t>(l.spec.out_dim));
    write_u32(out, static_cast<std::uint32_t>(l.spec.activation));
    write_doubles(out, l.weights.d);
    write_doubles(out, l.bias);
  }
}

void save_params_file(const MlpParams& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open for writing: " + path);
  save_params(p, f);
}

MlpParams load_params(std::istream& in, int expected_k) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw LoadError("bad weight file magic");
  std::uint32_t version = read_u32(in);
  if (version != 1) throw LoadError("unsupported weight file version " + std::to_string(version));
  MlpParams p;
  p.k = static_cast<int>(read_u32(in));
  p.latent_dim = static_cast<int>(read_u32(in));
  std::uint32_t n_layers = read_u32(in);
  if (expected_k >= 0 && p.k != expected_k)
    throw LoadError("weight file is for k=" + std::to_string(p.k) + ", expected k=" +
                    std::to_string(expected_k));
  if (p.k < 1 || p.latent_dim < 1 || n_layers != 6) throw LoadError("corrupt weight file header");
  int prev_dim = p.k;
  for (std::uint32_t li = 0; li < n_layers; ++li) {
    Layer l;
    l.spec.in_dim = static_cast<int>(read_u32(in));
    l.spec.out_dim = static_cast<int>(read_u32(in));
    std::uint32_t act = read_u32(in);
    if (act > 1) throw LoadError("unknown activation tag");
    l.spec.activation = static_cast<Activation>(act);
    if (l.spec.in_dim != prev_dim || l.spec.in_dim < 1 || l.spec.out_dim < 1)
      throw LoadError("inconsistent layer shape chain");
    l.weights = Mat(l.spec.out_dim, l.spec.in_dim);
    l.bias.assign(l.spec.out_dim, 0.0);
    read_doubles(in, l.weights.d);
    read_doubles(in, l.bias);
    prev_dim = l.spec.out_dim;
    p.layers.push_back(std::move(l));
  }
  if (prev_dim != p.k) throw LoadError("decoder output width does not match k");
  return p;
}

MlpParams load_params_file(const std::string& path, int expected_k) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open weight file: " + path);
  return load_params(f, expected_k);
}

}  // namespace llrq
