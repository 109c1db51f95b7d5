#include "llrq/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "llrq/errors.hpp"

namespace llrq {

std::string method_name(Method m) {
  switch (m) {
    case Method::FullPrecision: return "full_precision";
    case Method::Deep: return "deep";
    case Method::ScalarLlr: return "scalar_llr";
    case Method::MaxMi: return "max_mi";
    case Method::Stats: return "stats";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "full_precision") return Method::FullPrecision;
  if (name == "deep") return Method::Deep;
  if (name == "scalar_llr") return Method::ScalarLlr;
  if (name == "max_mi") return Method::MaxMi;
  if (name == "stats") return Method::Stats;
  throw ConfigError("unknown method '" + name + "'");
}

int storage_bits_per_symbol(Method m, int k_bits, int n_bits) {
  switch (m) {
    case Method::FullPrecision: return 32 * k_bits;
    case Method::Deep: return 3 * n_bits;
    case Method::ScalarLlr:
    case Method::MaxMi: return k_bits * n_bits;
    case Method::Stats: return 3 * n_bits;
  }
  return 0;
}

namespace {

class FullPrecisionTransform : public LlrTransform {
 public:
  LlrVector apply(const LlrVector& llrs, const SufficientStat&) const override { return llrs; }
};

class ScalarLlrTransform : public LlrTransform {
 public:
  explicit ScalarLlrTransform(int n_bits) : n_bits_(n_bits) {}
  LlrVector apply(const LlrVector& llrs, const SufficientStat&) const override {
    return scalar_llr_baseline(llrs, n_bits_);
  }

 private:
  int n_bits_;
};

class DeepTransform : public LlrTransform {
 public:
  DeepTransform(const MlpParams& model, UniformQuantizerSpec spec, bool use_lut)
      : model_(model), spec_(spec) {
    if (use_lut) lut_ = std::make_shared<ReconstructionLut>(build_lut(model, spec));
  }

  LlrVector apply(const LlrVector& llrs, const SufficientStat&) const override {
    Mat soft(1, model_.k);
    auto sb = to_soft_bits(llrs);
    std::copy(sb.begin(), sb.end(), soft.row(0));
    Mat z = encoder_forward(soft, model_);
    auto q = quantize_latent({z.at(0, 0), z.at(0, 1), z.at(0, 2)}, spec_);
    SoftBitVector recon(model_.k);
    if (lut_) {
      const double* cell = lut_->cell(q.index);
      std::copy(cell, cell + model_.k, recon.begin());
    } else {
      Mat zl(1, 3);
      for (int i = 0; i < 3; ++i) zl.at(0, i) = q.level[i];
      Mat out = decoder_forward(zl, model_);
      std::copy(out.d.begin(), out.d.end(), recon.begin());
    }
    return from_soft_bits(recon);
  }

 private:
  const MlpParams& model_;
  UniformQuantizerSpec spec_;
  std::shared_ptr<ReconstructionLut> lut_;
};

class MaxMiTransform : public LlrTransform {
 public:
  explicit MaxMiTransform(std::vector<ScalarCodebook> books) : books_(std::move(books)) {}
  LlrVector apply(const LlrVector& llrs, const SufficientStat&) const override {
    LlrVector out(llrs.size());
    for (size_t i = 0; i < llrs.size(); ++i) out[i] = apply_codebook(llrs[i], books_[i]);
    return out;
  }

 private:
  std::vector<ScalarCodebook> books_;
};

class StatsTransform : public LlrTransform {
 public:
  StatsTransform(StatsQuantizer q, const Constellation& c) : q_(std::move(q)), c_(c) {}
  LlrVector apply(const LlrVector&, const SufficientStat& stats) const override {
    return quantize_stats_baseline(stats, q_, c_);
  }

 private:
  StatsQuantizer q_;
  const Constellation& c_;
};

void require_assets(const ExperimentConfig& cfg, const EvalAssets& a) {
  if (!a.pm || !a.enc || !a.constellation) throw ConfigError("missing evaluation assets");
  if (a.constellation->bits_per_symbol != cfg.k_bits)
    throw ConfigError("constellation order does not match config k_bits");
  if (cfg.method == Method::Deep) {
    if (!a.model) throw ConfigError("deep method requires a trained model");
    if (a.model->k != cfg.k_bits)
      throw ConfigError("model is for k=" + std::to_string(a.model->k) + ", config k_bits=" +
                        std::to_string(cfg.k_bits));
  }
  if (cfg.snr_grid_db.empty()) throw ConfigError("empty SNR grid");
  if (cfg.codewords_per_snr < 1) throw ConfigError("codewords_per_snr must be >= 1");
  if (a.pm->n % cfg.k_bits != 0)
    throw ConfigError("codeword length not divisible by bits per symbol");
}

// Labeled (LLR, bit) samples per bit position for fitting the max-MI books.
std::vector<std::vector<LabeledLlr>> collect_fit_samples(const ExperimentConfig& cfg,
                                                         const EvalAssets& a, double snr_db,
                                                         int snr_index, int codewords) {
  const Constellation& c = *a.constellation;
  const int kbits = c.bits_per_symbol;
  const int sym_per_cw = a.pm->n / kbits;
  NoiseModel nm = make_noise_model(snr_db);
  RngStream root(cfg.seed);
  RngStream perm_rng = root.derive("mi-fit/interleaver");
  auto perm = make_permutation(a.pm->n, perm_rng);

  std::vector<std::vector<LabeledLlr>> out(kbits);
  std::vector<int> sym_bits(kbits);
  for (int cw = 0; cw < codewords; ++cw) {
    RngStream rng = root.derive("mi-fit/frame",
                                static_cast<std::uint64_t>(snr_index) * 1000003ull + cw);
    std::vector<std::uint8_t> info(a.enc->k());
    for (auto& b : info) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    auto tx = interleave(a.enc->encode(info), perm);
    for (int s = 0; s < sym_per_cw; ++s) {
      for (int b = 0; b < kbits; ++b) sym_bits[b] = tx[s * kbits + b];
      auto obs = apply_channel(modulate(sym_bits, c), nm, rng);
      auto llrs = compute_llr(obs, c);
      for (int b = 0; b < kbits; ++b) out[b].push_back({llrs[b], sym_bits[b]});
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<LlrTransform> make_transform(const ExperimentConfig& cfg, const EvalAssets& assets,
                                             double snr_db, int snr_index) {
  switch (cfg.method) {
    case Method::FullPrecision:
      return std::make_unique<FullPrecisionTransform>();
    case Method::ScalarLlr:
      return std::make_unique<ScalarLlrTransform>(cfg.n_bits);
    case Method::Deep: {
      UniformQuantizerSpec spec{cfg.delta, cfg.n_bits, cfg.fold_saturation};
      return std::make_unique<DeepTransform>(*assets.model, spec, cfg.use_lut);
    }
    case Method::MaxMi: {
      auto samples = collect_fit_samples(cfg, assets, snr_db, snr_index, cfg.mi_fit_codewords);
      std::vector<ScalarCodebook> books;
      books.reserve(samples.size());
      for (auto& s : samples) books.push_back(fit_max_mi(s, 1 << cfg.n_bits));
      return std::make_unique<MaxMiTransform>(std::move(books));
    }
    case Method::Stats: {
      NoiseModel nm = make_noise_model(snr_db);
      RngStream fit_rng = RngStream(cfg.seed).derive("amp-fit", snr_index);
      StatsQuantizer q;
      q.amplitude = fit_rayleigh_quantizer(1 << cfg.n_bits, fit_rng, cfg.amp_fit_samples,
                                           1.0 / std::sqrt(nm.noise_var));
      q.r_spec = UniformQuantizerSpec{cfg.stats_delta_r, cfg.n_bits, false};
      return std::make_unique<StatsTransform>(std::move(q), *assets.constellation);
    }
  }
  throw ConfigError("unreachable method");
}

namespace {

// Runs `frames` independent trials of `work` across cfg.threads workers and
// returns the number of block errors. Results do not depend on the degree of
// parallelism because every frame owns a derived substream.
template <typename FrameFn>
long count_errors(int frames, int threads, const FrameFn& work) {
  std::vector<std::uint8_t> err(frames, 0);
  if (threads <= 1) {
    for (int f = 0; f < frames; ++f) err[f] = work(f) ? 1 : 0;
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          int f = next.fetch_add(1);
          if (f >= frames) return;
          err[f] = work(f) ? 1 : 0;
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  long total = 0;
  for (auto e : err) total += e;
  return total;
}

}  // namespace

namespace {

using TransformFactory =
    std::function<std::unique_ptr<LlrTransform>(double snr_db, int snr_index)>;

BlerResult run_single_impl(const ExperimentConfig& cfg, const EvalAssets& assets,
                           const TransformFactory& factory) {
  require_assets(cfg, assets);
  const Constellation& c = *assets.constellation;
  const int kbits = c.bits_per_symbol;
  const int n = assets.pm->n;
  const int sym_per_cw = n / kbits;

  RngStream root(cfg.seed);
  RngStream perm_rng = root.derive("interleaver");
  const auto perm = make_permutation(n, perm_rng);

  BlerResult result;
  result.method = cfg.method;
  result.n_bits = cfg.method == Method::FullPrecision ? 0 : cfg.n_bits;
  result.seed = cfg.seed;
  result.storage_bits_per_symbol = storage_bits_per_symbol(cfg.method, kbits, cfg.n_bits);

  for (size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
    const double snr_db = cfg.snr_grid_db[si];
    const NoiseModel nm = make_noise_model(snr_db);
    auto transform = factory(snr_db, static_cast<int>(si));

    auto frame_work = [&](int f) -> bool {
      RngStream rng = root.derive("eval/frame",
                                  static_cast<std::uint64_t>(si) * 1000003ull + f);
      std::vector<std::uint8_t> info(assets.enc->k());
      for (auto& b : info) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
      auto tx = interleave(assets.enc->encode(info), perm);

      LlrVector llrs_all(n);
      std::vector<int> sym_bits(kbits);
      for (int s = 0; s < sym_per_cw; ++s) {
        for (int b = 0; b < kbits; ++b) sym_bits[b] = tx[s * kbits + b];
        auto obs = apply_channel(modulate(sym_bits, c), nm, rng);
        auto llrs = transform->apply(compute_llr(obs, c), sufficient_stats(obs));
        std::copy(llrs.begin(), llrs.end(), llrs_all.begin() + s * kbits);
      }
      auto deint = deinterleave(llrs_all, perm);
      auto dec = decode_bp(deint, *assets.pm, cfg.max_iter, cfg.bp_variant);
      return assets.enc->extract_info(dec.bits) != info;
    };

    long errors = count_errors(cfg.codewords_per_snr, cfg.threads, frame_work);
    result.points.push_back({snr_db, cfg.codewords_per_snr, errors,
                             static_cast<double>(errors) / cfg.codewords_per_snr});
  }
  return result;
}

}  // namespace

BlerResult run_single(const ExperimentConfig& cfg, const EvalAssets& assets) {
  return run_single_impl(cfg, assets, [&](double snr_db, int si) {
    return make_transform(cfg, assets, snr_db, si);
  });
}

BlerResult run_single_with(const ExperimentConfig& cfg, const EvalAssets& assets,
                           const LlrTransform& transform) {
  // wrap the shared transform so both entry points run the identical loop
  struct Ref : LlrTransform {
    const LlrTransform* inner;
    LlrVector apply(const LlrVector& l, const SufficientStat& s) const override {
      return inner->apply(l, s);
    }
  };
  return run_single_impl(cfg, assets, [&](double, int) {
    auto ref = std::make_unique<Ref>();
    ref->inner = &transform;
    return ref;
  });
}

HarqSplit harq_split(int n, RngStream& rng) {
  if (n < 6) throw std::invalid_argument("harq_split: n must be >= 6");
  auto perm = make_permutation(n, rng);
  const int n6 = n - n % 6;
  const int half = n6 / 2;
  const int third = n6 / 6;

  HarqSplit sp;
  sp.t1.assign(perm.begin(), perm.begin() + half);
  sp.t2.assign(perm.begin() + half, perm.begin() + n6);
  // a third of the other half each
  sp.t1.insert(sp.t1.end(), perm.begin() + half, perm.begin() + half + third);
  sp.t2.insert(sp.t2.end(), perm.begin(), perm.begin() + third);
  // leftover indices alternate between the transmissions
  for (int i = n6; i < n; ++i) {
    if ((i - n6) % 2 == 0)
      sp.t1.push_back(perm[i]);
    else
      sp.t2.push_back(perm[i]);
  }
  std::sort(sp.t1.begin(), sp.t1.end());
  std::sort(sp.t2.begin(), sp.t2.end());
  return sp;
}

namespace {

BlerResult run_harq_impl(const ExperimentConfig& cfg, const EvalAssets& assets,
                         const TransformFactory& factory) {
  require_assets(cfg, assets);
  const Constellation& c = *assets.constellation;
  const int kbits = c.bits_per_symbol;
  const int n = assets.pm->n;

  RngStream root(cfg.seed);
  RngStream split_rng = root.derive("harq-split");
  const HarqSplit split = harq_split(n, split_rng);
  const std::vector<std::uint32_t>* tsets[2] = {&split.t1, &split.t2};
  for (const auto* t : tsets)
    if (t->size() % kbits != 0)
      throw ConfigError("HARQ transmission length not divisible by bits per symbol");

  std::vector<std::uint32_t> perms[2];
  for (int t = 0; t < 2; ++t) {
    RngStream pr = root.derive("harq-interleaver", t);
    perms[t] = make_permutation(static_cast<int>(tsets[t]->size()), pr);
  }

  BlerResult result;
  result.method = cfg.method;
  result.n_bits = cfg.method == Method::FullPrecision ? 0 : cfg.n_bits;
  result.seed = cfg.seed;
  result.storage_bits_per_symbol = storage_bits_per_symbol(cfg.method, kbits, cfg.n_bits);

  for (size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
    const NoiseModel nm = make_noise_model(cfg.snr_grid_db[si]);
    auto transform = factory(cfg.snr_grid_db[si], static_cast<int>(si));

    auto frame_work = [&](int f) -> bool {
      RngStream rng = root.derive("harq/frame",
                                  static_cast<std::uint64_t>(si) * 1000003ull + f);
      std::vector<std::uint8_t> info(assets.enc->k());
      for (auto& b : info) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
      auto coded = assets.enc->encode(info);

      LlrVector combined(n, 0.0);
      std::vector<int> sym_bits(kbits);
      for (int t = 0; t < 2; ++t) {
        const auto& idx = *tsets[t];
        std::vector<std::uint8_t> bits_t(idx.size());
        for (size_t j = 0; j < idx.size(); ++j) bits_t[j] = coded[idx[j]];
        auto tx = interleave(bits_t, perms[t]);
        const int syms = static_cast<int>(idx.size()) / kbits;
        LlrVector llrs_t(idx.size());
        for (int s = 0; s < syms; ++s) {
          for (int b = 0; b < kbits; ++b) sym_bits[b] = tx[s * kbits + b];
          auto obs = apply_channel(modulate(sym_bits, c), nm, rng);
          auto llrs = compute_llr(obs, c);
          if (t == 0) llrs = transform->apply(llrs, sufficient_stats(obs));
          std::copy(llrs.begin(), llrs.end(), llrs_t.begin() + s * kbits);
        }
        auto deint = deinterleave(llrs_t, perms[t]);
        for (size_t j = 0; j < idx.size(); ++j)
          combined[idx[j]] = combine_llrs(combined[idx[j]], deint[j]);
      }
      auto dec = decode_bp(combined, *assets.pm, cfg.max_iter, cfg.bp_variant);
      return assets.enc->extract_info(dec.bits) != info;
    };

    long errors = count_errors(cfg.codewords_per_snr, cfg.threads, frame_work);
    result.points.push_back({cfg.snr_grid_db[si], cfg.codewords_per_snr, errors,
                             static_cast<double>(errors) / cfg.codewords_per_snr});
  }
  return result;
}

}  // namespace

BlerResult run_harq(const ExperimentConfig& cfg, const EvalAssets& assets) {
  return run_harq_impl(cfg, assets, [&](double snr_db, int si) {
    return make_transform(cfg, assets, snr_db, si);
  });
}

BlerResult run_harq_with(const ExperimentConfig& cfg, const EvalAssets& assets,
                         const LlrTransform& transform) {
  struct Ref : LlrTransform {
    const LlrTransform* inner;
    LlrVector apply(const LlrVector& l, const SufficientStat& s) const override {
      return inner->apply(l, s);
    }
  };
  return run_harq_impl(cfg, assets, [&](double, int) {
    auto ref = std::make_unique<Ref>();
    ref->inner = &transform;
    return ref;
  });
}

LatentHistograms emit_latent_histograms(const MlpParams& model, const Dataset& data, int bins) {
  if (bins < 1) throw std::invalid_argument("emit_latent_histograms: bins must be >= 1");
  if (data.size() == 0) throw std::invalid_argument("emit_latent_histograms: empty dataset");
  if (data.stats.size() != data.size())
    throw std::invalid_argument("emit_latent_histograms: dataset lacks stat provenance");

  Mat z = encoder_forward(data.samples, model);
  LatentHistograms h;
  h.n_samples = data.size();

  for (int d = 0; d < 3; ++d) {
    h.marginal[d].edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) h.marginal[d].edges[b] = -1.0 + 2.0 * b / bins;
    h.marginal[d].counts.assign(bins, 0);
  }

  std::vector<double> logg(data.size());
  for (size_t i = 0; i < data.size(); ++i) logg[i] = std::log(std::max(data.stats[i].g, 1e-300));
  double logg_min = *std::min_element(logg.begin(), logg.end());
  double logg_max = *std::max_element(logg.begin(), logg.end());
  if (logg_max <= logg_min) logg_max = logg_min + 1.0;

  h.joint_logg_z3.x_edges.resize(bins + 1);
  h.joint_logg_z3.y_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) {
    h.joint_logg_z3.x_edges[b] = logg_min + (logg_max - logg_min) * b / bins;
    h.joint_logg_z3.y_edges[b] = -1.0 + 2.0 * b / bins;
  }
  h.joint_logg_z3.counts.assign(static_cast<size_t>(bins) * bins, 0);

  auto bin_of = [bins](double x, double lo, double hi) {
    int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    return std::clamp(b, 0, bins - 1);
  };

  for (size_t i = 0; i < data.size(); ++i) {
    for (int d = 0; d < 3; ++d) {
      double v = z.at(i, d);
      h.z_mean[d] += v;
      h.z_var[d] += v * v;
      h.marginal[d].counts[bin_of(v, -1.0, 1.0)]++;
    }
    int bx = bin_of(logg[i], logg_min, logg_max);
    int by = bin_of(z.at(i, 2), -1.0, 1.0);
    h.joint_logg_z3.counts[static_cast<size_t>(bx) * bins + by]++;
  }
  for (int d = 0; d < 3; ++d) {
    h.z_mean[d] /= static_cast<double>(data.size());
    h.z_var[d] = h.z_var[d] / static_cast<double>(data.size()) - h.z_mean[d] * h.z_mean[d];
  }
  return h;
}

}  // namespace llrq
