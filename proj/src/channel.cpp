#include "llrq/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace llrq {

double snr_to_noise_var(double snr_db) {
  if (std::isnan(snr_db)) throw std::invalid_argument("snr_to_noise_var: NaN input");
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;  // noiseless sentinel
  return std::pow(10.0, -snr_db / 10.0);
}

NoiseModel make_noise_model(double snr_db) { return {snr_db, snr_to_noise_var(snr_db)}; }

std::complex<double> draw_channel(RngStream& rng) { return rng.next_cgaussian(1.0); }

ChannelObservation apply_channel(std::complex<double> symbol, const NoiseModel& nm,
                                 RngStream& rng) {
  std::complex<double> h = draw_channel(rng);
  std::complex<double> r = h * symbol;
  if (nm.noise_var > 0.0) r += rng.next_cgaussian(nm.noise_var);
  return {r, h, nm.noise_var};
}

}  // namespace llrq
