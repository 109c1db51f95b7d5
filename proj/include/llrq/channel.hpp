#pragma once

#include <complex>

#include "llrq/modem.hpp"
#include "llrq/rng.hpp"

namespace llrq {

// Unit symbol energy and E|h|^2 = 1, so sigma_n^2 = 10^(-snr_db/10).
// snr_db = +infinity is the noiseless sentinel (noise_var == 0).
struct NoiseModel {
  double snr_db = 0.0;
  double noise_var = 1.0;
};

double snr_to_noise_var(double snr_db);
NoiseModel make_noise_model(double snr_db);

// h ~ CN(0,1): independent real/imag parts, each N(0, 1/2).
std::complex<double> draw_channel(RngStream& rng);

// r = h*s + n with a fresh fade per symbol. Draw order is h then n.
ChannelObservation apply_channel(std::complex<double> symbol, const NoiseModel& nm, RngStream& rng);

}  // namespace llrq
