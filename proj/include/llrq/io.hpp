#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "llrq/pipeline.hpp"
#include "llrq/quantizers.hpp"

namespace llrq {

// BLER results as CSV with the fixed column set
// snr_db,trials,errors,bler,method,n_bits,seed.
void write_bler_csv(std::ostream& out, const BlerResult& result, bool header = true);
void write_bler_csv_file(const std::string& path, const BlerResult& result);
// One merged file; the header is written once.
void write_merged_bler_csv_file(const std::string& path, const std::vector<BlerResult>& results);

// Histograms as CSV (bin edges + counts + density).
void write_marginal_hist_csv(std::ostream& out, const LatentHistograms& h);
void write_joint_hist_csv(std::ostream& out, const LatentHistograms& h);

// Scalar codebook as a text container with exact decimal round-trip.
void write_codebook(std::ostream& out, const ScalarCodebook& cb, const std::string& kind);
void write_codebook_file(const std::string& path, const ScalarCodebook& cb,
                         const std::string& kind);
ScalarCodebook read_codebook(std::istream& in, std::string* kind = nullptr);
ScalarCodebook read_codebook_file(const std::string& path, std::string* kind = nullptr);

// Reconstruction LUT as text: one row per latent cell.
void write_lut(std::ostream& out, const ReconstructionLut& lut);
void write_lut_file(const std::string& path, const ReconstructionLut& lut);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// FNV-1a content hash used to pin assets in run manifests.
std::uint64_t file_fnv1a(const std::string& path);

}  // namespace llrq
