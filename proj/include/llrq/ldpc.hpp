#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "llrq/modem.hpp"
#include "llrq/rng.hpp"

namespace llrq {

// Sparse parity-check matrix with dual adjacency lists.
struct ParityMatrix {
  int n = 0;  // variables (codeword length)
  int m = 0;  // checks
  std::vector<std::vector<std::uint32_t>> check_nbrs;  // per check: variable indices
  std::vector<std::vector<std::uint32_t>> var_nbrs;    // per variable: check indices

  static ParityMatrix from_rows(int n, const std::vector<std::vector<int>>& rows);
  bool parity_ok(const std::vector<std::uint8_t>& codeword) const;
};

// MacKay alist, 1-based indices, zero padding allowed for irregular codes.
ParityMatrix load_alist(std::istream& in);
ParityMatrix load_alist_file(const std::string& path);

// Gauss-Jordan systematic form over GF(2). Pivots are chosen scanning columns
// right to left so codes with an invertible parity block keep the leading
// columns as information positions. Throws CodeConstructionError if H is rank
// deficient.
class SystematicEncoder {
 public:
  explicit SystematicEncoder(const ParityMatrix& pm);

  int n() const { return n_; }
  int k() const { return static_cast<int>(info_positions_.size()); }
  const std::vector<std::uint32_t>& info_positions() const { return info_positions_; }

  std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& info) const;
  std::vector<std::uint8_t> extract_info(const std::vector<std::uint8_t>& codeword) const;

 private:
  int n_ = 0;
  std::vector<std::uint32_t> info_positions_;
  std::vector<std::uint32_t> pivot_cols_;                 // one per reduced row
  std::vector<std::vector<std::uint32_t>> row_info_deps_; // info positions per reduced row
};

enum class BpVariant { SumProduct, MinSum };

struct DecodeResult {
  std::vector<std::uint8_t> bits;  // hard decision, length n
  std::vector<double> posteriors;  // per-bit posterior LLRs, log(P(1)/P(0))
  bool converged = false;          // H * bits == 0
  int iterations = 0;
};

// Flooding-schedule belief propagation in the tanh domain. Input LLRs use the
// log(P(1)/P(0)) convention; messages are clamped to +-kLlrMax. Stops as soon
// as the hard decision satisfies every check.
DecodeResult decode_bp(const LlrVector& llrs, const ParityMatrix& pm, int max_iter,
                       BpVariant variant = BpVariant::SumProduct);

// Uniformly random permutation of {0..n-1} from the stream.
std::vector<std::uint32_t> make_permutation(int n, RngStream& rng);

// out[i] = in[perm[i]]
template <typename T>
std::vector<T> interleave(const std::vector<T>& in, const std::vector<std::uint32_t>& perm) {
  if (in.size() != perm.size()) throw std::invalid_argument("interleave: length mismatch");
  std::vector<T> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) out[i] = in[perm[i]];
  return out;
}

// inverse of interleave: out[perm[i]] = in[i]
template <typename T>
std::vector<T> deinterleave(const std::vector<T>& in, const std::vector<std::uint32_t>& perm) {
  if (in.size() != perm.size()) throw std::invalid_argument("deinterleave: length mismatch");
  std::vector<T> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) out[perm[i]] = in[i];
  return out;
}

}  // namespace llrq
