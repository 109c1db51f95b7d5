#include "llrq/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "llrq/errors.hpp"

namespace llrq {

namespace {

// Tokenizer that tracks line numbers for parse diagnostics.
class LineTokens {
 public:
  explicit LineTokens(std::istream& in) : in_(in) {}

  int read_int(const char* what) {
    for (;;) {
      if (pos_ >= tokens_.size()) {
        if (!next_line()) throw AlistParseError(std::string("unexpected end of input reading ") + what, line_);
        continue;
      }
      const std::string& t = tokens_[pos_++];
      try {
        size_t used = 0;
        int v = std::stoi(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
      } catch (const std::exception&) {
        throw AlistParseError("non-numeric token '" + t + "' reading " + what, line_);
      }
    }
  }

  int line() const { return line_; }

 private:
  bool next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      tokens_.clear();
      pos_ = 0;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
      if (!tokens_.empty()) return true;
    }
    return false;
  }

  std::istream& in_;
  std::vector<std::string> tokens_;
  size_t pos_ = 0;
  int line_ = 0;
};

}  // namespace

ParityMatrix ParityMatrix::from_rows(int n, const std::vector<std::vector<int>>& rows) {
  ParityMatrix pm;
  pm.n = n;
  pm.m = static_cast<int>(rows.size());
  pm.check_nbrs.resize(pm.m);
  pm.var_nbrs.resize(pm.n);
  for (int r = 0; r < pm.m; ++r) {
    for (int v : rows[r]) {
      if (v < 0 || v >= n) throw std::invalid_argument("from_rows: variable index out of range");
      pm.check_nbrs[r].push_back(static_cast<std::uint32_t>(v));
      pm.var_nbrs[v].push_back(static_cast<std::uint32_t>(r));
    }
    std::sort(pm.check_nbrs[r].begin(), pm.check_nbrs[r].end());
  }
  return pm;
}

bool ParityMatrix::parity_ok(const std::vector<std::uint8_t>& codeword) const {
  for (const auto& nbrs : check_nbrs) {
    unsigned acc = 0;
    for (std::uint32_t v : nbrs) acc ^= codeword[v];
    if (acc) return false;
  }
  return true;
}

ParityMatrix load_alist(std::istream& in) {
  LineTokens tok(in);
  int n = tok.read_int("variable count");
  int m = tok.read_int("check count");
  if (n <= 0 || m <= 0) throw AlistParseError("dimensions must be positive", tok.line());
  int max_col = tok.read_int("max column weight");
  int max_row = tok.read_int("max row weight");

  std::vector<int> col_w(n), row_w(m);
  for (int i = 0; i < n; ++i) {
    col_w[i] = tok.read_int("column weight");
    if (col_w[i] < 0 || col_w[i] > max_col)
      throw AlistParseError("column weight out of range", tok.line());
  }
  for (int i = 0; i < m; ++i) {
    row_w[i] = tok.read_int("row weight");
    if (row_w[i] < 0 || row_w[i] > max_row)
      throw AlistParseError("row weight out of range", tok.line());
  }

  ParityMatrix pm;
  pm.n = n;
  pm.m = m;
  pm.var_nbrs.assign(n, {});
  pm.check_nbrs.assign(m, {});

  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < max_col; ++j) {
      int c = tok.read_int("column entry");
      if (j < col_w[v]) {
        if (c < 1 || c > m) throw AlistParseError("check index out of range", tok.line());
        pm.var_nbrs[v].push_back(static_cast<std::uint32_t>(c - 1));
      } else if (c != 0) {
        throw AlistParseError("expected zero padding in column list", tok.line());
      }
    }
  }
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j < max_row; ++j) {
      int v = tok.read_int("row entry");
      if (j < row_w[c]) {
        if (v < 1 || v > n) throw AlistParseError("variable index out of range", tok.line());
        pm.check_nbrs[c].push_back(static_cast<std::uint32_t>(v - 1));
      } else if (v != 0) {
        throw AlistParseError("expected zero padding in row list", tok.line());
      }
    }
  }

  // the two adjacency lists must describe the same matrix
  std::vector<std::vector<std::uint32_t>> from_rows(m);
  for (int v = 0; v < n; ++v)
    for (std::uint32_t c : pm.var_nbrs[v]) from_rows[c].push_back(static_cast<std::uint32_t>(v));
  for (int c = 0; c < m; ++c) {
    auto a = from_rows[c];
    auto b = pm.check_nbrs[c];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw AlistParseError("row/column adjacency lists disagree for check " +
                                          std::to_string(c + 1), tok.line());
    if (std::adjacent_find(b.begin(), b.end()) != b.end())
      throw AlistParseError("repeated edge in check " + std::to_string(c + 1), tok.line());
  }
  return pm;
}

ParityMatrix load_alist_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open alist file: " + path);
  return load_alist(f);
}

SystematicEncoder::SystematicEncoder(const ParityMatrix& pm) : n_(pm.n) {
  const int n = pm.n, m = pm.m;
  const int words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> rows(m, std::vector<std::uint64_t>(words, 0));
  for (int c = 0; c < m; ++c)
    for (std::uint32_t v : pm.check_nbrs[c]) rows[c][v >> 6] ^= 1ull << (v & 63);

  auto get = [&](int r, int col) { return (rows[r][col >> 6] >> (col & 63)) & 1ull; };

  // Gauss-Jordan, pivots scanned right to left.
  int rank = 0;
  std::vector<char> is_pivot_col(n, 0);
  pivot_cols_.clear();
  for (int col = n - 1; col >= 0 && rank < m; --col) {
    int pr = -1;
    for (int r = rank; r < m; ++r)
      if (get(r, col)) {
        pr = r;
        break;
      }
    if (pr < 0) continue;
    std::swap(rows[pr], rows[rank]);
    for (int r = 0; r < m; ++r) {
      if (r != rank && get(r, col)) {
        for (int w = 0; w < words; ++w) rows[r][w] ^= rows[rank][w];
      }
    }
    pivot_cols_.push_back(static_cast<std::uint32_t>(col));
    is_pivot_col[col] = 1;
    ++rank;
  }
  if (rank < m)
    throw CodeConstructionError("parity matrix is rank deficient: rank " + std::to_string(rank) +
                                " < m " + std::to_string(m));

  for (int col = 0; col < n; ++col)
    if (!is_pivot_col[col]) info_positions_.push_back(static_cast<std::uint32_t>(col));

  // After full reduction each row touches its pivot plus info columns only.
  row_info_deps_.assign(m, {});
  for (int r = 0; r < m; ++r) {
    for (std::uint32_t col : info_positions_)
      if (get(r, col)) row_info_deps_[r].push_back(col);
  }
}

std::vector<std::uint8_t> SystematicEncoder::encode(const std::vector<std::uint8_t>& info) const {
  if (static_cast<int>(info.size()) != k())
    throw std::invalid_argument("encode: expected " + std::to_string(k()) + " info bits, got " +
                                std::to_string(info.size()));
  std::vector<std::uint8_t> cw(n_, 0);
  for (size_t i = 0; i < info.size(); ++i) cw[info_positions_[i]] = info[i] & 1;
  for (size_t r = 0; r < pivot_cols_.size(); ++r) {
    unsigned acc = 0;
    for (std::uint32_t col : row_info_deps_[r]) acc ^= cw[col];
    cw[pivot_cols_[r]] = static_cast<std::uint8_t>(acc);
  }
  return cw;
}

std::vector<std::uint8_t> SystematicEncoder::extract_info(
    const std::vector<std::uint8_t>& codeword) const {
  std::vector<std::uint8_t> info(info_positions_.size());
  for (size_t i = 0; i < info_positions_.size(); ++i) info[i] = codeword[info_positions_[i]];
  return info;
}

DecodeResult decode_bp(const LlrVector& llrs, const ParityMatrix& pm, int max_iter,
                       BpVariant variant) {
  if (static_cast<int>(llrs.size()) != pm.n)
    throw std::invalid_argument("decode_bp: LLR length does not match codeword length");
  if (max_iter < 1) throw std::invalid_argument("decode_bp: max_iter must be >= 1");

  // Internally messages live in the log(P(0)/P(1)) domain, where the parity
  // constraint is the plain tanh product rule; flip signs at entry and exit.
  const int n = pm.n, m = pm.m;
  std::vector<double> chan(n);
  for (int v = 0; v < n; ++v) chan[v] = std::clamp(-llrs[v], -kLlrMax, kLlrMax);

  // edge storage: per check, contiguous slots
  std::vector<std::uint32_t> check_offset(m + 1, 0);
  for (int c = 0; c < m; ++c)
    check_offset[c + 1] = check_offset[c] + static_cast<std::uint32_t>(pm.check_nbrs[c].size());
  const std::uint32_t n_edges = check_offset[m];
  // per-variable view of its edge slots
  std::vector<std::uint32_t> var_edges_offset(n + 1, 0);
  for (int v = 0; v < n; ++v)
    var_edges_offset[v + 1] = var_edges_offset[v] + static_cast<std::uint32_t>(pm.var_nbrs[v].size());
  std::vector<std::uint32_t> var_edges(n_edges);
  {
    std::vector<std::uint32_t> fill(n, 0);
    for (int c = 0; c < m; ++c) {
      for (size_t j = 0; j < pm.check_nbrs[c].size(); ++j) {
        std::uint32_t v = pm.check_nbrs[c][j];
        var_edges[var_edges_offset[v] + fill[v]++] = check_offset[c] + static_cast<std::uint32_t>(j);
      }
    }
  }

  std::vector<double> msg_c2v(n_edges, 0.0);   // check -> variable
  std::vector<double> msg_v2c(n_edges, 0.0);   // variable -> check
  std::vector<double> posterior(n);
  std::vector<std::uint8_t> hard(n);
  std::vector<double> scratch(16);

  // A bit with exactly zero posterior is an undecided tie; a tie never counts
  // as convergence even when the tie-broken word happens to satisfy parity
  // (all-zero input would otherwise "converge" to the all-zero codeword).
  auto hard_decide = [&]() {
    bool tie = false;
    for (int v = 0; v < n; ++v) {
      // internal convention: negative posterior means P(1) > P(0)
      hard[v] = posterior[v] < 0.0 ? 1 : 0;
      tie |= posterior[v] == 0.0;
    }
    return tie;
  };
  auto public_posteriors = [&]() {
    std::vector<double> out(n);
    for (int v = 0; v < n; ++v) out[v] = -posterior[v];
    return out;
  };

  for (int v = 0; v < n; ++v) posterior[v] = chan[v];
  if (!hard_decide() && pm.parity_ok(hard)) return {hard, public_posteriors(), true, 0};

  // initial variable-to-check messages are the channel values
  for (int c = 0; c < m; ++c)
    for (size_t j = 0; j < pm.check_nbrs[c].size(); ++j)
      msg_v2c[check_offset[c] + j] = chan[pm.check_nbrs[c][j]];

  int iter = 0;
  for (iter = 1; iter <= max_iter; ++iter) {
    // check update
    for (int c = 0; c < m; ++c) {
      const std::uint32_t off = check_offset[c];
      const size_t deg = pm.check_nbrs[c].size();
      if (scratch.size() < 2 * deg + 2) scratch.resize(2 * deg + 2);
      double* fwd = scratch.data();            // prefix products
      double* bwd = scratch.data() + deg + 1;  // suffix products
      fwd[0] = 1.0;
      bwd[deg] = 1.0;
      if (variant == BpVariant::SumProduct) {
        for (size_t j = 0; j < deg; ++j) fwd[j + 1] = fwd[j] * std::tanh(0.5 * msg_v2c[off + j]);
        for (size_t j = deg; j > 0; --j) bwd[j - 1] = bwd[j] * std::tanh(0.5 * msg_v2c[off + j - 1]);
        for (size_t j = 0; j < deg; ++j) {
          double t = std::clamp(fwd[j] * bwd[j + 1], -1.0 + 1e-15, 1.0 - 1e-15);
          msg_c2v[off + j] = std::clamp(2.0 * std::atanh(t), -kLlrMax, kLlrMax);
        }
      } else {
        // min-sum: sign product and two smallest magnitudes
        double min1 = kLlrMax, min2 = kLlrMax;
        size_t argmin = 0;
        double sign_all = 1.0;
        for (size_t j = 0; j < deg; ++j) {
          double x = msg_v2c[off + j];
          double ax = std::fabs(x);
          if (x < 0.0) sign_all = -sign_all;
          if (ax < min1) {
            min2 = min1;
            min1 = ax;
            argmin = j;
          } else if (ax < min2) {
            min2 = ax;
          }
        }
        for (size_t j = 0; j < deg; ++j) {
          double x = msg_v2c[off + j];
          double s = sign_all * (x < 0.0 ? -1.0 : 1.0);
          msg_c2v[off + j] = s * (j == argmin ? min2 : min1);
        }
      }
    }

    // variable update and posterior
    for (int v = 0; v < n; ++v) {
      double total = chan[v];
      for (std::uint32_t e = var_edges_offset[v]; e < var_edges_offset[v + 1]; ++e)
        total += msg_c2v[var_edges[e]];
      posterior[v] = total;
      for (std::uint32_t e = var_edges_offset[v]; e < var_edges_offset[v + 1]; ++e) {
        std::uint32_t slot = var_edges[e];
        msg_v2c[slot] = std::clamp(total - msg_c2v[slot], -kLlrMax, kLlrMax);
      }
    }

    if (!hard_decide() && pm.parity_ok(hard))
      return {hard, public_posteriors(), true, iter};
  }
  return {hard, public_posteriors(), false, max_iter};
}

std::vector<std::uint32_t> make_permutation(int n, RngStream& rng) {
  std::vector<std::uint32_t> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (int i = n - 1; i > 0; --i) {
    // rejection-free bounded draw; bias is negligible for our n but keep exact
    std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
    std::uint64_t lim = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = rng.next_u64();
    } while (x >= lim);
    std::swap(perm[i], perm[x % bound]);
  }
  return perm;
}

}  // namespace llrq
