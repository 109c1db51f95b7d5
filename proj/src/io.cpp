#include "llrq/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "llrq/errors.hpp"

namespace llrq {

std::string format_double(double v) {
  // %.17g always round-trips; prefer the shorter %.15g/%.16g form when exact
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v) break;
  }
  return buf;
}

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw LoadError("cannot open for writing: " + path);
  return f;
}
}  // namespace

void write_bler_csv(std::ostream& out, const BlerResult& result, bool header) {
  if (header) out << "snr_db,trials,errors,bler,method,n_bits,seed\n";
  for (const auto& p : result.points) {
    out << format_double(p.snr_db) << ',' << p.trials << ',' << p.errors << ','
        << format_double(p.bler) << ',' << method_name(result.method) << ',' << result.n_bits
        << ',' << result.seed << '\n';
  }
}

void write_bler_csv_file(const std::string& path, const BlerResult& result) {
  auto f = open_out(path);
  write_bler_csv(f, result);
}

void write_merged_bler_csv_file(const std::string& path, const std::vector<BlerResult>& results) {
  auto f = open_out(path);
  bool first = true;
  for (const auto& r : results) {
    write_bler_csv(f, r, first);
    first = false;
  }
}

void write_marginal_hist_csv(std::ostream& out, const LatentHistograms& h) {
  out << "z_index,bin_lo,bin_hi,count,density\n";
  for (int d = 0; d < 3; ++d) {
    const auto& m = h.marginal[d];
    for (size_t b = 0; b + 1 < m.edges.size(); ++b) {
      double width = m.edges[b + 1] - m.edges[b];
      double density = static_cast<double>(m.counts[b]) / (h.n_samples * width);
      out << (d + 1) << ',' << format_double(m.edges[b]) << ',' << format_double(m.edges[b + 1])
          << ',' << m.counts[b] << ',' << format_double(density) << '\n';
    }
  }
}

void write_joint_hist_csv(std::ostream& out, const LatentHistograms& h) {
  const auto& j = h.joint_logg_z3;
  const size_t bins_y = j.y_edges.size() - 1;
  out << "logg_lo,logg_hi,z3_lo,z3_hi,count,density\n";
  for (size_t bx = 0; bx + 1 < j.x_edges.size(); ++bx) {
    for (size_t by = 0; by + 1 < j.y_edges.size(); ++by) {
      long cnt = j.counts[bx * bins_y + by];
      double area = (j.x_edges[bx + 1] - j.x_edges[bx]) * (j.y_edges[by + 1] - j.y_edges[by]);
      double density = static_cast<double>(cnt) / (h.n_samples * area);
      out << format_double(j.x_edges[bx]) << ',' << format_double(j.x_edges[bx + 1]) << ','
          << format_double(j.y_edges[by]) << ',' << format_double(j.y_edges[by + 1]) << ','
          << cnt << ',' << format_double(density) << '\n';
    }
  }
}

void write_codebook(std::ostream& out, const ScalarCodebook& cb, const std::string& kind) {
  out << "llrq-codebook 1\n";
  out << "kind " << kind << "\n";
  out << "levels " << cb.levels.size() << "\n";
  for (double v : cb.levels) out << format_double(v) << "\n";
  out << "thresholds " << cb.thresholds.size() << "\n";
  for (double v : cb.thresholds) out << format_double(v) << "\n";
  out << "trace " << cb.trace.size() << "\n";
  for (double v : cb.trace) out << format_double(v) << "\n";
}

void write_codebook_file(const std::string& path, const ScalarCodebook& cb,
                         const std::string& kind) {
  auto f = open_out(path);
  write_codebook(f, cb, kind);
}

ScalarCodebook read_codebook(std::istream& in, std::string* kind) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "llrq-codebook" || version != 1)
    throw LoadError("bad codebook header");
  std::string kw, kind_val;
  if (!(in >> kw >> kind_val) || kw != "kind") throw LoadError("bad codebook kind line");
  if (kind) *kind = kind_val;

  auto read_block = [&](const char* name, std::vector<double>& dst) {
    size_t count = 0;
    if (!(in >> kw >> count) || kw != name)
      throw LoadError(std::string("bad codebook block: expected ") + name);
    dst.resize(count);
    for (auto& v : dst)
      if (!(in >> v)) throw LoadError("codebook truncated");
  };
  ScalarCodebook cb;
  read_block("levels", cb.levels);
  read_block("thresholds", cb.thresholds);
  read_block("trace", cb.trace);
  if (cb.thresholds.size() + 1 != cb.levels.size() && !cb.levels.empty() &&
      !(cb.levels.size() == 1 && cb.thresholds.empty()))
    throw LoadError("codebook threshold/level count mismatch");
  return cb;
}

ScalarCodebook read_codebook_file(const std::string& path, std::string* kind) {
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open codebook file: " + path);
  return read_codebook(f, kind);
}

void write_lut(std::ostream& out, const ReconstructionLut& lut) {
  out << "llrq-lut 1\n";
  out << "n_bits " << lut.spec.n_bits << "\n";
  out << "delta " << format_double(lut.spec.delta) << "\n";
  out << "k " << lut.k << "\n";
  out << "side " << lut.side << "\n";
  std::size_t flat = 0;
  for (int i0 = 0; i0 < lut.side; ++i0) {
    for (int i1 = 0; i1 < lut.side; ++i1) {
      for (int i2 = 0; i2 < lut.side; ++i2, ++flat) {
        out << i0 << ' ' << i1 << ' ' << i2;
        for (int j = 0; j < lut.k; ++j)
          out << ' ' << format_double(lut.values[flat * lut.k + j]);
        out << '\n';
      }
    }
  }
}

void write_lut_file(const std::string& path, const ReconstructionLut& lut) {
  auto f = open_out(path);
  write_lut(f, lut);
}

std::uint64_t file_fnv1a(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot hash missing file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!f) break;
  }
  return h;
}

}  // namespace llrq
