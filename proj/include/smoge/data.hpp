#pragma once

#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smoge/model.hpp"

namespace smoge {

// %.17g: shortest text that round-trips a double.
inline std::string fmt_double(double v, int sig_digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, v);
  return buf;
}

inline std::string fmt_array(std::span<const double> v, int sig_digits = 17) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_double(v[i], sig_digits);
  }
  return s + "]";
}

// How a dataset came to be: generator id, seed, and the realized
// ground-truth parameters as key/value lines for the sidecar record.
struct Provenance {
  std::string dgp_id = "none";
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> detail;
};

struct Dataset {
  int input_dim = 0;
  std::vector<double> x;  // row-major, size n * input_dim
  std::vector<double> y;
  std::vector<int> z;     // 1-based true assignment, -1 when unknown
  Provenance provenance;

  int size() const { return static_cast<int>(y.size()); }

  std::span<const double> row(int i) const {
    return {x.data() + static_cast<std::size_t>(i) * input_dim,
            static_cast<std::size_t>(input_dim)};
  }
};

inline double log_likelihood(const MixingMeasure& g, const Dataset& data) {
  require(data.input_dim == g.input_dim, "log_likelihood: input dimension mismatch");
  double ll = 0.0;
  for (int i = 0; i < data.size(); ++i)
    ll += log_conditional_density(g, data.y[i], data.row(i));
  return ll;
}

// CSV with header x1..xd,y,z. The provenance sidecar goes to <path>.prov.
inline void write_dataset_csv(const std::string& path, const Dataset& ds,
                              int sig_digits = 17) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  for (int u = 0; u < ds.input_dim; ++u) out << "x" << (u + 1) << ",";
  out << "y,z\n";
  for (int i = 0; i < ds.size(); ++i) {
    for (int u = 0; u < ds.input_dim; ++u)
      out << fmt_double(ds.x[static_cast<std::size_t>(i) * ds.input_dim + u], sig_digits)
          << ",";
    out << fmt_double(ds.y[i], sig_digits) << "," << ds.z[i] << "\n";
  }
}

inline void write_provenance(const std::string& path, const Provenance& prov) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  out << "dgp = \"" << prov.dgp_id << "\"\n";
  out << "seed = " << prov.seed << "\n";
  for (const auto& [k, v] : prov.detail) out << k << " = " << v << "\n";
}

inline void write_dataset(const std::string& path, const Dataset& ds, int sig_digits = 17) {
  write_dataset_csv(path, ds, sig_digits);
  write_provenance(path + ".prov", ds.provenance);
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "z")
    throw ParseError(path + ": expected header x1..xd,y,z");
  Dataset ds;
  ds.input_dim = static_cast<int>(header.size()) - 2;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != ds.input_dim + 2)
      throw ParseError(path + ":" + std::to_string(line_no) + ": wrong column count");
    for (int u = 0; u < ds.input_dim; ++u) ds.x.push_back(vals[u]);
    ds.y.push_back(vals[ds.input_dim]);
    ds.z.push_back(static_cast<int>(vals[ds.input_dim + 1]));
  }
  return ds;
}

}  // namespace smoge
