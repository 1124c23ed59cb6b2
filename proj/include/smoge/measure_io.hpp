#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "smoge/data.hpp"
#include "smoge/measure.hpp"

namespace smoge {

// Human-editable mixing-measure files:
//
//   d = 2
//   family = "linear"
//
//   [[components]]
//   alpha0 = 0.4
//   alpha1 = [1.0, -0.8]
//   beta = [1.5, 1.0, 0.6]
//   sigma2 = 0.5
//
// Only this shape is understood: top-level scalars, [[components]] blocks,
// '#' comments. Unknown keys are rejected.

inline std::string format_measure(const MixingMeasure& g) {
  std::ostringstream out;
  out << "d = " << g.input_dim << "\n";
  out << "family = \"" << family_name(g.family) << "\"\n";
  for (const auto& c : g.components) {
    out << "\n[[components]]\n";
    out << "alpha0 = " << fmt_double(c.alpha0) << "\n";
    out << "alpha1 = " << fmt_array(c.alpha1) << "\n";
    out << "beta = " << fmt_array(c.beta) << "\n";
    out << "sigma2 = " << fmt_double(c.sigma2) << "\n";
  }
  return out.str();
}

inline void write_measure_file(const std::string& path, const MixingMeasure& g) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  out << format_measure(g);
}

namespace mio {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

inline double parse_number(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
}

inline std::vector<double> parse_array(const std::string& s, int line_no) {
  const std::string t = trim(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ParseError("line " + std::to_string(line_no) + ": expected an array");
  std::vector<double> out;
  std::string inner = t.substr(1, t.size() - 2);
  std::stringstream ss(inner);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (trim(cell).empty()) continue;
    out.push_back(parse_number(trim(cell), line_no));
  }
  return out;
}

inline std::string parse_string(const std::string& s, int line_no) {
  const std::string t = trim(s);
  if (t.size() < 2 || t.front() != '"' || t.back() != '"')
    throw ParseError("line " + std::to_string(line_no) + ": expected a quoted string");
  return t.substr(1, t.size() - 2);
}

}  // namespace mio

inline MixingMeasure parse_measure(const std::string& text) {
  MixingMeasure g;
  bool have_d = false, have_family = false;
  bool in_component = false;
  ExpertComponent current;
  bool have_alpha0 = false, have_alpha1 = false, have_beta = false, have_sigma2 = false;

  auto flush_component = [&](int line_no) {
    if (!in_component) return;
    if (!(have_alpha0 && have_alpha1 && have_beta && have_sigma2))
      throw ParseError("line " + std::to_string(line_no) +
                       ": component is missing one of alpha0/alpha1/beta/sigma2");
    g.components.push_back(current);
    current = ExpertComponent{};
    have_alpha0 = have_alpha1 = have_beta = have_sigma2 = false;
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = mio::trim(mio::strip_comment(raw));
    if (line.empty()) continue;
    if (line == "[[components]]") {
      flush_component(line_no);
      in_component = true;
      continue;
    }
    if (line.front() == '[')
      throw ParseError("line " + std::to_string(line_no) + ": unknown section '" + line + "'");
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = mio::trim(line.substr(0, eq));
    const std::string value = mio::trim(line.substr(eq + 1));
    if (!in_component) {
      if (key == "d") {
        g.input_dim = static_cast<int>(mio::parse_number(value, line_no));
        have_d = true;
      } else if (key == "family") {
        g.family = family_from_name(mio::parse_string(value, line_no));
        have_family = true;
      } else {
        throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    } else {
      if (key == "alpha0") {
        current.alpha0 = mio::parse_number(value, line_no);
        have_alpha0 = true;
      } else if (key == "alpha1") {
        current.alpha1 = mio::parse_array(value, line_no);
        have_alpha1 = true;
      } else if (key == "beta") {
        current.beta = mio::parse_array(value, line_no);
        have_beta = true;
      } else if (key == "sigma2") {
        current.sigma2 = mio::parse_number(value, line_no);
        have_sigma2 = true;
      } else {
        throw ParseError("line " + std::to_string(line_no) + ": unknown component key '" + key +
                         "'");
      }
    }
  }
  flush_component(line_no + 1);
  if (!have_d || !have_family) throw ParseError("measure file needs top-level d and family");
  if (g.components.empty()) throw ParseError("measure file has no [[components]] block");
  validate_measure(g);
  return g;
}

inline MixingMeasure load_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_measure(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace smoge
