#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sirs/flow.hpp"
#include "sirs/params.hpp"
#include "sirs/text.hpp"
#include "sirs/types.hpp"

namespace sirs {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line, int col)
      : std::runtime_error("config:" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                           msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

enum class OutputFormat { Text, Csv };

/// One scenario: model parameters, optional initial points and stepper
/// settings, a sampling seed, and the output destination. Parsing is strict:
/// unknown keys are errors.
struct ScenarioConfig {
  Params<double> params{};
  std::vector<State<double>> initial_points;
  FlowSettings<double> flow{};
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::Text;
  std::string output_path;  // empty = stdout

  friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    auto params_tuple = [](const Params<double>& p) {
      return std::tuple(p.d, p.alpha, p.sigma, p.mu, p.r_a, p.r_s, p.beta1, p.beta2, p.theta,
                        p.omega, p.N);
    };
    if (params_tuple(a.params) != params_tuple(b.params)) return false;
    if (a.initial_points.size() != b.initial_points.size()) return false;
    for (std::size_t i = 0; i < a.initial_points.size(); ++i)
      if (a.initial_points[i] != b.initial_points[i]) return false;
    return a.flow.abs_tol == b.flow.abs_tol && a.flow.rel_tol == b.flow.rel_tol &&
           a.flow.max_step == b.flow.max_step && a.seed == b.seed && a.format == b.format &&
           a.output_path == b.output_path;
  }
};

namespace detail {

struct ConfigLine {
  int number = 0;
  std::string key;
  std::vector<std::string> values;  // empty for block open/close
  int key_col = 1;
  int value_col = 1;
  enum Kind { KeyValue, BlockOpen, BlockClose } kind = KeyValue;
};

inline std::vector<ConfigLine> lex_config(std::string_view text) {
  std::vector<ConfigLine> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::pair<std::string, int>> tokens;  // (token, column)
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      tokens.emplace_back(std::string(line.substr(i, j - i)), static_cast<int>(i) + 1);
      i = j;
    }
    if (tokens.empty()) continue;

    ConfigLine cl;
    cl.number = line_no;
    if (tokens.size() == 1 && tokens[0].first == "}") {
      cl.kind = ConfigLine::BlockClose;
      out.push_back(cl);
      continue;
    }
    if (tokens.size() == 2 && tokens[1].first == "{") {
      cl.kind = ConfigLine::BlockOpen;
      cl.key = tokens[0].first;
      cl.key_col = tokens[0].second;
      out.push_back(cl);
      continue;
    }
    if (tokens.size() >= 3 && tokens[1].first == "=") {
      cl.kind = ConfigLine::KeyValue;
      cl.key = tokens[0].first;
      cl.key_col = tokens[0].second;
      cl.value_col = tokens[2].second;
      for (std::size_t k = 2; k < tokens.size(); ++k) cl.values.push_back(tokens[k].first);
      out.push_back(cl);
      continue;
    }
    throw ConfigError("expected 'key = value', 'key {' or '}'", line_no, tokens[0].second);
  }
  return out;
}

inline double parse_number(const ConfigLine& cl, const std::string& token) {
  double v;
  if (!parse_double(token, v))
    throw ConfigError("invalid number '" + token + "' for key '" + cl.key + "'", cl.number,
                      cl.value_col);
  return v;
}

inline double parse_scalar(const ConfigLine& cl) {
  if (cl.values.size() != 1)
    throw ConfigError("key '" + cl.key + "' expects exactly one value", cl.number, cl.value_col);
  return parse_number(cl, cl.values[0]);
}

}  // namespace detail

/// Parse the scenario text. Errors carry line/column; unknown keys are
/// rejected so parameter typos cannot slip through; the parsed parameters
/// must validate (warnings pass).
inline ScenarioConfig parse_config(std::string_view text) {
  using detail::ConfigLine;
  const auto lines = detail::lex_config(text);

  ScenarioConfig cfg;
  std::map<std::string, bool> seen_params;
  bool have_params = false;

  std::size_t i = 0;
  auto parse_params_block = [&](std::size_t& idx) {
    const std::map<std::string, double Params<double>::*> fields = {
        {"d", &Params<double>::d},         {"alpha", &Params<double>::alpha},
        {"sigma", &Params<double>::sigma}, {"mu", &Params<double>::mu},
        {"r_a", &Params<double>::r_a},     {"r_s", &Params<double>::r_s},
        {"beta1", &Params<double>::beta1}, {"beta2", &Params<double>::beta2},
        {"theta", &Params<double>::theta}, {"omega", &Params<double>::omega},
        {"N", &Params<double>::N}};
    for (++idx; idx < lines.size(); ++idx) {
      const auto& cl = lines[idx];
      if (cl.kind == ConfigLine::BlockClose) {
        for (const auto& [name, member] : fields)
          if (!seen_params.count(name))
            throw ConfigError("params block is missing key '" + name + "'", cl.number, 1);
        return;
      }
      if (cl.kind != ConfigLine::KeyValue)
        throw ConfigError("nested blocks are not allowed inside 'params'", cl.number, cl.key_col);
      const auto it = fields.find(cl.key);
      if (it == fields.end())
        throw ConfigError("unknown key '" + cl.key + "' in params", cl.number, cl.key_col);
      if (seen_params.count(cl.key))
        throw ConfigError("duplicate key '" + cl.key + "' in params", cl.number, cl.key_col);
      seen_params[cl.key] = true;
      cfg.params.*(it->second) = detail::parse_scalar(cl);
    }
    throw ConfigError("unterminated 'params' block", lines.back().number, 1);
  };

  auto parse_flow_block = [&](std::size_t& idx) {
    std::map<std::string, bool> seen;
    for (++idx; idx < lines.size(); ++idx) {
      const auto& cl = lines[idx];
      if (cl.kind == ConfigLine::BlockClose) return;
      if (cl.kind != ConfigLine::KeyValue)
        throw ConfigError("nested blocks are not allowed inside 'flow'", cl.number, cl.key_col);
      if (seen.count(cl.key))
        throw ConfigError("duplicate key '" + cl.key + "' in flow", cl.number, cl.key_col);
      seen[cl.key] = true;
      if (cl.key == "abs_tol")
        cfg.flow.abs_tol = detail::parse_scalar(cl);
      else if (cl.key == "rel_tol")
        cfg.flow.rel_tol = detail::parse_scalar(cl);
      else if (cl.key == "max_step")
        cfg.flow.max_step = detail::parse_scalar(cl);
      else
        throw ConfigError("unknown key '" + cl.key + "' in flow", cl.number, cl.key_col);
    }
    throw ConfigError("unterminated 'flow' block", lines.back().number, 1);
  };

  auto parse_output_block = [&](std::size_t& idx) {
    std::map<std::string, bool> seen;
    for (++idx; idx < lines.size(); ++idx) {
      const auto& cl = lines[idx];
      if (cl.kind == ConfigLine::BlockClose) return;
      if (cl.kind != ConfigLine::KeyValue)
        throw ConfigError("nested blocks are not allowed inside 'output'", cl.number, cl.key_col);
      if (seen.count(cl.key))
        throw ConfigError("duplicate key '" + cl.key + "' in output", cl.number, cl.key_col);
      seen[cl.key] = true;
      if (cl.key == "format") {
        if (cl.values.size() != 1 || (cl.values[0] != "csv" && cl.values[0] != "text"))
          throw ConfigError("output format must be 'csv' or 'text'", cl.number, cl.value_col);
        cfg.format = cl.values[0] == "csv" ? OutputFormat::Csv : OutputFormat::Text;
      } else if (cl.key == "path") {
        if (cl.values.size() != 1)
          throw ConfigError("output path expects one value", cl.number, cl.value_col);
        cfg.output_path = cl.values[0];
      } else
        throw ConfigError("unknown key '" + cl.key + "' in output", cl.number, cl.key_col);
    }
    throw ConfigError("unterminated 'output' block", lines.back().number, 1);
  };

  bool have_flow = false, have_output = false, have_seed = false;
  for (; i < lines.size(); ++i) {
    const auto& cl = lines[i];
    if (cl.kind == ConfigLine::BlockClose)
      throw ConfigError("unmatched '}'", cl.number, 1);
    if (cl.kind == ConfigLine::BlockOpen) {
      if (cl.key == "params") {
        if (have_params) throw ConfigError("duplicate 'params' block", cl.number, cl.key_col);
        have_params = true;
        parse_params_block(i);
      } else if (cl.key == "flow") {
        if (have_flow) throw ConfigError("duplicate 'flow' block", cl.number, cl.key_col);
        have_flow = true;
        parse_flow_block(i);
      } else if (cl.key == "output") {
        if (have_output) throw ConfigError("duplicate 'output' block", cl.number, cl.key_col);
        have_output = true;
        parse_output_block(i);
      } else
        throw ConfigError("unknown block '" + cl.key + "'", cl.number, cl.key_col);
      continue;
    }
    // top-level key/value
    if (cl.key == "initial_point") {
      if (cl.values.size() != 3)
        throw ConfigError("initial_point expects three values: S I_a I_s", cl.number,
                          cl.value_col);
      State<double> s;
      for (int k = 0; k < 3; ++k) s[k] = detail::parse_number(cl, cl.values[k]);
      cfg.initial_points.push_back(s);
    } else if (cl.key == "seed") {
      if (have_seed) throw ConfigError("duplicate key 'seed'", cl.number, cl.key_col);
      have_seed = true;
      if (cl.values.size() != 1)
        throw ConfigError("seed expects exactly one value", cl.number, cl.value_col);
      const std::string& tok = cl.values[0];
      std::uint64_t v = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ConfigError("seed must be a nonnegative integer", cl.number, cl.value_col);
      cfg.seed = v;
    } else
      throw ConfigError("unknown key '" + cl.key + "'", cl.number, cl.key_col);
  }
  if (!have_params) throw ConfigError("missing 'params' block", 1, 1);

  const auto check = validate(cfg.params);
  if (!check.ok()) {
    std::string msg = "invalid params:";
    for (const auto& v : check.violations) msg += " " + v + ";";
    throw ConfigError(msg, 1, 1);
  }
  for (const auto& s : cfg.initial_points)
    if (!in_domain(cfg.params, s, 1e-12))
      throw ConfigError("initial_point outside the invariant simplex", 1, 1);
  try {
    validate_settings(cfg.flow);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid flow settings: ") + e.what(), 1, 1);
  }
  return cfg;
}

/// Canonical text for a scenario; parse_config(render_config(c)) == c.
inline std::string render_config(const ScenarioConfig& cfg) {
  std::string out;
  out += "params {\n";
  const std::pair<const char*, double> fields[] = {
      {"d", cfg.params.d},         {"alpha", cfg.params.alpha}, {"sigma", cfg.params.sigma},
      {"mu", cfg.params.mu},       {"r_a", cfg.params.r_a},     {"r_s", cfg.params.r_s},
      {"beta1", cfg.params.beta1}, {"beta2", cfg.params.beta2}, {"theta", cfg.params.theta},
      {"omega", cfg.params.omega}, {"N", cfg.params.N}};
  for (const auto& [name, value] : fields)
    out += std::string("  ") + name + " = " + format_double(value) + "\n";
  out += "}\n";
  out += "flow {\n";
  out += "  abs_tol = " + format_double(cfg.flow.abs_tol) + "\n";
  out += "  rel_tol = " + format_double(cfg.flow.rel_tol) + "\n";
  out += "  max_step = " + format_double(cfg.flow.max_step) + "\n";
  out += "}\n";
  for (const auto& s : cfg.initial_points)
    out += "initial_point = " + format_double(s[0]) + " " + format_double(s[1]) + " " +
           format_double(s[2]) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "output {\n";
  out += std::string("  format = ") + (cfg.format == OutputFormat::Csv ? "csv" : "text") + "\n";
  if (!cfg.output_path.empty()) out += "  path = " + cfg.output_path + "\n";
  out += "}\n";
  return out;
}

}  // namespace sirs
