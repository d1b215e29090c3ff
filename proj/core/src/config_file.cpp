#include "mdpde/config_file.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mdpde/rng.hpp"
#include "mdpde/version.hpp"

namespace mdpde {

namespace {

using nlohmann::json;

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<long>(j.size());
  if (rows == 0) throw std::runtime_error("config: empty matrix");
  const auto cols = static_cast<long>(j.at(0).size());
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (static_cast<long>(j.at(r).size()) != cols)
      throw std::runtime_error("config: ragged matrix");
    for (long c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<long>(j.size()));
  for (long i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

json matrix_to_json_rows(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentConfig apply_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<long>>();
  if (j.contains("eps_grid")) cfg.eps_grid = j.at("eps_grid").get<std::vector<double>>();
  if (j.contains("alpha_grid"))
    cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  if (j.contains("kappa")) cfg.kappa = j.at("kappa").get<double>();
  if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("B_true")) cfg.B_true = matrix_from_json(j.at("B_true"));
  if (j.contains("b_true")) cfg.b_true = vector_from_json(j.at("b_true"));
  if (j.contains("sigma_true")) cfg.sigma_true = matrix_from_json(j.at("sigma_true"));
  if (j.contains("x0"))
    cfg.x0 = vector_from_json(j.at("x0"));
  else if (j.contains("b_true"))
    cfg.x0 = Vector::Zero(cfg.b_true.size());
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  cfg.validate();
  return cfg;
}

// --- minimal TOML subset -------------------------------------------------

struct TomlValue {
  std::variant<double, std::string, std::vector<TomlValue>> v;
};

void skip_ws(const std::string& s, size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

TomlValue parse_toml_value(const std::string& s, size_t& pos) {
  skip_ws(s, pos);
  if (pos >= s.size()) throw std::runtime_error("toml: missing value");
  if (s[pos] == '"') {
    std::string out;
    ++pos;
    while (pos < s.size() && s[pos] != '"') {
      if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
      out += s[pos++];
    }
    if (pos >= s.size()) throw std::runtime_error("toml: unterminated string");
    ++pos;
    return TomlValue{std::move(out)};
  }
  if (s[pos] == '[') {
    ++pos;
    std::vector<TomlValue> items;
    skip_ws(s, pos);
    if (pos < s.size() && s[pos] == ']') {
      ++pos;
      return TomlValue{std::move(items)};
    }
    while (true) {
      items.push_back(parse_toml_value(s, pos));
      skip_ws(s, pos);
      if (pos < s.size() && s[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < s.size() && s[pos] == ']') {
        ++pos;
        return TomlValue{std::move(items)};
      }
      throw std::runtime_error("toml: expected ',' or ']' in array");
    }
  }
  size_t end = pos;
  while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])) &&
         s[end] != ',' && s[end] != ']')
    ++end;
  const std::string token = s.substr(pos, end - pos);
  pos = end;
  try {
    size_t consumed = 0;
    const double num = std::stod(token, &consumed);
    if (consumed != token.size()) throw std::invalid_argument(token);
    return TomlValue{num};
  } catch (const std::exception&) {
    throw std::runtime_error("toml: cannot parse value '" + token + "'");
  }
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

json toml_to_json(const TomlValue& v) {
  if (const double* num = std::get_if<double>(&v.v)) {
    if (*num == static_cast<long long>(*num))
      return static_cast<long long>(*num);
    return *num;
  }
  if (const std::string* str = std::get_if<std::string>(&v.v)) return *str;
  json arr = json::array();
  for (const TomlValue& item : std::get<std::vector<TomlValue>>(v.v))
    arr.push_back(toml_to_json(item));
  return arr;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  return apply_json(json::parse(text));
}

ExperimentConfig config_from_toml(const std::string& text) {
  json j = json::object();
  std::istringstream in(text);
  std::string line;
  std::string pending;
  int balance = 0;
  while (std::getline(in, line)) {
    pending += strip_comment(line);
    balance = 0;
    bool in_string = false;
    for (char ch : pending) {
      if (ch == '"') in_string = !in_string;
      if (in_string) continue;
      if (ch == '[') ++balance;
      if (ch == ']') --balance;
    }
    if (balance > 0) {
      pending += ' ';  // array continues on the next line
      continue;
    }
    const size_t eq = pending.find('=');
    if (pending.find_first_not_of(" \t\r") == std::string::npos) {
      pending.clear();
      continue;
    }
    if (eq == std::string::npos)
      throw std::runtime_error("toml: expected 'key = value': " + pending);
    std::string key = pending.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    if (key.empty() || key.front() == '[')
      throw std::runtime_error("toml: tables are not supported");
    size_t pos = eq + 1;
    const TomlValue value = parse_toml_value(pending, pos);
    skip_ws(pending, pos);
    if (pos != pending.size() &&
        pending.find_first_not_of(" \t\r", pos) != std::string::npos)
      throw std::runtime_error("toml: trailing characters after value");
    j[key] = toml_to_json(value);
    pending.clear();
  }
  if (!pending.empty() && pending.find_first_not_of(" \t\r") != std::string::npos)
    throw std::runtime_error("toml: unterminated array");
  return apply_json(j);
}

ExperimentConfig load_config_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw std::runtime_error("cannot open config file " + filename);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const auto dot = filename.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : filename.substr(dot);
  if (ext == ".json") return config_from_json(text);
  if (ext == ".toml") return config_from_toml(text);
  const size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return config_from_json(text);
  return config_from_toml(text);
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  json j;
  j["n_grid"] = cfg.n_grid;
  j["eps_grid"] = cfg.eps_grid;
  j["alpha_grid"] = cfg.alpha_grid;
  j["kappa"] = cfg.kappa;
  j["reps"] = cfg.reps;
  j["base_seed"] = cfg.base_seed;
  j["B_true"] = matrix_to_json_rows(cfg.B_true);
  json b = json::array();
  for (long i = 0; i < cfg.b_true.size(); ++i) b.push_back(cfg.b_true(i));
  j["b_true"] = std::move(b);
  j["sigma_true"] = matrix_to_json_rows(cfg.sigma_true);
  json x0 = json::array();
  for (long i = 0; i < cfg.x0.size(); ++i) x0.push_back(cfg.x0(i));
  j["x0"] = std::move(x0);
  j["out_dir"] = cfg.out_dir;
  return j.dump(indent);
}

std::string experiment_metadata_json(const ExperimentConfig& cfg) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["rng_algorithm"] = Rng::algorithm_name();
  j["version"] = kVersion;
  j["conventions"] = {
      {"contamination_selection",
       "all n+1 observation times eligible; count = round(eps*(n+1)) to the "
       "nearest integer"},
      {"replication_seed", "pure function of (base_seed, n, eps_index, rep)"},
      {"paths_shared_across_alpha", true},
      {"failed_fits", "excluded from cell means, counted in failure_count"},
  };
  return j.dump(2);
}

}  // namespace mdpde
