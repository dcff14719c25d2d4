#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wspin/errors.hpp"
#include "wspin/radial_geometry.hpp"
#include "wspin/witten_model.hpp"

namespace wspin {

struct RunTolerances {
  double quadrature_rel = 1e-12;
  double identity_rel = 1e-6;
  double spectrum_accuracy = 1e-3;
  double oracle_mc = 1e-3;
  double oracle_axisym = 1e-8;
  double kernel_product = 1e-10;
  double ratio_spread = 10.0;
  double scaling_drift = 1e-2;
  double partial_wave = 1e-10;

  std::map<std::string, double*> fields() {
    return {{"quadrature_rel", &quadrature_rel}, {"identity_rel", &identity_rel},
            {"spectrum_accuracy", &spectrum_accuracy}, {"oracle_mc", &oracle_mc},
            {"oracle_axisym", &oracle_axisym}, {"kernel_product", &kernel_product},
            {"ratio_spread", &ratio_spread}, {"scaling_drift", &scaling_drift},
            {"partial_wave", &partial_wave}};
  }
  json to_json() const {
    auto self = *this;
    json j;
    for (auto& [k, v] : self.fields()) j[k] = *v;
    return j;
  }
};

struct RunConfig {
  std::string label = "model";
  int n = 3;
  double rho = 1.0;
  double C_n = 3.0;
  InteriorSpec interior;
  std::vector<Mode> modes;
  std::optional<double> mollifier_width;
  RunTolerances tol;
  int mesh = 256;
  int k_max = 2;
  std::vector<double> scales{1.0};
  std::vector<double> cap_levels{1.0};
  std::vector<double> rho_values;
  std::vector<double> greens_points{0.1, 0.3, 0.5, 0.7, 0.9};  // fractions of the cap radius R'
  std::uint64_t mc_samples = 1'000'000;
  std::string output_prefix;
  std::uint64_t seed = 0;
  std::string source;  // path the config was read from

  json to_json() const {
    json m = json::array();
    for (const auto& md : modes) {
      json c = json::array();
      for (Eigen::Index i = 0; i < md.coefficient.size(); ++i)
        c.push_back({md.coefficient[i].real(), md.coefficient[i].imag()});
      json d = json::array();
      for (Eigen::Index i = 0; i < md.direction.size(); ++i) d.push_back(md.direction[i]);
      m.push_back({{"spinor", md.spinor}, {"l", md.l}, {"direction", d}, {"coefficient", c}});
    }
    json j{{"label", label},
           {"n", n},
           {"rho", rho},
           {"C_n", C_n},
           {"interior", interior.to_json()},
           {"modes", m},
           {"tolerances", tol.to_json()},
           {"mesh", {{"size", mesh}, {"k_max", k_max}}},
           {"sweep", {{"scales", scales}, {"cap_levels", cap_levels}, {"rho", rho_values}}},
           {"greens_check", {{"points", greens_points}, {"samples", mc_samples}}},
           {"output", {{"prefix", output_prefix}}},
           {"seed", seed}};
    j["mollifier_width"] = mollifier_width ? json(*mollifier_width) : json(nullptr);
    return j;
  }
};

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class ConfigReader {
 public:
  ConfigReader(std::string path, std::string text) : path_(std::move(path)), text_(std::move(text)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::size_t pos = key.empty() ? std::string::npos : text_.find("\"" + key + "\"");
    int line = pos == std::string::npos ? 1 : line_of_offset(text_, pos);
    throw ConfigError(path_ + ":" + std::to_string(line) + ": " + msg);
  }

  void only(const json& obj, const std::string& where, std::set<std::string> allowed) const {
    if (!obj.is_object()) fail(where, "'" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(it.key(), "unknown field '" + it.key() + "'");
  }

  double number(const json& obj, const std::string& key, std::optional<double> dflt = {}) const {
    if (!obj.contains(key)) {
      if (dflt) return *dflt;
      fail("", "missing required field '" + key + "'");
    }
    if (!obj[key].is_number()) fail(key, "field '" + key + "' must be a number");
    return obj[key].get<double>();
  }

  double positive(const json& obj, const std::string& key, std::optional<double> dflt = {}) const {
    double v = number(obj, key, dflt);
    if (!(v > 0.0)) fail(key, "field '" + key + "' must be positive");
    return v;
  }

  int integer(const json& obj, const std::string& key, std::optional<int> dflt = {}) const {
    if (!obj.contains(key)) {
      if (dflt) return *dflt;
      fail("", "missing required field '" + key + "'");
    }
    if (!obj[key].is_number_integer()) fail(key, "field '" + key + "' must be an integer");
    return obj[key].get<int>();
  }

  std::vector<double> numbers(const json& obj, const std::string& key,
                              std::vector<double> dflt) const {
    if (!obj.contains(key)) return dflt;
    const json& a = obj[key];
    if (!a.is_array() || a.empty()) fail(key, "field '" + key + "' must be a non-empty array");
    std::vector<double> out;
    for (auto& v : a) {
      if (!v.is_number()) fail(key, "field '" + key + "' must contain numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

 private:
  std::string path_;
  std::string text_;
};

inline Mode parse_mode(const ConfigReader& rd, const json& m) {
  rd.only(m, "modes", {"spinor", "l", "direction", "coefficient"});
  Mode md;
  md.spinor = rd.integer(m, "spinor", 0);
  md.l = rd.integer(m, "l");
  std::vector<double> dir = rd.numbers(m, "direction", {});
  md.direction = Vec::Map(dir.data(), static_cast<Eigen::Index>(dir.size()));
  if (!m.contains("coefficient") || !m["coefficient"].is_array())
    rd.fail("modes", "mode needs a 'coefficient' array");
  const json& c = m["coefficient"];
  md.coefficient = Spinor(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].is_number())
      md.coefficient[i] = c[i].get<double>();
    else if (c[i].is_array() && c[i].size() == 2 && c[i][0].is_number() && c[i][1].is_number())
      md.coefficient[i] = cplx(c[i][0].get<double>(), c[i][1].get<double>());
    else
      rd.fail("coefficient", "coefficient entries must be numbers or [re, im] pairs");
  }
  return md;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text, const std::string& path = "<config>") {
  detail::ConfigReader rd(path, text);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(path + ":" + std::to_string(line) + ": malformed JSON");
  }
  rd.only(j, "config",
          {"label", "n", "rho", "C_n", "interior", "modes", "mollifier_width", "tolerances", "mesh",
           "sweep", "greens_check", "output", "seed"});
  RunConfig c;
  c.source = path;
  if (j.contains("label")) {
    if (!j["label"].is_string()) rd.fail("label", "field 'label' must be a string");
    c.label = j["label"].get<std::string>();
  }
  c.n = rd.integer(j, "n");
  if (c.n < 3) rd.fail("n", "field 'n' must be at least 3");
  c.rho = rd.positive(j, "rho");
  c.C_n = rd.positive(j, "C_n", 3.0);
  if (j.contains("interior")) {
    const json& in = j["interior"];
    rd.only(in, "interior", {"kind", "cap_radius", "coefficients"});
    std::string kind = in.value("kind", std::string("capped"));
    if (kind == "capped") {
      c.interior.kind = InteriorSpec::Kind::Capped;
      c.interior.cap_radius = rd.positive(in, "cap_radius", c.rho);
    } else if (kind == "exact") {
      c.interior.kind = InteriorSpec::Kind::Exact;
    } else if (kind == "polynomial") {
      c.interior.kind = InteriorSpec::Kind::Polynomial;
      c.interior.coefficients = rd.numbers(in, "coefficients", {});
      if (c.interior.coefficients.empty()) rd.fail("interior", "polynomial interior needs coefficients");
    } else {
      rd.fail("kind", "interior kind must be capped, exact or polynomial");
    }
  } else {
    c.interior.cap_radius = c.rho;
  }
  if (j.contains("modes")) {
    if (!j["modes"].is_array()) rd.fail("modes", "field 'modes' must be an array");
    for (auto& m : j["modes"]) c.modes.push_back(detail::parse_mode(rd, m));
  }
  if (j.contains("mollifier_width") && !j["mollifier_width"].is_null())
    c.mollifier_width = rd.positive(j, "mollifier_width");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    auto f = c.tol.fields();
    std::set<std::string> keys;
    for (auto& [k, _] : f) keys.insert(k);
    rd.only(t, "tolerances", keys);
    for (auto& [k, p] : f) *p = rd.positive(t, k, *p);
  }
  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    rd.only(m, "mesh", {"size", "k_max"});
    c.mesh = rd.integer(m, "size", c.mesh);
    c.k_max = rd.integer(m, "k_max", c.k_max);
    if (c.mesh < 64) rd.fail("size", "mesh size must be at least 64");
    if (c.k_max < 2) rd.fail("k_max", "k_max must be at least 2");
  }
  c.rho_values = {c.rho};
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    rd.only(s, "sweep", {"scales", "cap_levels", "rho"});
    c.scales = rd.numbers(s, "scales", c.scales);
    c.cap_levels = rd.numbers(s, "cap_levels", c.cap_levels);
    c.rho_values = rd.numbers(s, "rho", c.rho_values);
    for (double v : c.scales)
      if (!(v > 0.0)) rd.fail("scales", "sweep scales must be positive");
    for (double v : c.cap_levels)
      if (!(v > 0.0 && v <= 1.0)) rd.fail("cap_levels", "cap levels must lie in (0, 1]");
    for (double v : c.rho_values)
      if (!(v > 0.0)) rd.fail("rho", "sweep rho values must be positive");
  }
  if (j.contains("greens_check")) {
    const json& g = j["greens_check"];
    rd.only(g, "greens_check", {"points", "samples"});
    c.greens_points = rd.numbers(g, "points", c.greens_points);
    for (double v : c.greens_points)
      if (!(v > 0.0 && v < 1.0)) rd.fail("points", "greens_check points must lie in (0, 1)");
    c.mc_samples = static_cast<std::uint64_t>(rd.positive(g, "samples", double(c.mc_samples)));
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    rd.only(o, "output", {"prefix"});
    if (o.contains("prefix")) {
      if (!o["prefix"].is_string()) rd.fail("prefix", "output prefix must be a string");
      c.output_prefix = o["prefix"].get<std::string>();
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) rd.fail("seed", "seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ":0: cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

// KEY=VAL against the tolerance table.
inline void apply_tolerance_override(RunConfig& c, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol-override: expected KEY=VAL, got '" + kv + "'");
  std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
  auto f = c.tol.fields();
  auto it = f.find(key);
  if (it == f.end()) throw ConfigError("--tol-override: unknown tolerance '" + key + "'");
  double v;
  try {
    std::size_t used = 0;
    v = std::stod(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
  } catch (const std::exception&) {
    throw ConfigError("--tol-override: value for '" + key + "' is not a number");
  }
  if (!(v > 0.0)) throw ConfigError("--tol-override: '" + key + "' must be positive");
  *it->second = v;
}

}  // namespace wspin
