#include "homog/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace homog {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + tok + "'");
  }
  return v;
}

int parse_int(const std::string& tok, int line) {
  int v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + tok + "'");
  }
  return v;
}

std::vector<double> parse_doubles(const std::vector<std::string>& toks, std::size_t from, int line) {
  std::vector<double> out;
  for (std::size_t i = from; i < toks.size(); ++i) out.push_back(parse_double(toks[i], line));
  return out;
}

void append_doubles(std::string& s, const std::vector<double>& v) {
  char buf[32];
  for (double x : v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    s.append(" ").append(buf, p);
  }
}

}  // namespace

std::string RunConfig::canonical() const {
  std::string s = "cell";
  char buf[32];
  auto put = [&](double x) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    s.append(" ").append(buf, p);
  };
  for (const auto& h : holes) {
    put(h.center.x);
    put(h.center.y);
    put(h.radius);
    s += " p" + std::to_string(h.phase);
  }
  s += " segments " + std::to_string(segments);
  s += " target_h";
  put(cell_target_h);
  s += " coeff " + coeff_name;
  append_doubles(s, coeff_params);
  for (int m = 0; m < 2; ++m) {
    s += " phase" + std::to_string(m + 1) + " " + phase_names[static_cast<std::size_t>(m)];
    append_doubles(s, phase_params[static_cast<std::size_t>(m)]);
  }
  s += " f0 " + f0_name;
  append_doubles(s, f0_params);
  for (int m = 0; m < 2; ++m) {
    s += " g" + std::to_string(m + 1) + " " + g_names[static_cast<std::size_t>(m)];
    append_doubles(s, g_params[static_cast<std::size_t>(m)]);
  }
  s += " sweep";
  for (int n : sweep_n) s += " " + std::to_string(n);
  s += " hom_h";
  put(hom_h);
  s += " newton";
  put(newton_tol);
  s += " cg";
  put(cg_tol);
  return s;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.sweep_n.clear();
  cfg.g_names = {"zero", "zero"};
  std::string section;
  std::string raw;
  int line = 0;
  bool saw_sweep_key = false;

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      static const char* known[] = {"cell", "coefficient", "phase1", "phase2",
                                    "data", "sweep", "mesh", "tolerances", "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto toks = split_ws(value);
    if (toks.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value for '" + key + "'");

    auto unknown_key = [&]() -> ConfigError {
      return ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "' in [" + section + "]");
    };

    if (section == "cell") {
      if (key == "segments") cfg.segments = parse_int(toks[0], line);
      else if (key == "target_h") cfg.cell_target_h = parse_double(toks[0], line);
      else if (key == "hole") {
        if (toks.size() != 4) {
          throw ConfigError("line " + std::to_string(line) + ": hole needs 'cx cy radius phase'");
        }
        HoleSpec h;
        h.center = {parse_double(toks[0], line), parse_double(toks[1], line)};
        h.radius = parse_double(toks[2], line);
        h.phase = parse_int(toks[3], line);
        cfg.holes.push_back(h);
      } else throw unknown_key();
    } else if (section == "coefficient") {
      if (key == "name") cfg.coeff_name = toks[0];
      else if (key == "params") cfg.coeff_params = parse_doubles(toks, 0, line);
      else throw unknown_key();
    } else if (section == "phase1" || section == "phase2") {
      const std::size_t m = section == "phase1" ? 0 : 1;
      if (key == "name") cfg.phase_names[m] = toks[0];
      else if (key == "params") cfg.phase_params[m] = parse_doubles(toks, 0, line);
      else throw unknown_key();
    } else if (section == "data") {
      auto parse_field = [&](std::string& name, std::vector<double>& params) {
        name = toks[0];
        params = parse_doubles(toks, 1, line);
      };
      if (key == "f0") parse_field(cfg.f0_name, cfg.f0_params);
      else if (key == "g1") parse_field(cfg.g_names[0], cfg.g_params[0]);
      else if (key == "g2") parse_field(cfg.g_names[1], cfg.g_params[1]);
      else throw unknown_key();
    } else if (section == "sweep") {
      if (key == "n") {
        saw_sweep_key = true;
        for (const auto& t : toks) cfg.sweep_n.push_back(parse_int(t, line));
      } else throw unknown_key();
    } else if (section == "mesh") {
      if (key == "hom_h") cfg.hom_h = parse_double(toks[0], line);
      else throw unknown_key();
    } else if (section == "tolerances") {
      if (key == "newton") cfg.newton_tol = parse_double(toks[0], line);
      else if (key == "cg") cfg.cg_tol = parse_double(toks[0], line);
      else throw unknown_key();
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = toks[0];
      else if (key == "cache") cfg.cache_dir = toks[0];
      else throw unknown_key();
    } else {
      throw ConfigError("line " + std::to_string(line) + ": key outside any section");
    }
  }

  if (!saw_sweep_key) cfg.sweep_n = {2, 4, 8, 16};

  // Semantic validation.
  if (cfg.segments < 8) throw ConfigError("cell.segments must be at least 8");
  if (!(cfg.cell_target_h > 0.0)) throw ConfigError("cell.target_h must be positive");
  if (!(cfg.hom_h > 0.0)) throw ConfigError("mesh.hom_h must be positive");
  if (!(cfg.newton_tol > 0.0) || !(cfg.cg_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  for (int n : cfg.sweep_n) {
    if (n < 1) throw ConfigError("sweep.n entries must be positive integers");
  }
  {
    const auto report = validate_cell(cfg.holes);
    if (!report.ok) {
      std::string msg = "invalid cell geometry:";
      for (const auto& v : report.violations) msg += "\n  " + v;
      throw ConfigError(msg);
    }
  }
  try {
    cfg.coefficient();
    cfg.phase(0);
    cfg.phase(1);
    cfg.data_f0();
    cfg.data_g(0);
    cfg.data_g(1);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream iss(text);
  return parse_config(iss);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.holes = {{{0.29, 0.29}, 0.2, 1}, {{0.745, 0.745}, 0.15, 2}};
  cfg.segments = 64;
  cfg.cell_target_h = 1.0 / 16.0;
  cfg.coeff_name = "identity";
  cfg.phase_names = {"soft-sine", "soft-sine"};
  cfg.phase_params[0] = {0.7, 1.3};
  cfg.phase_params[1] = {0.7, 1.3};
  cfg.f0_name = "constant";
  cfg.f0_params = {1.0};
  cfg.g_names = {"bump", "bump"};
  cfg.g_params[0] = {1.0};
  cfg.g_params[1] = {-1.0};
  cfg.sweep_n = {2, 4, 8, 16};
  cfg.hom_h = 1.0 / 512.0;
  return cfg;
}

}  // namespace homog
