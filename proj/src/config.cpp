#include "ggl/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ggl/errors.hpp"

namespace ggl {

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d = {
      {"mode", ""},
      {"seed", "0"},
      {"threads", "1"},
      {"output.dir", "out"},
      {"graph.kind", "cycle"},
      {"graph.n", "10"},
      {"graph.seed", "0"},
      {"model", "lq"},
      {"model.a", "0.1"},
      {"model.sigma", "0.5"},
      {"model.q", "0"},
      {"model.eps", "1"},
      {"model.c", "1"},
      {"model.delta0", "0.5"},
      {"model.T", "1"},
      {"model.kappa_form", "derived"},
      {"arch", "fnn"},
      {"arch.hidden", "32"},
      {"arch.ntm_depth", "2"},
      {"arch.ntm_channels", "3"},
      {"arch.skip", "true"},
      {"arch.player", "1"},
      {"train.solver", "dp"},
      {"train.n_t", "50"},
      {"train.n_round", "40"},
      {"train.n_epoch", "150"},
      {"train.n_batch", "256"},
      {"train.lr", "0.001"},
      {"train.gamma", "0.5"},
      {"train.tau", "30"},
      {"metrics.n_paths", "2000"},
      {"metrics.fine_steps", "1000"},
      {"metrics.mre", "true"},
      {"metrics.paths_csv", "false"},
      {"metrics.paths_count", "10"},
      {"evaluate.checkpoint", ""},
      {"bench.archs", "fnn,ntm,cheb"},
      {"bench.graphs", "star,cycle,complete_bipartite,random_spanning_tree"},
      {"bench.targets", "lq,lqmh,nl,nlm"},
      {"bench.runs", "20"},
      {"bench.epoch_scale", "1"},
      {"bench.n_test", "25000"},
      {"bench.player", "1"},
      {"bench.depth", "3"},
      {"uat.family", "linear"},
      {"uat.rho", "0.5"},
      {"uat.kappa", "1"},
      {"uat.knots", "64"},
      {"uat.channels", "2"},
      {"uat.depths", "2,3,4,5,6,7,8"},
      {"uat.samples", "1000"},
  };
  return d;
}

Config::Config() : values_(defaults()) {}

namespace {

std::string trim(const std::string& s, std::size_t* lead = nullptr) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    if (lead) *lead = s.size();
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r");
  if (lead) *lead = b;
  return s.substr(b, e - b + 1);
}

}  // namespace

void Config::check_type(const Config& cfg, const std::string& key) {
  static const std::set<std::string> reals = {"model.a", "model.sigma", "model.q", "model.eps", "model.c",
                                              "model.delta0", "model.T", "train.lr", "train.gamma",
                                              "bench.epoch_scale", "uat.rho", "uat.kappa"};
  static const std::set<std::string> unsigned_ints = {"seed", "graph.seed"};
  static const std::set<std::string> flags = {"arch.skip", "metrics.mre", "metrics.paths_csv"};
  static const std::set<std::string> int_lists = {"uat.depths"};
  static const std::set<std::string> strings = {"mode", "output.dir", "graph.kind", "model", "model.kappa_form",
                                                "arch", "train.solver", "evaluate.checkpoint", "bench.archs",
                                                "bench.graphs", "bench.targets", "uat.family"};
  if (reals.count(key))
    cfg.real(key);
  else if (unsigned_ints.count(key))
    cfg.u64(key);
  else if (flags.count(key))
    cfg.flag(key);
  else if (int_lists.count(key))
    cfg.int_list(key);
  else if (!strings.count(key))
    cfg.integer(key);
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t lead = 0;
    std::string body = trim(line, &lead);
    if (body.empty() || body[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno, static_cast<int>(lead) + 1);
    std::string key = trim(line.substr(0, eq));
    std::size_t vlead = 0;
    std::string value = trim(line.substr(eq + 1), &vlead);
    if (key.empty()) throw ConfigError("empty key", lineno, static_cast<int>(lead) + 1);
    if (!defaults().count(key)) throw ConfigError("unknown key '" + key + "'", lineno, static_cast<int>(lead) + 1);
    if (cfg.lines_.count(key))
      throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(cfg.lines_[key]) + ")",
                        lineno, static_cast<int>(lead) + 1);
    cfg.values_[key] = value;
    cfg.lines_[key] = lineno;
    // Validate typed keys eagerly so errors carry the value's position.
    const int vcol = static_cast<int>(eq + 1 + vlead) + 1;
    try {
      check_type(cfg, key);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what(), lineno, vcol);
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
  lines_[key] = 0;
  check_type(*this, key);
}

const std::string& Config::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

int Config::integer(const std::string& key) const {
  const std::string& s = str(key);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParameterError("key '" + key + "' expects an integer, got '" + s + "'");
  return v;
}

uint64_t Config::u64(const std::string& key) const {
  const std::string& s = str(key);
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParameterError("key '" + key + "' expects a non-negative integer, got '" + s + "'");
  return v;
}

double Config::real(const std::string& key) const {
  const std::string& s = str(key);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParameterError("key '" + key + "' expects a number, got '" + s + "'");
  return v;
}

bool Config::flag(const std::string& key) const {
  const std::string& s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParameterError("key '" + key + "' expects true or false, got '" + s + "'");
}

std::vector<std::string> Config::list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream is(str(key));
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> Config::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const std::string& s : list(key)) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParameterError("key '" + key + "' expects a list of integers, got '" + s + "'");
    out.push_back(v);
  }
  return out;
}

bool Config::explicitly_set(const std::string& key) const { return lines_.count(key) > 0; }

std::string Config::resolved() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace ggl
