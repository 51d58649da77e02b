#include "frontctrl/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "frontctrl/csv.hpp"
#include "frontctrl/errors.hpp"

namespace frontctrl {

ReactionModel ModelConfig::build() const {
  if (kind == "cubic") return make_cubic(a);
  if (kind == "logistic") return make_logistic();
  return make_polynomial(coeffs, "polynomial");
}

namespace {

struct BadValue {
  std::string why;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) throw BadValue{"expects a number"};
  return v;
}

std::size_t to_size(const std::string& s) {
  unsigned long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw BadValue{"expects a non-negative integer"};
  return std::size_t(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw BadValue{"expects true or false"};
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw BadValue{"expects a comma-separated list of numbers"};
  return out;
}

std::string show_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_number(v[k]);
  return s;
}

struct Key {
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> show;
};

using Table = std::map<std::string, Key>;

template <class Get>
Key number(Get get, double lo, double hi, bool open_lo, bool open_hi, std::string help) {
  Key k;
  k.help = std::move(help);
  k.set = [=](RunConfig& c, const std::string& s) {
    const double v = to_double(s);
    const bool below = open_lo ? !(v > lo) : !(v >= lo);
    const bool above = open_hi ? !(v < hi) : !(v <= hi);
    if (below || above) {
      std::ostringstream os;
      os << "value " << s << " out of range " << (open_lo ? "(" : "[") << format_number(lo) << ", "
         << format_number(hi) << (open_hi ? ")" : "]");
      throw BadValue{os.str()};
    }
    get(c) = v;
  };
  k.show = [=](const RunConfig& c) { return format_number(get(const_cast<RunConfig&>(c))); };
  return k;
}

template <class Get>
Key count(Get get, std::size_t lo, std::string help) {
  Key k;
  k.help = std::move(help);
  k.set = [=](RunConfig& c, const std::string& s) {
    const std::size_t v = to_size(s);
    if (v < lo) throw BadValue{"value " + s + " must be at least " + std::to_string(lo)};
    get(c) = v;
  };
  k.show = [=](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); };
  return k;
}

template <class Get>
Key choice(Get get, std::vector<std::string> options, std::string help) {
  Key k;
  k.help = std::move(help);
  k.set = [=](RunConfig& c, const std::string& s) {
    for (const auto& o : options)
      if (o == s) {
        get(c) = s;
        return;
      }
    std::string all;
    for (const auto& o : options) all += (all.empty() ? "" : "|") + o;
    throw BadValue{"expects one of " + all};
  };
  k.show = [=](const RunConfig& c) { return get(const_cast<RunConfig&>(c)); };
  return k;
}

template <class Get>
Key text(Get get, std::string help) {
  Key k;
  k.help = std::move(help);
  k.set = [=](RunConfig& c, const std::string& s) { get(c) = s; };
  k.show = [=](const RunConfig& c) { return get(const_cast<RunConfig&>(c)); };
  return k;
}

template <class Get>
Key list(Get get, bool positive, std::string help) {
  Key k;
  k.help = std::move(help);
  k.set = [=](RunConfig& c, const std::string& s) {
    auto v = to_list(s);
    if (positive)
      for (double x : v)
        if (!(x > 0)) throw BadValue{"list entries must be positive"};
    get(c) = std::move(v);
  };
  k.show = [=](const RunConfig& c) { return show_list(get(const_cast<RunConfig&>(c))); };
  return k;
}

template <class Get>
Key flag(Get get, std::string help) {
  Key k;
  k.help = std::move(help);
  k.set = [=](RunConfig& c, const std::string& s) { get(c) = to_bool(s); };
  k.show = [=](const RunConfig& c) { return std::string(get(const_cast<RunConfig&>(c)) ? "true" : "false"); };
  return k;
}

const Table& table() {
  static const Table t = [] {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Table k;
    k["model.kind"] = choice([](RunConfig& c) -> std::string& { return c.model.kind; },
                             {"cubic", "logistic", "polynomial"}, "source term");
    k["model.a"] = number([](RunConfig& c) -> double& { return c.model.a; }, 0, 1, true, true,
                          "cubic threshold, f = u(1-u)(u-a)");
    k["model.coeffs"] = list([](RunConfig& c) -> std::vector<double>& { return c.model.coeffs; }, false,
                             "polynomial coefficients, ascending powers");
    k["numerics.threads"] = count([](RunConfig& c) -> unsigned& { return c.numerics.threads; }, 0,
                                  "worker threads, 0 = all cores");
    k["numerics.grid"] = count([](RunConfig& c) -> std::size_t& { return c.numerics.grid; }, 8,
                               "oracle lattice size per axis");
    k["numerics.n_quad"] = count([](RunConfig& c) -> std::size_t& { return c.numerics.n_quad; }, 16,
                                 "quadrature nodes for the Stokes check");
    k["numerics.tolerance"] = number([](RunConfig& c) -> double& { return c.numerics.tolerance; }, 0, 1, true,
                                     false, "relative tolerance of verify");
    k["output.dir"] = text([](RunConfig& c) -> std::string& { return c.output_dir; }, "output directory");
    k["problem.kind"] = choice([](RunConfig& c) -> std::string& { return c.problem.kind; }, {"p1", "p2"},
                               "p1 = total mass, p2 = effort");
    k["problem.c"] = number([](RunConfig& c) -> double& { return c.problem.c; }, -inf, inf, true, true,
                            "front speed");
    k["ecurve.cmin"] = number([](RunConfig& c) -> double& { return c.ecurve.cmin; }, -inf, inf, true, true,
                              "smallest sampled speed");
    k["ecurve.cmax"] = number([](RunConfig& c) -> double& { return c.ecurve.cmax; }, -inf, inf, true, true,
                              "largest sampled speed");
    k["ecurve.n"] = count([](RunConfig& c) -> std::size_t& { return c.ecurve.n; }, 2, "number of speeds");
    k["simulate.dim"] = choice([](RunConfig& c) -> std::string& { return c.simulate.dim; },
                               {"1", "strip", "plane"}, "geometry");
    k["simulate.T"] = number([](RunConfig& c) -> double& { return c.simulate.T; }, 0, inf, true, true,
                             "final time");
    k["simulate.dt"] = number([](RunConfig& c) -> double& { return c.simulate.dt; }, 0, inf, true, true,
                              "time step");
    k["simulate.dx"] = number([](RunConfig& c) -> double& { return c.simulate.dx; }, 0, inf, true, true,
                              "grid spacing");
    k["simulate.x_lo"] = number([](RunConfig& c) -> double& { return c.simulate.x_lo; }, -inf, inf, true, true,
                                "left end of the domain");
    k["simulate.x_hi"] = number([](RunConfig& c) -> double& { return c.simulate.x_hi; }, -inf, inf, true, true,
                                "right end of the domain");
    k["simulate.ny"] = count([](RunConfig& c) -> std::size_t& { return c.simulate.ny; }, 2,
                             "strip cells across [0, 1]");
    k["simulate.control"] = choice([](RunConfig& c) -> std::string& { return c.simulate.control; },
                                   {"none", "p1", "p2"}, "optimal control applied in 1D and strip runs");
    k["simulate.c"] = number([](RunConfig& c) -> double& { return c.simulate.c; }, -inf, inf, true, true,
                             "speed of the applied control");
    k["simulate.mass_factor"] = number([](RunConfig& c) -> double& { return c.simulate.mass_factor; }, 0, inf,
                                       true, true, "scale of the applied control");
    k["simulate.control_origin"] = number([](RunConfig& c) -> double& { return c.simulate.control_origin; },
                                          -inf, inf, true, true, "profile origin at t = 0");
    k["simulate.front_x0"] = number([](RunConfig& c) -> double& { return c.simulate.front_x0; }, -inf, inf,
                                    true, true, "initial step position of uncontrolled runs");
    k["simulate.trace_dt"] = number([](RunConfig& c) -> double& { return c.simulate.trace_dt; }, 0, inf, true,
                                    true, "front trace spacing");
    k["simulate.eps"] = number([](RunConfig& c) -> double& { return c.simulate.eps; }, 0, inf, true, true,
                               "interface width of plane runs");
    k["simulate.radius"] = number([](RunConfig& c) -> double& { return c.simulate.radius; }, 0, inf, true, true,
                                  "initial disc radius of plane runs");
    k["simulate.snapshots"] = list([](RunConfig& c) -> std::vector<double>& { return c.simulate.snapshots; },
                                   false, "times of dense field dumps");
    k["set.kind"] = choice([](RunConfig& c) -> std::string& { return c.set.kind; },
                           {"circle", "translating-disc", "ellipse", "csv"}, "moving set");
    k["set.R0"] = number([](RunConfig& c) -> double& { return c.set.R0; }, 0, inf, true, true,
                         "initial radius");
    k["set.v"] = number([](RunConfig& c) -> double& { return c.set.v; }, -inf, inf, true, true,
                        "shrinking speed");
    k["set.T"] = number([](RunConfig& c) -> double& { return c.set.T; }, 0, inf, false, true, "final time");
    k["set.w"] = number([](RunConfig& c) -> double& { return c.set.w; }, -inf, inf, true, true,
                        "translation speed");
    k["set.a0"] = number([](RunConfig& c) -> double& { return c.set.a0; }, 0, inf, true, true,
                         "ellipse semi-axis along x");
    k["set.b0"] = number([](RunConfig& c) -> double& { return c.set.b0; }, 0, inf, true, true,
                         "ellipse semi-axis along y");
    k["set.nt"] = count([](RunConfig& c) -> std::size_t& { return c.set.nt; }, 2, "time samples");
    k["set.nxi"] = count([](RunConfig& c) -> std::size_t& { return c.set.nxi; }, 8, "boundary samples");
    k["set.file"] = text([](RunConfig& c) -> std::string& { return c.set.file; }, "CSV t,xi,x1,x2 for set.kind = csv");
    k["limit.n"] = count([](RunConfig& c) -> std::size_t& { return c.limit.n; }, 3, "plateau parameter");
    k["limit.c1"] = number([](RunConfig& c) -> double& { return c.limit.c1; }, -inf, inf, true, true,
                           "lower-profile speed, negative = (c* + c2) / 2");
    k["limit.c2"] = number([](RunConfig& c) -> double& { return c.limit.c2; }, -inf, inf, true, true,
                           "smallest normal speed");
    k["limit.c3"] = number([](RunConfig& c) -> double& { return c.limit.c3; }, -inf, inf, true, true,
                           "largest normal speed");
    k["limit.n_c"] = count([](RunConfig& c) -> std::size_t& { return c.limit.n_c; }, 1, "speed samples");
    k["limit.eps"] = list([](RunConfig& c) -> std::vector<double>& { return c.limit.eps; }, true,
                          "interface widths, largest first");
    k["limit.dx_factor"] = number([](RunConfig& c) -> double& { return c.limit.dx_factor; }, 0, 0.25, true,
                                  false, "dx / eps");
    k["limit.dt_factor"] = number([](RunConfig& c) -> double& { return c.limit.dt_factor; }, 0, inf, true, true,
                                  "dt / eps");
    k["limit.sample_dt"] = number([](RunConfig& c) -> double& { return c.limit.sample_dt; }, 0, inf, true, true,
                                  "report spacing in t");
    k["limit.additive"] = flag([](RunConfig& c) -> bool& { return c.limit.additive; }, "additive coupling");
    return k;
  }();
  return t;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value, std::size_t line) {
  const std::string where = line ? "line " + std::to_string(line) + ": " : "";
  const auto it = table().find(key);
  if (it == table().end()) fail(ErrorCode::Config, where + "unknown key '" + key + "'");
  try {
    it->second.set(cfg, value);
  } catch (const BadValue& e) {
    fail(ErrorCode::Config, where + key + " " + e.why);
  }
}

void check_required(const RunConfig& cfg, const std::map<std::string, std::size_t>& lines) {
  auto at = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? std::string() : "line " + std::to_string(it->second) + ": ";
  };
  if (cfg.model.kind == "polynomial" && cfg.model.coeffs.empty())
    fail(ErrorCode::Config, at("model.kind") + "missing required key model.coeffs");
  if (cfg.set.kind == "csv" && cfg.set.file.empty())
    fail(ErrorCode::Config, at("set.kind") + "missing required key set.file");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected section.key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos)
      fail(ErrorCode::Config, "line " + std::to_string(lineno) + ": key '" + key + "' needs a section");
    if (seen.count(key))
      fail(ErrorCode::Config, "line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    set_key(cfg, key, value, lineno);
    seen[key] = lineno;
  }
  check_required(cfg, seen);
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  set_key(cfg, key, value, 0);
  check_required(cfg, {});
}

std::string config_reference() {
  const RunConfig defaults;
  std::string out;
  for (const auto& [name, key] : table()) {
    std::string shown = key.show(defaults);
    out += "  " + name + " = " + (shown.empty() ? "(unset)" : shown) + "    # " + key.help + "\n";
  }
  return out;
}

}  // namespace frontctrl
