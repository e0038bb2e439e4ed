#include "config.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace cec::tools {

ConfigError::ConfigError(std::string source, int line, std::string field,
                         const std::string& message)
    : InvalidArgument(source + (line > 0 ? ":" + std::to_string(line) : "") +
                      (field.empty() ? "" : ": field '" + field + "'") + ": " +
                      message),
      line_(line),
      field_(std::move(field)) {}

namespace {

struct Value {
  enum Kind { kNumber, kString, kBool, kArray } kind = kNumber;
  std::string text;  // raw token for numbers, contents for strings
  double number = 0.0;
  bool boolean = false;
  std::vector<Value> items;
};

class LineParser {
 public:
  LineParser(std::string_view line, const std::string& source, int number,
             const std::string& field)
      : s_(line), source_(source), line_(number), field_(field) {}

  Value Parse() {
    Value v = ParseValue();
    SkipSpace();
    if (pos_ < s_.size() && s_[pos_] != '#') Fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void Fail(const std::string& message) const {
    throw ConfigError(source_, line_, field_, message);
  }

  void SkipSpace() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  Value ParseValue() {
    SkipSpace();
    if (pos_ >= s_.size() || s_[pos_] == '#') Fail("missing value");
    Value v;
    if (s_[pos_] == '"') {
      v.kind = Value::kString;
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) Fail("unterminated string");
        char c = s_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (pos_ >= s_.size()) Fail("unterminated string");
          c = s_[pos_++];
        }
        v.text.push_back(c);
      }
      return v;
    }
    if (s_[pos_] == '[') {
      v.kind = Value::kArray;
      ++pos_;
      SkipSpace();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(ParseValue());
        SkipSpace();
        if (pos_ >= s_.size()) Fail("unterminated array");
        if (s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        if (s_[pos_] != ',') Fail("expected ',' or ']' in array");
        ++pos_;
      }
    }
    size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' &&
           s_[pos_] != '#' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    v.text = std::string(s_.substr(start, pos_ - start));
    if (v.text == "true" || v.text == "false") {
      v.kind = Value::kBool;
      v.boolean = v.text == "true";
      return v;
    }
    const char* end = v.text.data() + v.text.size();
    auto [ptr, ec] = std::from_chars(v.text.data(), end, v.number);
    if (ec != std::errc() || ptr != end || v.text.empty()) {
      Fail("cannot parse value '" + v.text + "'");
    }
    return v;
  }

  std::string_view s_;
  size_t pos_ = 0;
  const std::string& source_;
  int line_;
  const std::string& field_;
};

using Setter = std::function<void(const Value&)>;

struct Context {
  const std::string& source;
  int line;
  const std::string& field;
  [[noreturn]] void Fail(const std::string& message) const {
    throw ConfigError(source, line, field, message);
  }
};

double AsNumber(const Value& v, const Context& ctx) {
  if (v.kind != Value::kNumber) ctx.Fail("expected a number");
  if (!std::isfinite(v.number)) ctx.Fail("expected a finite number");
  return v.number;
}

std::int64_t AsInteger(const Value& v, const Context& ctx) {
  if (v.kind != Value::kNumber) ctx.Fail("expected an integer");
  std::int64_t out = 0;
  const char* end = v.text.data() + v.text.size();
  auto [ptr, ec] = std::from_chars(v.text.data(), end, out);
  if (ec != std::errc() || ptr != end) ctx.Fail("expected an integer");
  return out;
}

std::uint64_t AsUnsigned(const Value& v, const Context& ctx) {
  if (v.kind != Value::kNumber) ctx.Fail("expected a non-negative integer");
  std::uint64_t out = 0;
  const char* end = v.text.data() + v.text.size();
  auto [ptr, ec] = std::from_chars(v.text.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    ctx.Fail("expected a non-negative integer");
  }
  return out;
}

int AsInt(const Value& v, const Context& ctx) {
  std::int64_t x = AsInteger(v, ctx);
  if (x < INT32_MIN || x > INT32_MAX) ctx.Fail("integer out of range");
  return static_cast<int>(x);
}

const std::vector<Value>& AsArray(const Value& v, const Context& ctx) {
  if (v.kind != Value::kArray) ctx.Fail("expected an array [..]");
  return v.items;
}

std::map<std::string, std::function<void(const Value&, const Context&)>>
FieldTable(ExperimentConfig& c) {
  std::map<std::string, std::function<void(const Value&, const Context&)>> t;
  auto number = [&t](const char* key, double& f) {
    t[key] = [&f](const Value& v, const Context& ctx) { f = AsNumber(v, ctx); };
  };
  auto integer = [&t](const char* key, int& f) {
    t[key] = [&f](const Value& v, const Context& ctx) { f = AsInt(v, ctx); };
  };
  auto unsigned_ = [&t](const char* key, std::uint64_t& f) {
    t[key] = [&f](const Value& v, const Context& ctx) { f = AsUnsigned(v, ctx); };
  };
  auto string = [&t](const char* key, std::string& f) {
    t[key] = [&f](const Value& v, const Context& ctx) {
      if (v.kind != Value::kString) ctx.Fail("expected a quoted string");
      f = v.text;
    };
  };
  number("er_probability", c.er_probability);
  number("mean_capacity", c.mean_capacity);
  number("total_rate", c.total_rate);
  number("cost_coeff", c.cost_coeff);
  number("routing_step", c.routing_step);
  number("routing_tolerance", c.routing_tolerance);
  number("pgd_step", c.pgd_step);
  number("alloc_step", c.alloc_step);
  number("alloc_delta", c.alloc_delta);
  number("alloc_tolerance", c.alloc_tolerance);
  number("probe_tolerance", c.probe_tolerance);
  integer("er_nodes", c.er_nodes);
  integer("sessions", c.sessions);
  integer("routing_iterations", c.routing_iterations);
  integer("alloc_iterations", c.alloc_iterations);
  integer("switch_iteration", c.switch_iteration);
  unsigned_("topology_seed", c.topology_seed);
  unsigned_("capacity_seed", c.capacity_seed);
  unsigned_("placement_seed", c.placement_seed);
  unsigned_("switch_seed_offset", c.switch_seed_offset);
  string("topology", c.topology);
  string("cost", c.cost);
  string("utility", c.utility);
  string("output", c.output);
  t["lyapunov"] = [&c](const Value& v, const Context& ctx) {
    if (v.kind != Value::kBool) ctx.Fail("expected true or false");
    c.lyapunov = v.boolean;
  };
  auto numbers = [&t](const char* key, std::vector<double>& f) {
    t[key] = [&f](const Value& v, const Context& ctx) {
      f.clear();
      for (const Value& x : AsArray(v, ctx)) f.push_back(AsNumber(x, ctx));
    };
  };
  numbers("a_w", c.a_w);
  numbers("b_w", c.b_w);
  t["network_sizes"] = [&c](const Value& v, const Context& ctx) {
    c.network_sizes.clear();
    for (const Value& x : AsArray(v, ctx)) c.network_sizes.push_back(AsInt(x, ctx));
  };
  t["seeds"] = [&c](const Value& v, const Context& ctx) {
    c.seeds.clear();
    for (const Value& x : AsArray(v, ctx)) c.seeds.push_back(AsUnsigned(x, ctx));
  };
  t["algorithms"] = [&c](const Value& v, const Context& ctx) {
    c.algorithms.clear();
    for (const Value& x : AsArray(v, ctx)) {
      if (x.kind != Value::kString) ctx.Fail("expected quoted algorithm names");
      c.algorithms.push_back(x.text);
    }
  };
  return t;
}

std::string Number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, ptr);
  // Keep doubles recognisable as such on re-read.
  if (s.find_first_of(".e") == std::string::npos && s.find("inf") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ExperimentConfig config;
  auto table = FieldTable(config);
  std::set<std::string> seen;
  int number = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++number;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') {
      if (end == text.size()) break;
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source, number, "", "expected 'key = value'");
    }
    std::string key(line.substr(first, eq - first));
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) {
      key.pop_back();
    }
    auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigError(source, number, key, "unknown field");
    }
    if (!seen.insert(key).second) {
      throw ConfigError(source, number, key, "duplicate field");
    }
    std::string_view rest = line.substr(eq + 1);
    if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    Value v = LineParser(rest, source, number, key).Parse();
    it->second(v, Context{source, number, key});
    if (end == text.size()) break;
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "", "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

void write_config(const ExperimentConfig& c, std::ostream& out) {
  auto list = [&out](const char* key, const auto& items, auto fmt) {
    out << key << " = [";
    for (size_t i = 0; i < items.size(); ++i) {
      out << (i ? ", " : "") << fmt(items[i]);
    }
    out << "]\n";
  };
  auto num = [](double x) { return Number(x); };
  auto raw = [](auto x) { return std::to_string(x); };
  out << "topology = " << Quote(c.topology) << "\n"
      << "er_nodes = " << c.er_nodes << "\n"
      << "er_probability = " << Number(c.er_probability) << "\n";
  list("network_sizes", c.network_sizes, raw);
  out << "mean_capacity = " << Number(c.mean_capacity) << "\n"
      << "sessions = " << c.sessions << "\n"
      << "total_rate = " << Number(c.total_rate) << "\n"
      << "topology_seed = " << c.topology_seed << "\n"
      << "capacity_seed = " << c.capacity_seed << "\n"
      << "placement_seed = " << c.placement_seed << "\n"
      << "cost = " << Quote(c.cost) << "\n"
      << "cost_coeff = " << Number(c.cost_coeff) << "\n"
      << "utility = " << Quote(c.utility) << "\n";
  list("a_w", c.a_w, num);
  list("b_w", c.b_w, num);
  list("algorithms", c.algorithms, Quote);
  list("seeds", c.seeds, raw);
  out << "routing_iterations = " << c.routing_iterations << "\n"
      << "routing_step = " << Number(c.routing_step) << "\n"
      << "routing_tolerance = " << Number(c.routing_tolerance) << "\n"
      << "pgd_step = " << Number(c.pgd_step) << "\n"
      << "alloc_iterations = " << c.alloc_iterations << "\n"
      << "alloc_step = " << Number(c.alloc_step) << "\n"
      << "alloc_delta = " << Number(c.alloc_delta) << "\n"
      << "alloc_tolerance = " << Number(c.alloc_tolerance) << "\n"
      << "probe_tolerance = " << Number(c.probe_tolerance) << "\n"
      << "lyapunov = " << (c.lyapunov ? "true" : "false") << "\n"
      << "switch_iteration = " << c.switch_iteration << "\n"
      << "switch_seed_offset = " << c.switch_seed_offset << "\n"
      << "output = " << Quote(c.output) << "\n";
}

void validate_config(const ExperimentConfig& c) {
  const std::string src = "<config>";
  auto fail = [&src](const char* field, const std::string& message) {
    throw ConfigError(src, 0, field, message);
  };
  if (c.algorithms.empty()) fail("algorithms", "empty algorithm list");
  std::set<std::string> distinct;
  for (const auto& a : c.algorithms) {
    const auto& known = known_algorithms();
    if (std::find(known.begin(), known.end(), a) == known.end()) {
      fail("algorithms", "unknown algorithm '" + a + "'");
    }
    if (!distinct.insert(a).second) fail("algorithms", "duplicate '" + a + "'");
  }
  if (c.seeds.empty()) fail("seeds", "empty seed list");
  if (c.topology != "er") {
    try {
      parse_named_topology(c.topology);
    } catch (const InvalidArgument& e) {
      fail("topology", e.what());
    }
    if (!c.network_sizes.empty()) {
      fail("network_sizes", "a size sweep needs topology = \"er\"");
    }
  }
  if (c.er_nodes < 2) fail("er_nodes", "must be >= 2");
  for (int n : c.network_sizes) {
    if (n < 2) fail("network_sizes", "sizes must be >= 2");
  }
  if (!(c.er_probability > 0.0 && c.er_probability <= 1.0)) {
    fail("er_probability", "must lie in (0, 1]");
  }
  if (c.sessions < 1) fail("sessions", "must be >= 1");
  if (!(c.total_rate > 0.0)) fail("total_rate", "must be > 0");
  if (c.mean_capacity < 0.0) fail("mean_capacity", "must be >= 0");
  try {
    parse_cost_model(c.cost, c.cost_coeff);
  } catch (const InvalidArgument& e) {
    fail("cost", e.what());
  }
  try {
    parse_utility_kind(c.utility);
  } catch (const InvalidArgument& e) {
    fail("utility", e.what());
  }
  if (static_cast<int>(c.a_w.size()) != c.sessions) {
    fail("a_w", "needs one entry per session");
  }
  if (parse_utility_kind(c.utility) != UtilityKind::kLinear &&
      static_cast<int>(c.b_w.size()) != c.sessions) {
    fail("b_w", "needs one entry per session");
  }
  try {
    make_oracle(c);
  } catch (const InvalidArgument& e) {
    fail("a_w", e.what());
  }
  if (c.routing_iterations < 0) fail("routing_iterations", "must be >= 0");
  if (!(c.routing_step > 0.0)) fail("routing_step", "must be > 0");
  if (!(c.routing_tolerance >= 0.0)) fail("routing_tolerance", "must be >= 0");
  if (!(c.pgd_step > 0.0)) fail("pgd_step", "must be > 0");
  if (c.alloc_iterations < 0) fail("alloc_iterations", "must be >= 0");
  if (c.alloc_step < 0.0) fail("alloc_step", "must be >= 0");
  const double delta =
      c.alloc_delta > 0.0 ? c.alloc_delta : 0.01 * c.total_rate;
  if (!(delta < c.total_rate / (2.0 * c.sessions))) {
    fail("alloc_delta", "must satisfy 0 < delta < lambda / (2W)");
  }
  if (!(c.alloc_tolerance >= 0.0)) fail("alloc_tolerance", "must be >= 0");
  if (!(c.probe_tolerance >= 0.0)) fail("probe_tolerance", "must be >= 0");
  if (c.switch_iteration < 0) fail("switch_iteration", "must be >= 0");
  if (c.output.empty()) fail("output", "must not be empty");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string item(text.substr(start, end - start));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

InstanceSpec instance_spec(const ExperimentConfig& c, int er_nodes) {
  InstanceSpec spec;
  spec.topology = c.topology;
  spec.er_nodes = er_nodes;
  spec.er_probability = c.er_probability;
  spec.mean_capacity = c.mean_capacity;
  spec.sessions = c.sessions;
  spec.total_rate = c.total_rate;
  spec.topology_seed = c.topology_seed;
  spec.capacity_seed = c.capacity_seed;
  spec.placement_seed = c.placement_seed;
  spec.cost = parse_cost_model(c.cost, c.cost_coeff);
  return spec;
}

UtilityOracle make_oracle(const ExperimentConfig& c) {
  UtilityFamily family;
  family.kind = parse_utility_kind(c.utility);
  family.a = c.a_w;
  family.b = c.b_w;
  if (family.kind == UtilityKind::kLinear && family.b.size() != family.a.size()) {
    family.b.assign(family.a.size(), 1.0);
  }
  return UtilityOracle(family, c.total_rate);
}

RoutingSolverConfig routing_config(const ExperimentConfig& c) {
  RoutingSolverConfig r;
  r.step_size = c.routing_step;
  r.max_iterations = c.routing_iterations;
  r.tolerance = c.routing_tolerance;
  return r;
}

AllocSolverConfig alloc_config(const ExperimentConfig& c) {
  AllocSolverConfig a;
  a.delta = c.alloc_delta;
  a.step_size = c.alloc_step;
  a.max_iterations = c.alloc_iterations;
  a.tolerance = c.alloc_tolerance;
  a.routing = routing_config(c);
  a.routing.tolerance = c.probe_tolerance;
  a.routing.trace_residual = false;
  return a;
}

}  // namespace cec::tools
