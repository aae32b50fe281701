#include "ffsim/config.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace ffsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Location {
  std::string text;  // "origin:line" or "origin"
};

[[noreturn]] void fail(const Location& loc, const std::string& what) {
  throw ConfigError(loc.text + ": " + what);
}

double to_double(std::string_view v, const Location& loc, std::string_view key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    fail(loc, "key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t to_uint(std::string_view v, const Location& loc, std::string_view key) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(loc, "key '" + std::string(key) + "': expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

int to_int(std::string_view v, const Location& loc, std::string_view key) {
  const std::uint64_t u = to_uint(v, loc, key);
  if (u > 1000000000ULL) fail(loc, "key '" + std::string(key) + "': value too large");
  return static_cast<int>(u);
}

bool to_bool(std::string_view v, const Location& loc, std::string_view key) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  fail(loc, "key '" + std::string(key) + "': expected on/off, got '" + std::string(v) + "'");
}

template <typename F>
auto parse_enum(F parse, std::string_view v, const Location& loc, std::string_view key) {
  try {
    return parse(v);
  } catch (const std::invalid_argument&) {
    fail(loc, "key '" + std::string(key) + "': unrecognized value '" + std::string(v) + "'");
  }
}

NoiseModel parse_noise(std::string_view v) {
  if (v == "multinomial") return NoiseModel::multinomial;
  if (v == "poisson") return NoiseModel::poisson;
  throw std::invalid_argument("noise");
}

class Builder {
 public:
  explicit Builder(std::string origin) : origin_(std::move(origin)) { cfg_.source.leak_probability.reset(); }

  bool known_section(std::string_view s) const {
    return s == "source" || s == "switch" || s == "timing" || s == "sweep" || s == "losses" ||
           s == "output";
  }

  void set(const std::string& section, const std::string& key, std::string_view value,
           const Location& loc) {
    if (!seen_.insert(section + "." + key).second) {
      fail(loc, "duplicate key '" + key + "' in [" + section + "]");
    }
    if (section == "losses") {
      const double db = to_double(value, loc, key);
      if (db < 0.0) fail(loc, "key '" + key + "': loss must be >= 0 dB");
      if (!losses_replaced_) {
        cfg_.losses.clear();
        losses_replaced_ = true;
      }
      cfg_.losses.push_back({key, db});
      return;
    }
    const auto& table = setters();
    const auto it = table.find(section + "." + key);
    if (it == table.end()) fail(loc, "unknown key '" + key + "' in [" + section + "]");
    it->second(*this, value, loc, key);
  }

  ExperimentConfig finish() {
    if (cfg_.source.mode == SourceMode::ideal && !cfg_.source.leak_probability) {
      cfg_.source.leak_probability = 0.0;
    }
    if (purity_) {
      if (visibility_set_) fail(purity_loc_, "keys 'purity' and 'visibility' are mutually exclusive");
      if (cfg_.source.mode == SourceMode::ideal) {
        fail(purity_loc_, "key 'purity' requires mode = dephased or werner");
      }
      try {
        cfg_.source.visibility = visibility_for_purity(cfg_.source.mode, *purity_);
      } catch (const std::invalid_argument& e) {
        fail(purity_loc_, std::string("key 'purity': ") + e.what());
      }
    }
    try {
      cfg_.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(origin_ + ": " + e.what());
    }
    return cfg_;
  }

 private:
  using Setter = std::function<void(Builder&, std::string_view, const Location&, const std::string&)>;

  static const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"source.mode",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.mode = parse_enum(parse_source_mode, v, l, k);
         }},
        {"source.visibility",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.visibility = to_double(v, l, k);
           b.visibility_set_ = true;
         }},
        {"source.purity",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.purity_ = to_double(v, l, k);
           b.purity_loc_ = l;
         }},
        {"source.chi_signal",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.chi_signal = to_double(v, l, k);
         }},
        {"source.chi_idler",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.chi_idler = to_double(v, l, k);
         }},
        {"source.pdl_fraction",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.pdl_fraction = to_double(v, l, k);
         }},
        {"source.pdl_arm",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.pdl_arm = parse_enum(parse_arm, v, l, k);
         }},
        {"source.leak_probability",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.source.leak_probability = to_double(v, l, k);
         }},
        {"switch.isolation_db",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.switch_model.isolation_db = to_double(v, l, k);
         }},
        {"switch.insertion_loss_db",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.switch_model.insertion_loss_db = to_double(v, l, k);
         }},
        {"switch.response_time_ns",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.switch_model.response_time_ns = to_double(v, l, k);
         }},
        {"switch.max_duty_cycle_hz",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.switch_model.max_duty_cycle_hz = to_double(v, l, k);
         }},
        {"timing.detector_to_ttm_ns",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.detector_to_ttm_ns = to_double(v, l, k);
         }},
        {"timing.ttm_processing_ns",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.ttm_processing_ns = to_double(v, l, k);
         }},
        {"timing.signal_propagation_ns",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.signal_propagation_ns = to_double(v, l, k);
         }},
        {"timing.delay_fiber_m",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.delay_fiber_m = to_double(v, l, k);
         }},
        {"timing.fiber_index",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.fiber_index = to_double(v, l, k);
         }},
        {"timing.gate_duration_ns",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.gate_duration_ns = to_double(v, l, k);
         }},
        {"timing.detector_deadtime_ns",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.timing.detector_deadtime_ns = to_double(v, l, k);
         }},
        {"sweep.plane",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.plane = parse_enum(parse_plane, v, l, k);
         }},
        {"sweep.n_points",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.n_points = to_int(v, l, k);
         }},
        {"sweep.feedforward",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.feedforward = to_bool(v, l, k);
         }},
        {"sweep.counts_per_setting",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.counts_per_setting = to_uint(v, l, k);
         }},
        {"sweep.angle_jitter_sigma_deg",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.angle_jitter_sigma_deg = to_double(v, l, k);
         }},
        {"sweep.n_trials",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.n_trials = to_int(v, l, k);
         }},
        {"sweep.infinite_statistics",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.infinite_statistics = to_bool(v, l, k);
         }},
        {"sweep.noise",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.noise = parse_enum(parse_noise, v, l, k);
         }},
        {"sweep.miscalibration_deg",
         [](Builder& b, std::string_view v, const Location& l, const std::string& k) {
           b.cfg_.sweep.miscalibration_deg = to_double(v, l, k);
         }},
        {"output.dir",
         [](Builder& b, std::string_view v, const Location&, const std::string&) {
           b.cfg_.output_dir = std::filesystem::path(std::string(v));
         }},
    };
    return table;
  }

  std::string origin_;
  ExperimentConfig cfg_;
  std::set<std::string> seen_;
  std::optional<double> purity_;
  Location purity_loc_;
  bool visibility_set_ = false;
  bool losses_replaced_ = false;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

SweepSpec ExperimentConfig::sweep_spec() const {
  SweepSpec spec = sweep;
  spec.source = source;
  spec.switch_model = switch_model;
  return spec;
}

void ExperimentConfig::validate() const {
  auto guard = [](std::string_view section, auto&& check) {
    try {
      check();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("[" + std::string(section) + "] " + e.what());
    }
  };
  guard("source", [&] { source.validate(); });
  guard("switch", [&] { switch_model.validate(); });
  guard("timing", [&] { timing.validate(); });
  guard("sweep", [&] { sweep_spec().validate(); });
  guard("losses", [&] {
    if (losses.empty()) throw std::invalid_argument("loss list is empty");
    loss_budget(losses);
  });
  if (output_dir.empty()) throw ConfigError("[output] dir must not be empty");
}

ExperimentConfig parse_config_ini(std::string_view text, std::string_view origin) {
  Builder builder{std::string(origin)};
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    const Location loc{std::string(origin) + ":" + std::to_string(line_no)};
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail(loc, "malformed section header '" + std::string(line) + "'");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!builder.known_section(section)) fail(loc, "unknown section [" + section + "]");
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(loc, "expected 'key = value', got '" + std::string(line) + "'");
      const std::string key(trim(line.substr(0, eq)));
      const std::string_view value = trim(line.substr(eq + 1));
      if (key.empty()) fail(loc, "missing key before '='");
      if (section.empty()) fail(loc, "key '" + key + "' appears before any section header");
      if (value.empty()) fail(loc, "key '" + key + "' has an empty value");
      builder.set(section, key, value, loc);
    }
    if (end == text.size()) break;
  }
  return builder.finish();
}

ExperimentConfig parse_config_json(std::string_view text, std::string_view origin) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(origin) + ": invalid JSON: " + e.what());
  }
  const Location top{std::string(origin)};
  if (!doc.is_object()) fail(top, "top level must be an object of sections");
  Builder builder{std::string(origin)};
  for (const auto& [section, body] : doc.items()) {
    if (!builder.known_section(section)) fail(top, "unknown section [" + section + "]");
    if (!body.is_object()) fail(top, "section [" + section + "] must be an object");
    for (const auto& [key, value] : body.items()) {
      const Location loc{std::string(origin) + ": " + section + "." + key};
      std::string raw;
      if (value.is_string()) {
        raw = value.get<std::string>();
      } else if (value.is_boolean()) {
        raw = value.get<bool>() ? "true" : "false";
      } else if (value.is_number()) {
        raw = value.dump();
      } else {
        fail(loc, "key '" + key + "' must be a string, number or boolean");
      }
      builder.set(section, key, raw, loc);
    }
  }
  return builder.finish();
}

ExperimentConfig load_config_ini(const std::filesystem::path& path) {
  return parse_config_ini(read_file(path), path.string());
}

ExperimentConfig load_config_json(const std::filesystem::path& path) {
  return parse_config_json(read_file(path), path.string());
}

}  // namespace ffsim
