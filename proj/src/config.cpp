#include "eitsim/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "eitsim/error.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream s;
  s << "invalid configuration (" << v.size() << (v.size() == 1 ? " violation)" : " violations)");
  for (const auto& x : v) s << "\n  - " << x;
  return s.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

namespace {

using json = nlohmann::json;

enum class Check { Any, Positive, NonNegative, Probability, OpenUnit, AtLeastOne };

const char* describe(Check c) {
  switch (c) {
    case Check::Positive: return "must be > 0";
    case Check::NonNegative: return "must be >= 0";
    case Check::Probability: return "must lie in [0, 1]";
    case Check::OpenUnit: return "must lie in (0, 1)";
    case Check::AtLeastOne: return "must be >= 1";
    case Check::Any: break;
  }
  return "must be finite";
}

bool passes(Check c, double v) {
  if (!std::isfinite(v)) return false;
  switch (c) {
    case Check::Positive: return v > 0.0;
    case Check::NonNegative: return v >= 0.0;
    case Check::Probability: return v >= 0.0 && v <= 1.0;
    case Check::OpenUnit: return v > 0.0 && v < 1.0;
    case Check::AtLeastOne: return v >= 1.0;
    case Check::Any: break;
  }
  return true;
}

const std::vector<std::string_view> kUnitSuffixes{"_hz", "_ns", "_us", "_ps", "_s"};

/// Reads fields out of a JSON tree, collecting every violation.
class Reader {
 public:
  Reader(const json& root, std::vector<std::string>& errors) : root_(root), errors_(errors) {}

  void section(const char* name, const std::function<void()>& body) {
    const json* saved = node_;
    const std::string saved_path = path_;
    std::set<std::string> saved_known = std::move(known_);
    known_.clear();
    path_ = name;
    static const json empty = json::object();
    if (!root_.contains(name)) {
      node_ = &empty;
    } else if (!root_[name].is_object()) {
      errors_.push_back(std::string(name) + ": must be an object");
      node_ = &empty;
    } else {
      node_ = &root_[name];
    }
    body();
    finish(*node_, path_);
    node_ = saved;
    path_ = saved_path;
    known_ = std::move(saved_known);
    top_known_.insert(name);
  }

  void top(const std::function<void()>& body) {
    node_ = &root_;
    path_.clear();
    body();
    std::set<std::string> all = top_known_;
    all.insert(known_.begin(), known_.end());
    known_ = all;
    finish(root_, "");
  }

  void number(const char* key, double& target, double scale, Check check) {
    known_.insert(key);
    if (!node_->contains(key)) return;
    const auto& v = (*node_)[key];
    if (!v.is_number()) {
      error(key, "must be a number");
      return;
    }
    const double x = v.get<double>();
    if (!passes(check, x)) {
      error(key, describe(check));
      return;
    }
    target = x * scale;
  }

  template <class Int>
  void integer(const char* key, Int& target, Check check) {
    known_.insert(key);
    if (!node_->contains(key)) return;
    const auto& v = (*node_)[key];
    if (!v.is_number_integer()) {
      error(key, "must be an integer");
      return;
    }
    if (v.is_number_unsigned()) {
      const auto x = v.get<std::uint64_t>();
      if (!passes(check, static_cast<double>(x))) {
        error(key, describe(check));
        return;
      }
      target = static_cast<Int>(x);
      return;
    }
    const auto x = v.get<std::int64_t>();
    if (x < 0 || !passes(check, static_cast<double>(x))) {
      error(key, x < 0 ? "must be >= 0" : describe(check));
      return;
    }
    target = static_cast<Int>(x);
  }

  void boolean(const char* key, bool& target) {
    known_.insert(key);
    if (!node_->contains(key)) return;
    const auto& v = (*node_)[key];
    if (!v.is_boolean()) {
      error(key, "must be true or false");
      return;
    }
    target = v.get<bool>();
  }

  void text(const char* key, std::string& target, const std::vector<std::string>& allowed = {}) {
    known_.insert(key);
    if (!node_->contains(key)) return;
    const auto& v = (*node_)[key];
    if (!v.is_string()) {
      error(key, "must be a string");
      return;
    }
    const auto s = v.get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      error(key, "must be one of: " + opts);
      return;
    }
    target = s;
  }

  void numbers(const char* key, std::vector<double>& target, double scale, Check check, std::size_t min_size) {
    known_.insert(key);
    if (!node_->contains(key)) return;
    const auto& v = (*node_)[key];
    if (!v.is_array()) {
      error(key, "must be an array of numbers");
      return;
    }
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number() || !passes(check, x.get<double>())) {
        error(key, std::string("entries ") + describe(check));
        return;
      }
      out.push_back(x.get<double>() * scale);
    }
    if (out.size() < min_size) {
      error(key, "needs at least " + std::to_string(min_size) + " entries");
      return;
    }
    target = std::move(out);
  }

  void error(const std::string& key, const std::string& what) {
    errors_.push_back((path_.empty() ? "" : path_ + ".") + key + ": " + what);
  }

 private:
  void finish(const json& node, const std::string& path) {
    for (const auto& [k, v] : node.items()) {
      if (known_.count(k)) continue;
      std::string hint;
      for (const auto& suffix : kUnitSuffixes) {
        if (known_.count(k + std::string(suffix))) hint = " (missing unit suffix; did you mean '" + k + std::string(suffix) + "'?)";
      }
      errors_.push_back((path.empty() ? "" : path + ".") + k + ": unknown key" + hint);
    }
  }

  const json& root_;
  std::vector<std::string>& errors_;
  const json* node_ = nullptr;
  std::string path_;
  std::set<std::string> known_;
  std::set<std::string> top_known_;
};

/// Emits the same fields as JSON.
class Writer {
 public:
  json root = json::object();

  void section(const char* name, const std::function<void()>& body) {
    json* saved = node_;
    root[name] = json::object();
    node_ = &root[name];
    body();
    node_ = saved;
  }
  void top(const std::function<void()>& body) {
    node_ = &root;
    body();
  }
  void number(const char* key, double& v, double scale, Check) { (*node_)[key] = v / scale; }
  template <class Int>
  void integer(const char* key, Int& v, Check) {
    (*node_)[key] = v;
  }
  void boolean(const char* key, bool& v) { (*node_)[key] = v; }
  void text(const char* key, std::string& v, const std::vector<std::string>& = {}) { (*node_)[key] = v; }
  void numbers(const char* key, std::vector<double>& v, double scale, Check, std::size_t) {
    json a = json::array();
    for (double x : v) a.push_back(x / scale);
    (*node_)[key] = a;
  }

 private:
  json* node_ = nullptr;
};

constexpr double kNs = 1e-9;
constexpr double kUs = 1e-6;
constexpr double kPs = 1e-12;

std::string placement_name(Placement p) { return std::string(to_string(p)); }

template <class V>
void visit(V& v, Config& c) {
  auto& s = c.scenario;
  std::string placement = placement_name(s.source.placement);
  std::string correlator = s.counting.correlator == CorrelatorMode::AllPairs ? "all_pairs" : "start_stop";
  v.top([&] {
    v.template integer<int>("schema_version", c.schema_version, Check::AtLeastOne);
    v.text("name", s.name);
    v.text("output_dir", c.output_dir);
    v.section("medium", [&] {
      auto& m = s.medium;
      v.number("optical_depth", m.optical_depth, 1.0, Check::NonNegative);
      v.number("gamma_ca_hz", m.gamma_ca, kTwoPi, Check::Positive);
      v.boolean("calibrate", m.calibrate);
      v.number("target_peak_transmission", m.targets.peak_transmission, 1.0, Check::OpenUnit);
      v.number("target_fwhm_hz", m.targets.fwhm_hz, 1.0, Check::Positive);
      v.number("target_delay_ns", m.targets.delay_s, kNs, Check::Any);
      v.number("tolerance_peak_transmission", m.tolerances.peak_transmission, 1.0, Check::Positive);
      v.number("tolerance_fwhm_hz", m.tolerances.fwhm_hz, 1.0, Check::Positive);
      v.number("tolerance_delay_ns", m.tolerances.delay_s, kNs, Check::Positive);
      v.number("omega_c_hz", m.omega_c, kTwoPi, Check::NonNegative);
      v.number("gamma_bc_hz", m.gamma_bc, kTwoPi, Check::NonNegative);
      v.number("transparent_fraction", m.thresholds.transparent_fraction, 1.0, Check::Positive);
      v.number("off_resonant_factor", m.thresholds.off_resonant_factor, 1.0, Check::Positive);
      v.number("spectrum_span_hz", m.spectrum_span, kTwoPi, Check::Positive);
      v.template integer<std::size_t>("spectrum_points", m.spectrum_points, Check::AtLeastOne);
    });
    v.section("pulse", [&] {
      auto& p = s.pulse;
      v.text("shape", p.shape, {"gaussian", "flat"});
      v.number("fwhm_ns", p.fwhm, kNs, Check::Positive);
      v.number("centre_ns", p.centre, kNs, Check::Any);
      v.number("t_start_ns", p.t_start, kNs, Check::NonNegative);
      v.number("t_end_ns", p.t_end, kNs, Check::Positive);
      v.number("dt_ns", p.dt, kNs, Check::Positive);
      v.numbers("detunings_hz", p.detunings, kTwoPi, Check::Any, 1);
    });
    v.section("schedule", [&] {
      auto& sch = s.schedule;
      v.number("off_start_ns", sch.off_start, kNs, Check::NonNegative);
      v.number("off_end_ns", sch.off_end, kNs, Check::NonNegative);
      v.number("on_start_ns", sch.on_start, kNs, Check::NonNegative);
      v.number("on_end_ns", sch.on_end, kNs, Check::NonNegative);
    });
    v.section("integrator", [&] {
      auto& in = s.integrator;
      v.template integer<std::size_t>("z_slices", in.z_slices, Check::AtLeastOne);
      v.template integer<std::size_t>("substeps", in.substeps, Check::AtLeastOne);
      v.number("ledger_tolerance", in.ledger_tolerance, 1.0, Check::Positive);
    });
    v.section("source", [&] {
      auto& so = s.source;
      v.number("squeeze_r", so.squeeze_r, 1.0, Check::Positive);
      v.number("coherence_fwhm_ns", so.coherence_fwhm, kNs, Check::Positive);
      v.number("bandwidth_hz", so.bandwidth_hz, 1.0, Check::Positive);
      v.text("placement", placement, {"gaussian", "uniform", "centre"});
      v.number("tiling_step_ps", so.tiling_step, kPs, Check::Positive);
      v.number("input_pump_ns", so.input_pump, kNs, Check::Positive);
      v.number("r_jitter", so.r_jitter, 1.0, Check::NonNegative);
      v.number("retrieved_coherent_photons", so.retrieved_coherent_photons, 1.0, Check::Positive);
      v.number("background_ratio", so.background_ratio, 1.0, Check::NonNegative);
      v.number("impulse_fwhm_ns", so.impulse_fwhm, kNs, Check::Positive);
    });
    v.section("counting", [&] {
      auto& co = s.counting;
      v.number("efficiency", co.detector.efficiency, 1.0, Check::Probability);
      v.number("jitter_ns", co.detector.jitter_sigma, kNs, Check::NonNegative);
      v.number("dead_time_ns", co.detector.dead_time, kNs, Check::NonNegative);
      v.text("correlator", correlator, {"all_pairs", "start_stop"});
      v.number("period_ns", co.period, kNs, Check::Positive);
      v.number("bin_ns", co.bin, kNs, Check::Positive);
      v.number("range_ns", co.range, kNs, Check::Positive);
      v.number("g2_window_ns", co.g2_window, kNs, Check::Positive);
      v.number("fine_bin_ns", co.fine_bin, kNs, Check::Positive);
      v.number("fine_range_ns", co.fine_range, kNs, Check::Positive);
      v.number("gate_start_ns", co.gate_start, kNs, Check::NonNegative);
      v.number("gate_end_ns", co.gate_end, kNs, Check::Positive);
      v.number("retrieved_bin_ns", co.retrieved_bin, kNs, Check::Positive);
      v.number("retrieved_range_ns", co.retrieved_range, kNs, Check::Positive);
      v.template integer<std::size_t>("retrieved_rebin", co.retrieved_rebin, Check::AtLeastOne);
      v.template integer<std::size_t>("reference_shifts", co.reference_shifts, Check::AtLeastOne);
      v.number("max_rel_error", co.max_rel_error, 1.0, Check::Positive);
    });
    v.section("experiment", [&] {
      auto& ex = s.experiment;
      v.template integer<std::uint64_t>("trials", ex.trials, Check::AtLeastOne);
      v.template integer<std::uint64_t>("retrieved_trials", ex.retrieved_trials, Check::AtLeastOne);
      v.template integer<std::uint64_t>("throughput_trials", ex.throughput_trials, Check::AtLeastOne);
      v.template integer<std::uint64_t>("decay_trials", ex.decay_trials, Check::AtLeastOne);
      v.template integer<std::uint64_t>("seed", ex.seed, Check::Any);
      v.numbers("storage_times_us", ex.storage_times, kUs, Check::Positive, 4);
      v.number("tau_coherent_us", ex.tau_coherent, kUs, Check::Positive);
      v.number("tau_pdc_us", ex.tau_pdc, kUs, Check::Positive);
      v.number("coherent_photons", ex.coherent_photons, 1.0, Check::Positive);
      v.number("broadband_bin_ns", ex.broadband_bin, kNs, Check::Positive);
      v.boolean("decay_noise", ex.decay_noise);
    });
  });
  s.source.placement = *parse_placement(placement);
  s.counting.correlator = correlator == "all_pairs" ? CorrelatorMode::AllPairs : CorrelatorMode::StartStop;
}

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"default", R"({"schema_version": 1, "name": "default"})"},
      {"detuned10", R"({"schema_version": 1, "name": "detuned10", "pulse": {"detunings_hz": [10e6]}})"},
      {"detuned100", R"({"schema_version": 1, "name": "detuned100", "pulse": {"detunings_hz": [100e6]}})"},
      {"control_off",
       R"({"schema_version": 1, "name": "control_off", "medium": {"calibrate": false, "omega_c_hz": 0, "gamma_bc_hz": 0.816e6}})"},
      {"empty_medium",
       R"({"schema_version": 1, "name": "empty_medium", "medium": {"calibrate": false, "optical_depth": 0}})"},
      {"quick", R"({"schema_version": 1, "name": "quick",
  "experiment": {"trials": 1000, "retrieved_trials": 400000, "throughput_trials": 5000, "decay_trials": 100000},
  "counting": {"max_rel_error": 0.25}})"},
  };
  return p;
}

}  // namespace

Config parse_config(std::string_view text) {
  std::vector<std::string> errors;
  json root;
  bool all_ws = std::all_of(text.begin(), text.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
  if (all_ws) {
    root = json::object();
  } else {
    try {
      root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw ConfigError({std::string("malformed document: ") + e.what()});
    }
  }
  if (!root.is_object()) throw ConfigError({"document root must be an object"});

  Config c;
  Reader r(root, errors);
  visit(r, c);
  if (errors.empty() && c.schema_version != kSchemaVersion) {
    errors.push_back("schema_version: unsupported version " + std::to_string(c.schema_version) + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }
  const auto& s = c.scenario;
  if (errors.empty()) {
    const auto& sch = s.schedule;
    if (!(sch.off_start < sch.off_end && sch.off_end < sch.on_start && sch.on_start < sch.on_end)) {
      errors.push_back("schedule: breakpoints must satisfy off_start < off_end < on_start < on_end");
    }
    if (!(s.pulse.t_end > s.pulse.t_start)) errors.push_back("pulse.t_end_ns: must exceed t_start_ns");
    if (!(s.counting.gate_end > s.counting.gate_start)) errors.push_back("counting.gate_end_ns: must exceed gate_start_ns");
    if (s.counting.retrieved_rebin % 2 == 0) errors.push_back("counting.retrieved_rebin: must be odd");
    if (s.medium.spectrum_points < 3) errors.push_back("medium.spectrum_points: must be >= 3");
    if (!(s.counting.range < 0.5 * s.counting.period)) errors.push_back("counting.range_ns: must be below half the period");
    if (s.experiment.trials < 2) errors.push_back("experiment.trials: must be >= 2");
    const auto& st = s.experiment.storage_times;
    for (std::size_t i = 1; i < st.size(); ++i) {
      if (!(st[i] > st[i - 1])) {
        errors.push_back("experiment.storage_times_us: must increase strictly");
        break;
      }
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

std::string config_to_json(const Config& c) {
  Config copy = c;
  Writer w;
  visit(w, copy);
  return w.root.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
  std::vector<std::string> n;
  for (const auto& [k, v] : presets()) n.push_back(k);
  return n;
}

std::string preset_document(std::string_view name) {
  const auto it = presets().find(std::string(name));
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError({"unknown preset '" + std::string(name) + "' (known: " + known + ")"});
  }
  return it->second;
}

Config load_config(const std::string& name_or_path) {
  if (presets().count(name_or_path)) return parse_config(preset_document(name_or_path));
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError({"'" + name_or_path + "' is neither a preset (" + known + ") nor a readable file"});
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace eitsim
