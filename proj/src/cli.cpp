#include "eitsim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "eitsim/config.hpp"
#include "eitsim/error.hpp"
#include "eitsim/experiments.hpp"
#include "eitsim/table_io.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Flags {
  std::string config = "default";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out_dir;
};

double ns(double s) { return s * 1e9; }

std::string detuning_label(double delta) {
  return "detuning_" + format_number(std::round(rad_to_hz(delta) / 1e3) / 1e3) + "mhz";
}

ojson ledger_json(const EnergyLedger& l) {
  return ojson{{"input_energy", l.input_energy},
               {"transmitted", l.transmitted},
               {"absorbed", l.absorbed},
               {"stored", l.stored},
               {"retrieved", l.retrieved},
               {"storage_decay_loss", l.storage_decay_loss},
               {"stored_at_dark", l.stored_at_dark},
               {"closure", l.closure()}};
}

ojson medium_json(const MediumParams& m) {
  ojson j{{"optical_depth", m.optical_depth()},
          {"gamma_ca_hz", rad_to_hz(m.gamma_ca())},
          {"gamma_bc_hz", rad_to_hz(m.gamma_bc())},
          {"omega_c_hz", rad_to_hz(m.omega_c())}};
  const auto fwhm = m.eit_fwhm_hz();
  j["eit_fwhm_hz"] = fwhm ? ojson(*fwhm) : ojson(nullptr);
  return j;
}

void write_summary(const fs::path& dir, const ojson& j) { write_text(dir / "summary.json", j.dump(2) + "\n"); }

void cmd_spectrum(const Scenario& sc, const fs::path& dir) {
  const auto r = run_eit_spectrum(sc);
  Table t({"detuning_hz", "transmission", "transmission_control_off", "region"});
  for (std::size_t k = 0; k < r.spectrum.detuning.size(); ++k) {
    t.add_row(std::vector<std::string>{format_number(rad_to_hz(r.spectrum.detuning[k])),
                                       format_number(r.spectrum.transmission[k]), format_number(r.control_off[k]),
                                       std::string(1, r.region[k])});
  }
  t.write(dir / "spectrum.tsv");
  ojson j{{"medium", medium_json(r.medium)}};
  j["peak_transmission"] = r.spectrum.peak ? ojson(*r.spectrum.peak) : ojson(nullptr);
  j["fwhm_hz"] = r.spectrum.fwhm_hz ? ojson(*r.spectrum.fwhm_hz) : ojson(nullptr);
  j["group_delay_ns"] = ns(r.delay_s);
  write_summary(dir, j);
}

void cmd_calibrate(const Scenario& sc, const fs::path& dir) {
  const auto& m = sc.medium;
  const auto r = calibrate(m.targets, m.optical_depth, m.gamma_ca, m.tolerances);
  write_summary(dir, ojson{{"medium", medium_json(r.params)},
                           {"peak_transmission", r.peak_transmission},
                           {"fwhm_hz", r.fwhm_hz},
                           {"group_delay_ns", ns(r.delay_s)}});
}

void cmd_pulses(const Scenario& sc, const fs::path& dir, bool storage) {
  const auto r = run_pulse_scenarios(sc, {storage, storage});
  const auto schedule = sc.schedule.storage();
  ojson runs = ojson::array();
  for (const auto& tr : r.traces) {
    std::vector<std::string> cols{"time_ns", "reference", "slow"};
    if (storage) {
      cols.push_back("storage");
      cols.push_back("control");
    }
    Table t(cols);
    for (std::size_t k = 0; k < tr.time.size(); ++k) {
      std::vector<double> row{ns(tr.time[k]), tr.reference[k], tr.slow[k]};
      if (storage) {
        row.push_back(k < tr.storage.size() ? tr.storage[k] : 0.0);
        row.push_back(schedule.intensity(tr.time[k]));
      }
      t.add_row(row);
    }
    t.write(dir / (detuning_label(tr.detuning) + ".tsv"));
    ojson run{{"detuning_hz", rad_to_hz(tr.detuning)},
              {"region", std::string(1, tr.region)},
              {"slow_shift_ns", ns(tr.slow_shift)},
              {"slow_energy_ratio", tr.slow_energy_ratio}};
    if (storage) {
      run["dark_output_slow"] = tr.dark_output_slow;
      run["dark_output_storage"] = tr.dark_output_storage;
      if (tr.ledger) run["ledger"] = ledger_json(*tr.ledger);
    }
    runs.push_back(run);
  }
  ojson j{{"medium", medium_json(r.medium)}, {"runs", runs}};
  if (r.broadband) {
    const auto& b = *r.broadband;
    Table t({"time_ns", "reference_counts", "storage_counts"});
    for (std::size_t k = 0; k < b.time.size(); ++k) {
      t.add_row(std::vector<double>{ns(b.time[k]), b.reference_counts[k], b.storage_counts[k]});
    }
    t.write(dir / "broadband.tsv");
    j["broadband"] = ojson{{"incident", b.incident},
                           {"retrieved", b.retrieved},
                           {"fraction", b.fraction},
                           {"fraction_error", b.fraction_error},
                           {"expected", b.expected},
                           {"eit_fwhm_hz", b.eit_fwhm_hz},
                           {"retrieval_efficiency", b.retrieval_efficiency}};
  }
  write_summary(dir, j);
}

void cmd_correlate(const Scenario& sc, const fs::path& dir) {
  const auto r = run_correlation_experiment(sc);
  ojson panels = ojson::array();
  for (const auto& p : r.panels) {
    const auto& h = p.histogram;
    Table th({"delay_ns", "counts", "accidental"});
    for (std::size_t k = 0; k < h.bins(); ++k) {
      th.add_row(std::vector<double>{ns(h.delay(k)), static_cast<double>(h.counts[k]),
                                     h.accidental.empty() ? 0.0 : static_cast<double>(h.accidental[k])});
    }
    th.write(dir / (p.name + "_histogram.tsv"));
    Table tg({"delay_ns", "g2", "error"});
    for (std::size_t k = 0; k < p.g2.g2.size(); ++k) {
      tg.add_row(std::vector<double>{ns(p.g2.delay[k]), p.g2.g2[k], p.g2.error[k]});
    }
    tg.write(dir / (p.name + "_g2.tsv"));
    ojson pj{{"name", p.name},
             {"trials", p.trials},
             {"bin_ns", ns(h.bin_width)},
             {"g2_zero", p.g2_zero.value},
             {"g2_zero_error", p.g2_zero.error}};
    pj["expected_g2_zero"] = p.expected_g2_zero ? ojson(*p.expected_g2_zero) : ojson(nullptr);
    pj["coherence_fwhm_ns"] = p.coherence_fwhm ? ojson(ns(*p.coherence_fwhm)) : ojson(nullptr);
    panels.push_back(pj);
  }
  write_summary(dir, ojson{{"panels", panels},
                           {"retrieved_coherence_fwhm_ns", ns(r.retrieved_coherence_fwhm)},
                           {"reference_mixture_g2", r.reference_mixture_g2}});
}

void cmd_decay(const Scenario& sc, const fs::path& dir) {
  const auto r = run_storage_decay(sc);
  ojson fits = ojson::object();
  for (const auto* c : {&r.coherent, &r.pdc}) {
    Table t({"storage_time_us", "signal", "error"});
    for (const auto& p : c->points) t.add_row(std::vector<double>{p.t * 1e6, p.y, p.err});
    t.write(dir / ("decay_" + c->source + ".tsv"));
    fits[c->source] = ojson{{"injected_tau_us", c->injected_tau * 1e6},
                            {"tau_us", c->fit.tau * 1e6},
                            {"tau_error_us", c->fit.tau_error * 1e6},
                            {"tau_low_us", c->fit.tau_low * 1e6},
                            {"tau_high_us", c->fit.tau_high * 1e6},
                            {"amplitude", c->fit.amplitude},
                            {"chi2", c->fit.chi2}};
  }
  write_summary(dir, ojson{{"fits", fits}});
}

void apply_flags(const Flags& f, Config& c) {
  auto& ex = c.scenario.experiment;
  if (f.seed) ex.seed = *f.seed;
  if (f.trials) ex.trials = *f.trials;
  if (f.out_dir) {
    c.output_dir = *f.out_dir;
  } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    c.output_dir = env;
  }
}

int run(const std::string& sub, const Flags& f, std::ostream& out) {
  Config c = load_config(f.config);
  apply_flags(f, c);
  c.scenario.validate();
  const fs::path dir = fs::path(c.output_dir) / sub;
  fs::create_directories(dir);
  write_text(dir / "config_used.json", config_to_json(c));
  if (sub == "spectrum") {
    cmd_spectrum(c.scenario, dir);
  } else if (sub == "calibrate") {
    cmd_calibrate(c.scenario, dir);
  } else if (sub == "propagate") {
    cmd_pulses(c.scenario, dir, false);
  } else if (sub == "store") {
    cmd_pulses(c.scenario, dir, true);
  } else if (sub == "correlate") {
    cmd_correlate(c.scenario, dir);
  } else {
    cmd_decay(c.scenario, dir);
  }
  out << sub << ": wrote " << dir.string() << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EIT light storage and photon-correlation simulator", "eitsim"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"spectrum", "Probe transmission spectrum of the transparency window"},
      {"calibrate", "Fit control Rabi frequency and ground-state dephasing to the targets"},
      {"propagate", "Slow-light propagation at each configured detuning"},
      {"store", "Storage and retrieval, energy ledgers and broadband throughput"},
      {"correlate", "Photon-correlation histograms and g2 of input and retrieved light"},
      {"decay", "Retrieved signal against storage time with exponential fits"}};
  for (const auto& [name, help] : subs) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", flags.config, "Preset name or path to a JSON config")->capture_default_str();
    s->add_option("--seed", flags.seed, "Master random seed");
    s->add_option("--trials", flags.trials, "Pulses per run (experiment.trials)")
        ->check(CLI::PositiveNumber);
    s->add_option("--out-dir", flags.out_dir, "Output directory (overrides EITSIM_OUT_DIR)");
  }

  std::vector<const char*> argv{"eitsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, flags, out);
  } catch (const ConfigError& e) {
    err << "eitsim " << sub << ": " << e.what() << "\n";
    return 2;
  } catch (const StatisticsError& e) {
    err << "eitsim " << sub << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "eitsim " << sub << ": " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace eitsim
