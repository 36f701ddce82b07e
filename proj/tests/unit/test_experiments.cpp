#include <doctest.h>

#include <cmath>

#include "eitsim/error.hpp"
#include "eitsim/experiments.hpp"
#include "eitsim/units.hpp"

using namespace eitsim;

TEST_CASE("spectrum of the default scenario") {
  const auto r = run_eit_spectrum(Scenario{});
  REQUIRE(r.spectrum.peak);
  REQUIRE(r.spectrum.fwhm_hz);
  CHECK(std::abs(*r.spectrum.peak - 0.77) <= 0.01);
  CHECK(std::abs(*r.spectrum.fwhm_hz - 8.3e6) <= 0.2e6);
  CHECK(r.region[r.region.size() / 2] == 'A');
  CHECK(r.region.front() == 'C');
  // Without control the resonance is opaque.
  CHECK(r.control_off[r.control_off.size() / 2] == doctest::Approx(std::exp(-6.0)).epsilon(0.05).scale(0.0));
}

TEST_CASE("pulse ordering at resonance") {
  const auto r = run_pulse_scenarios(Scenario{}, {true, false});
  const auto& tr = r.traces.front();
  REQUIRE(tr.detuning == 0.0);
  auto argmax = [](const std::vector<double>& v, std::size_t from = 0) {
    std::size_t k = from;
    for (std::size_t i = from; i < v.size(); ++i) {
      if (v[i] > v[k]) k = i;
    }
    return k;
  };
  CHECK(tr.time[argmax(tr.reference)] < tr.time[argmax(tr.slow)]);
  // The retrieved burst peaks after re-activation at 650 ns.
  std::size_t react = 0;
  while (tr.time[react] < 650e-9) ++react;
  CHECK(tr.time[argmax(tr.storage, react)] > 650e-9);
  REQUIRE(tr.ledger);
  CHECK(std::abs(tr.ledger->closure() - 1.0) <= 0.01);
}

TEST_CASE("broadband throughput matches its closed form") {
  Scenario sc;
  sc.experiment.throughput_trials = 20000;
  const auto m = resolve_medium(sc);
  const auto dyn = run_storage(sc, m, 0.0);
  const auto b = run_broadband_throughput(sc, m, dyn);
  CHECK(b.expected == doctest::Approx(filtered_fraction(*m.eit_fwhm_hz(), 600e6, dyn.ledger.retrieved)).scale(0.0));
  CHECK(std::abs(b.fraction - b.expected) < 4.0 * b.fraction_error);
}

TEST_CASE("noiseless decay curves give back the injected taus") {
  Scenario sc;
  sc.experiment.decay_noise = false;
  const auto r = run_storage_decay(sc);
  CHECK(r.coherent.fit.tau == doctest::Approx(2.3e-6).epsilon(1e-6).scale(0.0));
  CHECK(r.pdc.fit.tau == doctest::Approx(1.6e-6).epsilon(1e-6).scale(0.0));
  CHECK(r.coherent.points.size() == sc.experiment.storage_times.size());
}

TEST_CASE("acquire is deterministic and seed dependent") {
  CountingSettings cs;
  const auto model = SourceModel::pdc(flat_pulse(0.0, 1000e-9, 1e-9, 400e-9, 600e-9), 0.17, 0.2e-9);
  const auto a = acquire(model, 400e-9, 600e-9, cs, 50, 1);
  const auto b = acquire(model, 400e-9, 600e-9, cs, 50, 1);
  const auto c = acquire(model, 400e-9, 600e-9, cs, 50, 2);
  CHECK(a.first.times == b.first.times);
  CHECK(a.second.times == b.second.times);
  CHECK(a.first.times != c.first.times);
  const auto j = acquire(model, 400e-9, 600e-9, cs, 50, 1, 0.2);
  const auto k = acquire(model, 400e-9, 600e-9, cs, 50, 1, 0.2);
  CHECK(j.first.times == k.first.times);
  CHECK(j.first.times != a.first.times);
}

TEST_CASE("too few trials is a statistics error with an estimate") {
  Scenario sc;
  sc.experiment.trials = 20;
  try {
    run_correlation_experiment(sc);
    FAIL("expected StatisticsError");
  } catch (const StatisticsError& e) {
    CHECK(e.required_trials() > 20);
  }
}

TEST_CASE("scenario validation") {
  Scenario sc;
  sc.schedule.on_start = 100e-9;
  CHECK_THROWS_AS(sc.validate(), DomainError);
  Scenario few;
  few.experiment.storage_times = {1e-6, 2e-6, 3e-6};
  CHECK_THROWS_AS(run_storage_decay(few), DomainError);
}
