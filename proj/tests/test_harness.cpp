#include "doctest.h"

#include <cmath>
#include <sstream>

#include "walshpp/harness.hpp"
#include "walshpp/io.hpp"

using namespace walshpp;

namespace {

ExperimentConfig quick(StudyKind kind, GridSpec g = GridSpec(2, 2)) {
  ExperimentConfig c;
  c.kind = kind;
  c.grid = g;
  c.p = 4.0;
  c.trials = 3;
  c.seed = 42;
  c.require_verified = false;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("hypotheses and caps") {
    ExperimentConfig c = quick(StudyKind::carleson);
    CHECK_FALSE(c.hypothesis_violation());
    c.p = 1.0;
    CHECK(c.hypothesis_violation());
    c = quick(StudyKind::mainthm);
    c.r = 2.0;
    CHECK(c.hypothesis_violation());
    c.r = 3.0;
    c.p = 1.4;  // below r' = 3/2
    CHECK(c.hypothesis_violation());
    c = quick(StudyKind::maxmodvartrunc);
    c.p = 1.1;
    CHECK_FALSE(c.hypothesis_violation());
    c = quick(StudyKind::mqstar);
    c.q = 2.0;
    CHECK(c.hypothesis_violation());
    c.q = 1.6;
    c.p = 1.1;  // 1/p + 1/q > 3/2
    CHECK(c.hypothesis_violation());
    c = quick(StudyKind::mqs);
    c.s = 2.0;
    CHECK(c.hypothesis_violation());
    CHECK_THROWS_AS(c.validate(), Error);

    CHECK(quick(StudyKind::mqstar, GridSpec(6, 6)).resource_violation());
    CHECK_FALSE(quick(StudyKind::mqstar, GridSpec(5, 5)).resource_violation());
    CHECK(quick(StudyKind::carleson, GridSpec(7, 6)).resource_violation());
    CHECK_FALSE(quick(StudyKind::carleson, GridSpec(6, 6)).resource_violation());
  }

  TEST_CASE("single packet closed forms") {
    for (StudyKind kind : {StudyKind::carleson, StudyKind::mainthm}) {
      for (GridSpec g : {GridSpec(1, 1), GridSpec(2, 3), GridSpec(3, 3)}) {
        ExperimentConfig c = quick(kind, g);
        c.signal = SignalKind::single_packet;
        const Certificate cert = run_experiment(c);
        REQUIRE(cert.closed_form);
        CHECK(cert.invariants_ok);
        for (const TrialRecord& t : cert.trials) CHECK(std::abs(t.ratio - *cert.closed_form) <= 1e-9);
      }
    }
    CHECK(*single_packet_value(StudyKind::carleson) == 1.0);
    CHECK(*single_packet_value(StudyKind::mainthm) == 2.0);
  }

  TEST_CASE("zero input is skipped") {
    ExperimentConfig c = quick(StudyKind::carleson);
    c.signal = SignalKind::zero;
    const Certificate cert = run_experiment(c);
    CHECK(cert.trials.size() == 3);
    for (const TrialRecord& t : cert.trials) CHECK(t.skipped);
    CHECK(cert.max_ratio == 0.0);
  }

  TEST_CASE("runs are deterministic and revalidate") {
    for (StudyKind kind : {StudyKind::carleson, StudyKind::mainthm, StudyKind::maxtrunc,
                           StudyKind::maxmodvartrunc, StudyKind::mqstar, StudyKind::mqs}) {
      const ExperimentConfig c = quick(kind);
      const Certificate x = run_experiment(c), y = run_experiment(c);
      REQUIRE(x.trials.size() == y.trials.size());
      for (std::size_t i = 0; i < x.trials.size(); ++i) {
        CHECK(x.trials[i].ratio == y.trials[i].ratio);
        CHECK(x.trials[i].ratio_upper == y.trials[i].ratio_upper);
        CHECK(x.trials[i].ratio <= x.trials[i].ratio_upper);
        CHECK(std::isfinite(x.trials[i].ratio));
      }
      CHECK(x.invariants_ok);
      CHECK(revalidate(x));
      const Certificate back = certificate_from_json(nlohmann::json::parse(to_json(x).dump()));
      CHECK(revalidate(back));
      Certificate tampered = x;
      tampered.trials[0].ratio += 1e-15;
      std::string why;
      CHECK_FALSE(revalidate(tampered, &why));
      CHECK_FALSE(why.empty());
    }
  }

  TEST_CASE("trial seeds do not depend on the trial count") {
    ExperimentConfig c = quick(StudyKind::carleson);
    const Certificate three = run_experiment(c);
    c.trials = 1;
    CHECK(run_experiment(c).trials[0].ratio == three.trials[0].ratio);
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
  }

  TEST_CASE("sweeps") {
    SweepConfig s;
    s.base = quick(StudyKind::carleson);
    s.base.trials = 1;
    CHECK(sweep(s).empty());
    s.kinds = {StudyKind::carleson, StudyKind::mainthm, StudyKind::mqs};
    s.bits = {4};
    s.p = {1.0, 4.0};
    s.r = {3.0};
    s.q = {1.5};
    s.s = {3.0};
    const std::vector<SweepRow> rows = sweep(s);
    CHECK(rows.size() == 6);
    for (const SweepRow& r : rows) {
      CHECK(r.skipped == (r.p == 1.0));
      if (r.skipped) CHECK_FALSE(r.reason.empty());
      else CHECK(r.max_ratio > 0.0);
    }
    std::ostringstream os;
    write_sweep_csv(os, rows);
    const std::string csv = os.str();
    CHECK(csv.rfind("kind,a,b,p,q,r,s,status,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  }

  TEST_CASE("config parsing") {
    const auto j = nlohmann::json::parse(
        R"({"kind":"maxtrunc","bits":7,"p":3,"r":4,"trials":2,"signal":"wave_packets","require_verified":false})");
    const ExperimentConfig c = config_from_json(j);
    CHECK(c.kind == StudyKind::maxtrunc);
    CHECK(c.grid == GridSpec(3, 4));
    CHECK(c.signal == SignalKind::wave_packets);
    CHECK(c.r == 4.0);
    const ExperimentConfig d = config_from_json(to_json(c));
    CHECK(d.grid == c.grid);
    CHECK(d.kind == c.kind);
    CHECK(d.trials == 2);
    CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"kind":"nope"})")));
  }
}

TEST_SUITE("io") {
  TEST_CASE("round trips") {
    const GridSpec g(2, 2);
    const DiscreteSignal f(g, std::vector<double>(g.size(), 0.25));
    CHECK(io::signal_from_json(io::to_json(f)).values == f.values);
    const BitileSet all = BitileSet::all(g);
    CHECK(io::bitile_set_from_json(g, io::to_json(all)) == all);
    const Tree t = maximal_tree(all, DyadicRational(3, -1), {1, 0});
    const Tree u = io::tree_from_json(g, io::to_json(t));
    CHECK(u.members == t.members);
    CHECK(u.top_freq == t.top_freq);
    CHECK(u.top_interval == t.top_interval);
    const StepFunction m{{DyadicRational(), DyadicRational(3, -2)}, {1.5}};
    const StepFunction n = io::step_function_from_json(io::to_json(m));
    CHECK(n.breakpoints == m.breakpoints);
    CHECK(n.values == m.values);
  }

  TEST_CASE("malformed inputs are rejected") {
    CHECK_THROWS_AS(io::dyadic_from_json(nlohmann::json(-0.25)), Error);
    CHECK_THROWS_AS(io::signal_from_json(nlohmann::json::parse(R"({"values":[1]})")), Error);
    const GridSpec g(1, 1);
    CHECK_THROWS_AS(io::bitile_set_from_json(g, nlohmann::json::parse(R"([{"I":{"k":3,"n":0},"w":{"k":-2,"n":0}}])")),
                    Error);
    CHECK_THROWS_AS(io::read_json_file("/nonexistent/file.json"), Error);
  }
}
