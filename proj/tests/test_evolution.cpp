#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "evotrack/error.hpp"
#include "evotrack/evolution.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace evotrack;
using testing_support::planted;

namespace {

EvolutionReport run_secondary(const Corpus& corpus, Month spike, std::uint64_t seed) {
  const auto vocab = build_vocabulary(corpus.samples(), 20, 1);
  SecondaryConfig config;
  config.hmm.seed = seed;
  return secondary_test(corpus, vocab, spike, config);
}

// Evolution point at index 12 takes effect from the month after it.
Month planted_spike(const Corpus& corpus) { return corpus.first_month() + 13; }

}  // namespace

TEST_CASE("evolution score examples") {
  const std::vector<double> s{-2.0, -2.0}, x{-4.0, -3.0};
  CHECK(evolution_score(s, s) == 0.0);
  CHECK(evolution_score(s, x) == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(evolution_score(s, x, ScoreMode::raw) == doctest::Approx(-1.25).epsilon(1e-9));
  CHECK_THROWS_AS(evolution_score(s, std::vector<double>{-1.0}), InputError);
  CHECK_THROWS_AS(evolution_score(std::vector<double>{}, std::vector<double>{}), InputError);
}

TEST_CASE("evolution score guards a zero correct score") {
  const std::vector<double> s{0.0}, x{-1e-6};
  CHECK(evolution_score(s, x) == doctest::Approx(1e-12 / 1e-12));
}

TEST_CASE("property: evolution score matches the oracle, is nonnegative and duplication invariant") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> llpo(-6.0, -0.5);
  std::uniform_int_distribution<std::size_t> len(1, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(len(rng)), x(s.size());
    for (auto& v : s) v = llpo(rng);
    for (auto& v : x) v = llpo(rng);
    const double e = evolution_score(s, x);
    CHECK(e >= 0.0);
    CHECK(e == doctest::Approx(oracle::evolution_magnitude(s, x)).epsilon(1e-12));
    auto s2 = s, x2 = x;
    s2.insert(s2.end(), s.begin(), s.end());
    x2.insert(x2.end(), x.begin(), x.end());
    CHECK(evolution_score(s2, x2) == doctest::Approx(e).epsilon(1e-12));
    auto xm = s;
    for (auto& v : xm) v = -v;
    CHECK(evolution_score(s, xm) == 0.0);
  }
}

TEST_CASE("planted spike is confirmed with separated scores") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto corpus = planted(seed);
    const auto report = run_secondary(corpus, planted_spike(corpus), seed);
    CHECK(report.verdict == Confirmation::confirmed);
    CHECK(report.e >= 0.5);
    CHECK(report.e == doctest::Approx((report.e_before + report.e_after) / 2));
    CHECK(report.own_model_preference(Side::before) >= 0.9);
    CHECK(report.own_model_preference(Side::after) >= 0.9);
    CHECK(report.mean_correct_before > report.mean_cross_before);
    CHECK(report.mean_correct_after > report.mean_cross_after);

    std::set<std::string> ids;
    for (const auto& s : report.scores) CHECK(ids.insert(s.sample_id).second);
    std::size_t in_range = 0;
    for (const auto& s : corpus.samples())
      in_range += s.month() >= planted_spike(corpus) - 12 && s.month() < planted_spike(corpus) + 12;
    CHECK(report.scores.size() == in_range);
  }
}

TEST_CASE("control mid-point is rejected") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto corpus = planted(seed, 1.0, -1);
    const auto report = run_secondary(corpus, corpus.first_month() + 12, seed);
    CHECK(report.verdict == Confirmation::rejected);
    CHECK(report.e < 0.5);
  }
}

TEST_CASE("a side with three samples is untestable") {
  const auto full = planted(1);
  const Month spike = planted_spike(full);
  std::vector<Sample> kept;
  std::size_t before = 0;
  for (const auto& s : full.samples()) {
    if (s.month() < spike) {
      if (before == 3) continue;
      ++before;
    }
    kept.push_back(s);
  }
  const Corpus corpus(full.family(), kept);
  const auto report = run_secondary(corpus, spike, 1);
  CHECK(report.verdict == Confirmation::untestable);
  CHECK_FALSE(report.note.empty());
  CHECK(report.scores.empty());
}

TEST_CASE("secondary test is deterministic") {
  const auto corpus = planted(6);
  const auto a = run_secondary(corpus, planted_spike(corpus), 4);
  const auto b = run_secondary(corpus, planted_spike(corpus), 4);
  CHECK(a.e == b.e);
  CHECK(a.verdict == b.verdict);
  REQUIRE(a.scores.size() == b.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); ++i)
    CHECK(a.scores[i].llpo_after_model == b.scores[i].llpo_after_model);
}

TEST_CASE("planted E exceeds control E in at least 95% of trials") {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = planted(seed);
    const auto c = planted(seed, 1.0, -1);
    wins += run_secondary(p, planted_spike(p), seed).e >
            run_secondary(c, c.first_month() + 12, seed).e;
  }
  CHECK(wins >= 19);
}

TEST_CASE("threshold calibration: 99th percentile of control E is below 0.5") {
  std::vector<double> e;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = planted(seed, 1.0, -1);
    e.push_back(run_secondary(c, c.first_month() + 12, seed).e);
  }
  std::sort(e.begin(), e.end());
  const double p99 = e[static_cast<std::size_t>(0.99 * static_cast<double>(e.size() - 1))];
  MESSAGE("control E 99th percentile: " << p99);
  CHECK(p99 < SecondaryConfig{}.e_threshold);
}

TEST_CASE("evolution csv and svg") {
  EvolutionReport report;
  report.scores.push_back({"a", Side::before, -1.5, -2.5});
  report.scores.push_back({"b", Side::after, -3, -1});
  std::ostringstream csv;
  write_evolution_csv(csv, report);
  CHECK(csv.str() ==
        "sample_id,side,llpo_before_model,llpo_after_model\na,before,-1.5,-2.5\nb,after,-3,-1\n");
  CHECK(report.scores[0].correct() == -1.5);
  CHECK(report.scores[1].cross() == -3);
  std::ostringstream svg;
  write_evolution_svg(svg, report, "spike");
  CHECK(svg.str().find("</svg>") != std::string::npos);
}
