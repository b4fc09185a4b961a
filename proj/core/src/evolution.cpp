#include "evotrack/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "evotrack/error.hpp"
#include "evotrack/svg.hpp"

namespace evotrack {
namespace {

constexpr double kScoreFloor = 1e-12;

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(Confirmation c) {
  switch (c) {
    case Confirmation::confirmed: return "confirmed";
    case Confirmation::rejected: return "rejected";
    case Confirmation::untestable: return "untestable";
  }
  return "unknown";
}

std::string_view to_string(Side side) { return side == Side::before ? "before" : "after"; }

double evolution_score(std::span<const double> correct, std::span<const double> cross,
                       ScoreMode mode) {
  if (correct.size() != cross.size())
    throw InputError("evolution", "score lists differ in length (" +
                                      std::to_string(correct.size()) + " vs " +
                                      std::to_string(cross.size()) + ")");
  if (correct.empty()) throw InputError("evolution", "score lists are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    if (mode == ScoreMode::magnitude) {
      const double s = std::max(std::abs(correct[i]), kScoreFloor);
      const double gap = std::abs(cross[i]) - std::abs(correct[i]);
      sum += gap * gap / s;
    } else {
      double s = correct[i];
      if (std::abs(s) < kScoreFloor) s = s < 0 ? -kScoreFloor : kScoreFloor;
      const double gap = cross[i] - correct[i];
      sum += gap * gap / s;
    }
  }
  return sum / static_cast<double>(correct.size());
}

double EvolutionReport::own_model_preference(Side side) const {
  std::size_t total = 0, preferred = 0;
  for (const auto& s : scores) {
    if (s.side != side) continue;
    ++total;
    if (s.correct() > s.cross()) ++preferred;
  }
  return total ? static_cast<double>(preferred) / static_cast<double>(total) : 0.0;
}

EvolutionReport secondary_test(const Corpus& corpus, const Vocabulary& vocab, Month spike,
                               const SecondaryConfig& config) {
  if (config.window_months < 1) throw InputError("evolution", "window_months must be >= 1");
  if (vocab.n() != 1) throw InputError("evolution", "the secondary test needs a unigram vocabulary");

  EvolutionReport report;
  report.spike_month = spike;
  std::vector<std::size_t> before, after;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Month m = corpus[i].month();
    if (m >= spike - config.window_months && m < spike) before.push_back(i);
    else if (m >= spike && m < spike + config.window_months) after.push_back(i);
  }
  if (before.size() < config.min_samples || after.size() < config.min_samples) {
    report.verdict = Confirmation::untestable;
    report.note = "insufficient samples (before=" + std::to_string(before.size()) +
                  ", after=" + std::to_string(after.size()) + ", need " +
                  std::to_string(config.min_samples) + " per side)";
    return report;
  }

  std::vector<std::vector<int>> encoded(corpus.size());
  for (auto idx : {&before, &after})
    for (std::size_t i : *idx) encoded[i] = encode(corpus[i].opcodes, vocab);

  auto train_side = [&](const std::vector<std::size_t>& idx, SideModelInfo& info) {
    std::vector<SequenceView> views;
    views.reserve(idx.size());
    for (std::size_t i : idx) views.emplace_back(encoded[i]);
    auto trained = train_hmm(views, vocab.size(), config.hmm);
    trained.model.symbols = vocab.symbols();
    info.seed = config.hmm.seed;
    info.states = config.hmm.states;
    info.iterations = trained.iterations;
    info.samples = idx.size();
    info.log_likelihood = trained.log_likelihood.back();
    return std::move(trained.model);
  };
  report.before_model = train_side(before, report.before_info);
  report.after_model = train_side(after, report.after_info);

  std::vector<double> correct_b, cross_b, correct_a, cross_a;
  for (auto [idx, side] : {std::pair{&before, Side::before}, std::pair{&after, Side::after}}) {
    for (std::size_t i : *idx) {
      SampleScore s;
      s.sample_id = corpus[i].id;
      s.side = side;
      s.llpo_before_model = score_llpo(*report.before_model, encoded[i]);
      s.llpo_after_model = score_llpo(*report.after_model, encoded[i]);
      (side == Side::before ? correct_b : correct_a).push_back(s.correct());
      (side == Side::before ? cross_b : cross_a).push_back(s.cross());
      report.scores.push_back(std::move(s));
    }
  }

  report.e_before = evolution_score(correct_b, cross_b, config.mode);
  report.e_after = evolution_score(correct_a, cross_a, config.mode);
  report.e = 0.5 * (report.e_before + report.e_after);
  report.mean_correct_before = mean(correct_b);
  report.mean_cross_before = mean(cross_b);
  report.mean_correct_after = mean(correct_a);
  report.mean_cross_after = mean(cross_a);

  const bool separated = report.mean_correct_before > report.mean_cross_before &&
                         report.mean_correct_after > report.mean_cross_after;
  report.verdict = report.e >= config.e_threshold && separated ? Confirmation::confirmed
                                                               : Confirmation::rejected;
  if (!separated) report.note = "a cross model scores its side at least as well as the own model";
  else if (report.e < config.e_threshold) report.note = "evolution score below threshold";
  return report;
}

void write_evolution_csv(std::ostream& out, const EvolutionReport& report) {
  out << "sample_id,side,llpo_before_model,llpo_after_model\n";
  out << std::setprecision(10);
  for (const auto& s : report.scores)
    out << s.sample_id << ',' << to_string(s.side) << ',' << s.llpo_before_model << ','
        << s.llpo_after_model << '\n';
}

void write_evolution_svg(std::ostream& out, const EvolutionReport& report, std::string_view title) {
  std::vector<std::pair<std::vector<svg::Trace>, svg::ChartOptions>> charts;
  for (Side side : {Side::before, Side::after}) {
    svg::Trace own{"model before spike", "#1f77b4", {}, true};
    svg::Trace other{"model after spike", "#ff7f0e", {}, true};
    for (const auto& s : report.scores) {
      if (s.side != side) continue;
      own.y.push_back(s.llpo_before_model);
      other.y.push_back(s.llpo_after_model);
    }
    svg::ChartOptions opt;
    opt.title = std::string(title) + " - samples " + std::string(to_string(side)) + " spike";
    opt.x_label = "sample index";
    opt.y_label = "LLPO";
    charts.push_back({{own, other}, opt});
  }
  svg::write_stacked(out, charts);
}

}  // namespace evotrack
