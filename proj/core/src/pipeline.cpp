#include "evotrack/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "evotrack/error.hpp"
#include "evotrack/parallel.hpp"
#include "evotrack/random.hpp"

namespace evotrack {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("cli", "bad value '" + std::string(value) + "' for '" + std::string(key) +
                               "' (expected " + std::string(want) + ")");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const auto value = trim(text);
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(value, &used));
      if (used != value.size()) bad_value(key, text, "a number");
    } catch (const std::logic_error&) {
      bad_value(key, text, "a number");
    }
  } else {
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
      bad_value(key, text, "an integer");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const auto v = trim(text);
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  bad_value(key, text, "true or false");
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

void write_text(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cli", "cannot write " + path.string(), "check the output directory");
  out << content;
  files.push_back(path);
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return std::move(s).str();
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "manifest",          "synth",
      "family",            "min_year",
      "max_year",          "engine",
      "vocab_size",        "count_mode",
      "vocab_scope",       "embedding_scope",
      "svm.lambda",        "svm.epochs",
      "svm.class_balance", "sgns.window",
      "sgns.negatives",    "sgns.epochs",
      "sgns.learning_rate", "sgns.subsample",
      "hmm.states",        "hmm.max_iterations",
      "hmm.min_log_improvement", "hmm.restarts",
      "z_threshold",       "e_threshold",
      "evolution.window_months", "evolution.min_samples",
      "evolution.score_mode", "output",
      "seed",              "workers"};
  return keys;
}

void apply_engine_spec(EngineConfig& engine, std::string_view spec) {
  const auto text = trim(spec);
  std::string name = text;
  std::optional<int> arg;
  if (const auto open = text.find_first_of("(:"); open != std::string::npos) {
    name = trim(std::string_view(text).substr(0, open));
    auto rest = std::string_view(text).substr(open + 1);
    if (text[open] == '(') {
      if (rest.empty() || rest.back() != ')') bad_value("engine", spec, "name(arg)");
      rest.remove_suffix(1);
    }
    arg = parse_number<int>("engine", rest);
    if (*arg < 1) bad_value("engine", spec, "a positive argument");
  }
  if (name == "raw") {
    if (arg) bad_value("engine", spec, "'raw' without argument");
    engine.engine = Engine::raw;
  } else if (name == "ngram") {
    engine.engine = Engine::ngram;
    engine.ngram = arg.value_or(2);
    if (engine.ngram < 2) bad_value("engine", spec, "ngram(n) with n >= 2");
  } else if (name == "word2vec") {
    engine.engine = Engine::word2vec;
    engine.sgns.dim = static_cast<std::size_t>(arg.value_or(2));
  } else if (name == "hmm2vec") {
    engine.engine = Engine::hmm2vec;
    engine.hmm.states = static_cast<std::size_t>(arg.value_or(2));
    if (engine.hmm.states < 2) bad_value("engine", spec, "hmm2vec(N) with N >= 2");
  } else {
    bad_value("engine", spec, "raw, ngram(n), word2vec(d) or hmm2vec(N)");
  }
}

void apply_setting(RunConfig& c, std::string_view key_text, std::string_view value_text) {
  const auto key = trim(key_text);
  const auto value = trim(value_text);
  auto size = [&] { return static_cast<std::size_t>(parse_number<unsigned long long>(key, value)); };
  auto real = [&] { return parse_number<double>(key, value); };

  if (key == "manifest") c.manifest = value;
  else if (key == "synth") c.synth_spec = value;
  else if (key == "family") c.family = value;
  else if (key == "min_year") c.min_year = parse_number<int>(key, value);
  else if (key == "max_year") c.max_year = parse_number<int>(key, value);
  else if (key == "engine") apply_engine_spec(c.engine, value);
  else if (key == "vocab_size") c.engine.vocabulary_size = size();
  else if (key == "count_mode") {
    if (value == "frequency") c.engine.count_mode = CountMode::frequency;
    else if (value == "presence") c.engine.count_mode = CountMode::presence;
    else bad_value(key, value, "frequency or presence");
  } else if (key == "vocab_scope") {
    if (value == "global") c.engine.vocabulary_scope = VocabularyScope::global;
    else if (value == "per_window") c.engine.vocabulary_scope = VocabularyScope::per_window;
    else bad_value(key, value, "global or per_window");
  } else if (key == "embedding_scope") {
    if (value == "auto") c.engine.embedding_scope = EmbeddingScope::automatic;
    else if (value == "per_window") c.engine.embedding_scope = EmbeddingScope::per_window;
    else if (value == "global") c.engine.embedding_scope = EmbeddingScope::global;
    else bad_value(key, value, "auto, per_window or global");
  } else if (key == "svm.lambda") c.svm.lambda = real();
  else if (key == "svm.epochs") c.svm.epochs = size();
  else if (key == "svm.class_balance") c.svm.class_balance = parse_bool(key, value);
  else if (key == "sgns.window") c.engine.sgns.context_window = size();
  else if (key == "sgns.negatives") c.engine.sgns.negatives = size();
  else if (key == "sgns.epochs") c.engine.sgns.epochs = size();
  else if (key == "sgns.learning_rate") c.engine.sgns.learning_rate = real();
  else if (key == "sgns.subsample") c.engine.sgns.subsample_threshold = real();
  else if (key == "hmm.states") c.secondary.hmm.states = size();
  else if (key == "hmm.max_iterations") {
    c.secondary.hmm.max_iterations = c.engine.hmm.max_iterations = size();
  } else if (key == "hmm.min_log_improvement") {
    c.secondary.hmm.min_log_improvement = c.engine.hmm.min_log_improvement = real();
  } else if (key == "hmm.restarts") {
    c.secondary.hmm.restarts = c.engine.hmm.restarts = size();
  } else if (key == "z_threshold") c.z_threshold = real();
  else if (key == "e_threshold") c.secondary.e_threshold = real();
  else if (key == "evolution.window_months") c.secondary.window_months = parse_number<int>(key, value);
  else if (key == "evolution.min_samples") c.secondary.min_samples = size();
  else if (key == "evolution.score_mode") {
    if (value == "magnitude") c.secondary.mode = ScoreMode::magnitude;
    else if (value == "raw") c.secondary.mode = ScoreMode::raw;
    else bad_value(key, value, "magnitude or raw");
  } else if (key == "output") c.output = value;
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "workers") c.workers = size();
  else throw ConfigError("cli", "unknown configuration key '" + key + "'");
}

std::map<std::string, std::string> parse_key_values(std::istream& in, std::string_view source) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("cli", std::string(source) + ":" + std::to_string(line_no) +
                                   ": expected 'key = value'");
    out[trim(std::string_view(text).substr(0, eq))] = trim(std::string_view(text).substr(eq + 1));
  }
  return out;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "cannot open config file " + path.string());
  RunConfig config;
  for (const auto& [k, v] : parse_key_values(in, path.string())) apply_setting(config, k, v);
  return config;
}

void RunConfig::validate() const {
  if (manifest.has_value() == synth_spec.has_value())
    throw ConfigError("cli", "exactly one of 'manifest' and 'synth' must be set",
                      "choose a real corpus manifest or a synthetic corpus spec");
  if (min_year > max_year) throw ConfigError("cli", "min_year is after max_year");
  if (!(z_threshold > 0.0)) throw ConfigError("cli", "z_threshold must be > 0");
  if (output.empty()) throw ConfigError("cli", "output directory is empty");
  try {
    engine.validate();
    svm.validate();
    secondary.hmm.validate();
  } catch (const InputError& e) {
    throw ConfigError("cli", e.what());
  }
  if (secondary.window_months < 1) throw ConfigError("cli", "evolution.window_months must be >= 1");
  if (secondary.min_samples < 1) throw ConfigError("cli", "evolution.min_samples must be >= 1");
}

StageSeeds stage_seeds(std::uint64_t master) {
  return StageSeeds{derive_seed(master, "series"), derive_seed(master, "secondary"),
                    derive_seed(master, "synth")};
}

Analysis analyze(const Corpus& corpus, const RunConfig& config) {
  const auto seeds = stage_seeds(config.seed);
  EngineConfig engine = config.engine;
  engine.sgns.seed = derive_seed(seeds.series, "word2vec");
  engine.hmm.seed = derive_seed(seeds.series, "hmm2vec");
  SvmParams svm = config.svm;
  svm.seed = derive_seed(seeds.series, "svm");

  Analysis analysis{build_series(corpus, engine, svm, SeriesOptions{config.workers}),
                    build_vocabulary(corpus.samples(), config.engine.vocabulary_size, 1)};
  auto& series = analysis.series;
  series.spikes = detect_spikes(series.points, config.z_threshold);

  SecondaryConfig secondary = config.secondary;
  secondary.hmm.seed = seeds.secondary;
  parallel_for(series.spikes.size(), config.workers, [&](std::size_t i) {
    auto& spike = series.spikes[i];
    if (spike.confirmed) return;  // untestable endpoint
    auto report = secondary_test(corpus, analysis.secondary_vocabulary, spike.month, secondary);
    spike.confirmed = report.verdict;
    spike.evolution = std::move(report);
  });
  return analysis;
}

namespace {

std::vector<std::string> run_decisions() {
  return {
      "features: relative n-gram frequencies over the top-K symbols of the whole corpus plus OTHER",
      "embeddings: per-sample vector is the frequency-weighted concatenation of symbol embeddings",
      "word2vec: skip-gram with negative sampling, unigram^0.75 negatives, OTHER embedded as zero",
      "hmm2vec: states ordered by descending stationary probability of A before reading B columns",
      "svm: Pegasos-style subgradient descent, step 1/(lambda t); returns the lowest-objective "
      "of the epoch-end iterates and the second-half average, each with its exact "
      "unregularized bias",
      "chi2: |w| L1-normalized, floored at 1e-6 and renormalized; previous window is expected",
      "spikes: z-score against mean and sample std of all other points; last point untestable",
      "evolution score: computed on |LLPO| (magnitude mode) unless score_mode=raw",
      "hmm: estimates floored at 1e-10 and renormalized each Baum-Welch iteration",
      "seeds: every window shares one seed per stage, derived from the master seed",
  };
}

std::string spikes_csv(const Chi2Series& series) {
  std::ostringstream out;
  out << "month,chi2,zscore,status,evolution_score\n";
  for (const auto& s : series.spikes) {
    out << s.month.str() << ',' << fmt(s.chi2) << ',' << fmt(s.zscore) << ','
        << (s.confirmed ? to_string(*s.confirmed) : std::string_view("untested")) << ','
        << (s.evolution && s.evolution->verdict != Confirmation::untestable ? fmt(s.evolution->e)
                                                                             : std::string())
        << '\n';
  }
  return out.str();
}

nlohmann::ordered_json metadata(const RunConfig& config, const Corpus& corpus,
                                const std::optional<LoadReport>& load, const Analysis& analysis) {
  using nlohmann::ordered_json;
  const auto seeds = stage_seeds(config.seed);
  ordered_json j;
  j["version"] = kVersion;
  j["engine"] = describe(config.engine);
  j["corpus"] = {{"source", config.manifest ? config.manifest->string() : config.synth_spec->string()},
                 {"kind", config.manifest ? "manifest" : "synthetic"},
                 {"family", corpus.family()},
                 {"samples", corpus.size()},
                 {"first_month", corpus.first_month().str()},
                 {"last_month", corpus.last_month().str()}};
  if (load)
    j["corpus"]["load"] = {{"loaded", load->loaded},
                           {"dropped", load->dropped},
                           {"duplicates", load->duplicates},
                           {"reasons", load->reasons}};
  j["seeds"] = {{"master", config.seed},
                {"series", seeds.series},
                {"secondary", seeds.secondary},
                {"svm", derive_seed(seeds.series, "svm")},
                {"word2vec", derive_seed(seeds.series, "word2vec")},
                {"hmm2vec", derive_seed(seeds.series, "hmm2vec")}};
  j["features"] = {{"vocab_size", config.engine.vocabulary_size},
                   {"gram_order", config.engine.gram_order()},
                   {"count_mode", config.engine.count_mode == CountMode::frequency ? "frequency" : "presence"},
                   {"vocab_scope", config.engine.vocabulary_scope == VocabularyScope::global ? "global" : "per_window"},
                   {"embedding_scope", config.engine.resolved_embedding_scope() == EmbeddingScope::global ? "global" : "per_window"}};
  j["svm"] = {{"lambda", config.svm.lambda},
              {"epochs", config.svm.epochs},
              {"class_balance", config.svm.class_balance}};
  j["sgns"] = {{"dim", config.engine.sgns.dim},
               {"window", config.engine.sgns.context_window},
               {"negatives", config.engine.sgns.negatives},
               {"epochs", config.engine.sgns.epochs},
               {"learning_rate", config.engine.sgns.learning_rate},
               {"subsample", config.engine.sgns.subsample_threshold}};
  j["hmm2vec"] = {{"states", config.engine.hmm.states},
                  {"restarts", config.engine.hmm.restarts},
                  {"max_iterations", config.engine.hmm.max_iterations},
                  {"min_log_improvement", config.engine.hmm.min_log_improvement},
                  {"state_order", "descending stationary probability, ties by B[s][0]"}};
  j["secondary"] = {{"states", config.secondary.hmm.states},
                    {"restarts", config.secondary.hmm.restarts},
                    {"max_iterations", config.secondary.hmm.max_iterations},
                    {"min_log_improvement", config.secondary.hmm.min_log_improvement},
                    {"window_months", config.secondary.window_months},
                    {"min_samples", config.secondary.min_samples},
                    {"e_threshold", config.secondary.e_threshold},
                    {"score_mode", config.secondary.mode == ScoreMode::magnitude ? "magnitude" : "raw"},
                    {"probability_floor", kProbabilityFloor}};
  j["z_threshold"] = config.z_threshold;
  j["chi2_floor"] = 1e-6;
  j["decisions"] = run_decisions();

  const auto& series = analysis.series;
  ordered_json windows = ordered_json::array();
  for (const auto& w : series.windows)
    windows.push_back({{"probe", w.probe.str()},
                       {"positives", w.positives},
                       {"negatives", w.negatives},
                       {"excluded_short", w.excluded_short},
                       {"skipped", w.skipped},
                       {"note", w.note},
                       {"objective", json_number(w.objective)}});
  j["windows"] = windows;
  ordered_json spikes = ordered_json::array();
  for (const auto& s : series.spikes) {
    ordered_json js{{"month", s.month.str()},
                    {"chi2", json_number(s.chi2)},
                    {"zscore", json_number(s.zscore)},
                    {"status", s.confirmed ? std::string(to_string(*s.confirmed)) : "untested"}};
    if (s.evolution) {
      const auto& e = *s.evolution;
      js["evolution"] = {{"E", json_number(e.e)},
                         {"E_before", json_number(e.e_before)},
                         {"E_after", json_number(e.e_after)},
                         {"mean_llpo_before_side", {{"own", e.mean_correct_before}, {"cross", e.mean_cross_before}}},
                         {"mean_llpo_after_side", {{"own", e.mean_correct_after}, {"cross", e.mean_cross_after}}},
                         {"before_model", {{"seed", e.before_info.seed}, {"states", e.before_info.states},
                                           {"iterations", e.before_info.iterations}, {"samples", e.before_info.samples}}},
                         {"after_model", {{"seed", e.after_info.seed}, {"states", e.after_info.states},
                                          {"iterations", e.after_info.iterations}, {"samples", e.after_info.samples}}},
                         {"note", e.note}};
    }
    spikes.push_back(js);
  }
  j["spikes"] = spikes;
  return j;
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    if (!e.hint().empty()) outcome.message += " (hint: " + e.hint() + ")";
    return outcome;
  }

  try {
    std::optional<LoadReport> load;
    std::optional<Corpus> corpus;
    if (config.manifest) {
      LoadOptions options;
      options.min_year = config.min_year;
      options.max_year = config.max_year;
      options.family = config.family;
      options.diagnostics = &log;
      auto loaded = load_corpus(*config.manifest, options);
      load = std::move(loaded.report);
      corpus.emplace(std::move(loaded.corpus));
    } else {
      SynthSpec spec;
      try {
        spec = read_synth_spec(*config.synth_spec);
      } catch (const InputError& e) {
        throw ConfigError("cli", e.what());
      }
      corpus.emplace(generate_synthetic(spec));
    }
    log << "corpus " << corpus->family() << ": " << corpus->size() << " samples, "
        << corpus->first_month().str() << " to " << corpus->last_month().str() << '\n';

    const auto analysis = analyze(*corpus, config);
    const auto& series = analysis.series;
    log << "engine " << describe(config.engine) << ": " << series.points.size() << " points, "
        << series.spikes.size() << " spikes\n";

    std::filesystem::create_directories(config.output);
    auto& files = outcome.files;
    const auto& dir = config.output;
    write_text(dir / "series.csv", render([&](std::ostream& o) { write_series_csv(o, series); }), files);
    write_text(dir / "series.svg",
               render([&](std::ostream& o) {
                 write_series_svg(o, series, corpus->family() + " - " + describe(config.engine) +
                                                 " chi-square series");
               }),
               files);
    write_text(dir / "spikes.csv", spikes_csv(series), files);
    for (const auto& spike : series.spikes) {
      if (!spike.evolution || spike.evolution->verdict == Confirmation::untestable) continue;
      const auto& report = *spike.evolution;
      const auto tag = spike.month.str();
      write_text(dir / ("evolution_" + tag + ".csv"),
                 render([&](std::ostream& o) { write_evolution_csv(o, report); }), files);
      write_text(dir / ("evolution_" + tag + ".svg"),
                 render([&](std::ostream& o) {
                   write_evolution_svg(o, report, corpus->family() + " spike " + tag);
                 }),
                 files);
      write_text(dir / ("hmm_before_" + tag + ".txt"),
                 render([&](std::ostream& o) { write_model(o, *report.before_model); }), files);
      write_text(dir / ("hmm_after_" + tag + ".txt"),
                 render([&](std::ostream& o) { write_model(o, *report.after_model); }), files);
    }
    write_text(dir / "run.json", metadata(config, *corpus, load, analysis).dump(2) + "\n", files);
    for (const auto& s : series.spikes)
      log << "spike " << s.month.str() << " chi2=" << fmt(s.chi2) << " z=" << fmt(s.zscore) << ' '
          << (s.confirmed ? to_string(*s.confirmed) : std::string_view("untested")) << '\n';
    outcome.series = series;
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
  } catch (const DataError& e) {
    outcome.exit_code = kExitData;
    outcome.message = e.what();
    if (!e.hint().empty()) outcome.message += " (hint: " + e.hint() + ")";
  } catch (const Error& e) {
    outcome.exit_code = kExitData;
    outcome.message = e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInternal;
    outcome.message = std::string("internal error: ") + e.what();
  }
  return outcome;
}

}  // namespace evotrack
