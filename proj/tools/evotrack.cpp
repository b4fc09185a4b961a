#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "evotrack/corpus.hpp"
#include "evotrack/error.hpp"
#include "evotrack/hmm.hpp"
#include "evotrack/pipeline.hpp"

namespace fs = std::filesystem;
using namespace evotrack;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cli", "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void report(const Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  if (!e.hint().empty()) std::cerr << "hint: " << e.hint() << '\n';
}

struct RunArgs {
  fs::path config;
  std::map<std::string, std::string> overrides;
  bool quiet = false;
};

int do_run(const RunArgs& args) {
  RunConfig config;
  try {
    std::map<std::string, std::string> settings;
    if (!args.config.empty()) {
      std::ifstream in(args.config);
      if (!in) throw ConfigError("cli", "cannot open config " + args.config.string());
      settings = parse_key_values(in, args.config.string());
      // Relative corpus paths in a config file are relative to that file.
      for (const char* key : {"manifest", "synth"}) {
        auto it = settings.find(key);
        if (it != settings.end() && fs::path(it->second).is_relative())
          it->second = (args.config.parent_path() / it->second).string();
      }
    }
    for (const auto& [key, value] : args.overrides) settings[key] = value;
    for (const auto& key : run_config_keys())
      if (auto it = settings.find(key); it != settings.end()) apply_setting(config, key, it->second);
    for (const auto& [key, value] : settings)
      if (std::find(run_config_keys().begin(), run_config_keys().end(), key) ==
          run_config_keys().end())
        apply_setting(config, key, value);
  } catch (const ConfigError& e) {
    report(e);
    return kExitConfig;
  }

  std::ostringstream sink;
  auto outcome = run_pipeline(config, args.quiet ? static_cast<std::ostream&>(sink) : std::clog);
  if (outcome.exit_code != kExitOk) {
    std::cerr << "error: " << outcome.message << '\n';
    return outcome.exit_code;
  }
  if (!args.quiet)
    for (const auto& file : outcome.files) std::cout << file.string() << '\n';
  return kExitOk;
}

struct SynthArgs {
  fs::path spec;
  fs::path out;
  fs::path write_spec;
  PlantedOptions planted;
};

int do_synth(const SynthArgs& args) {
  SynthSpec spec;
  try {
    spec = args.spec.empty() ? planted_spec(args.planted) : read_synth_spec(args.spec);
  } catch (const InputError& e) {
    report(e);
    return kExitConfig;
  }
  try {
    const auto corpus = generate_synthetic(spec);
    write_corpus(corpus, args.out);
    if (!args.write_spec.empty()) {
      std::ofstream out(args.write_spec);
      if (!out) throw InputError("cli", "cannot write " + args.write_spec.string());
      write_synth_spec(out, spec);
    }
    std::cout << (args.out / "manifest.csv").string() << ": " << corpus.size() << " samples, "
              << corpus.first_month().str() << " to " << corpus.last_month().str() << '\n';
  } catch (const Error& e) {
    report(e);
    return kExitData;
  }
  return kExitOk;
}

int do_score(const fs::path& model_path, const fs::path& opcodes_path) {
  try {
    std::ifstream in(model_path);
    if (!in) throw InputError("cli", "cannot open model " + model_path.string());
    const auto model = read_model(in);
    const auto opcodes = parse_opcode_text(read_file(opcodes_path), opcodes_path.string());
    std::vector<int> encoded;
    if (model.symbols.empty()) {
      encoded.reserve(opcodes.size());
      for (const auto& token : opcodes) {
        std::size_t used = 0;
        int v = -1;
        try {
          v = std::stoi(token, &used);
        } catch (const std::logic_error&) {
        }
        if (used != token.size() || v < 0 || static_cast<std::size_t>(v) >= model.alphabet())
          throw InputError("cli", "model has no symbol table and '" + token +
                                      "' is not a symbol index",
                           "score files written by `run` or pass integer indices");
        encoded.push_back(v);
      }
    } else {
      std::vector<std::string> ranked(model.symbols.begin(), model.symbols.end());
      if (!ranked.empty() && ranked.back() == Vocabulary::kOther) ranked.pop_back();
      const Vocabulary vocab(std::move(ranked), 1);
      if (vocab.size() != model.alphabet())
        throw InputError("cli", "model symbol table does not end with " +
                                    std::string(Vocabulary::kOther));
      encoded = encode(opcodes, vocab);
    }
    std::cout.precision(10);
    std::cout << "llpo " << score_llpo(model, encoded) << '\n'
              << "log_likelihood " << log_likelihood(model, encoded) << '\n'
              << "length " << encoded.size() << '\n';
  } catch (const Error& e) {
    report(e);
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect evolution points in timestamped opcode-sequence corpora", "evotrack"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("-c,--config", run_args.config, "key = value configuration file")
      ->check(CLI::ExistingFile);
  run->add_flag("-q,--quiet", run_args.quiet, "Suppress progress output");
  for (const auto& key : run_config_keys())
    run->add_option_function<std::string>(
        "--" + key, [&run_args, key](const std::string& v) { run_args.overrides[key] = v; },
        "Override `" + key + "` from the config file");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus in manifest format");
  synth->add_option("--spec", synth_args.spec, "Synthetic spec file")->check(CLI::ExistingFile);
  synth->add_option("-o,--out", synth_args.out, "Output directory")->required();
  synth->add_option("--write-spec", synth_args.write_spec, "Also save the spec used");
  auto& p = synth_args.planted;
  synth->add_option("--vocabulary", p.vocabulary, "Planted corpus: number of opcodes")
      ->capture_default_str();
  synth->add_option("--months", p.months, "Planted corpus: months")->capture_default_str();
  synth->add_option("--samples-per-month", p.samples_per_month, "Planted corpus: samples per month")
      ->capture_default_str();
  synth->add_option("--evolve-at", p.evolve_at,
                    "Planted corpus: last month index of the old regime (negative: no change)")
      ->capture_default_str();
  synth->add_option("--blend", p.blend, "Planted corpus: blend factor")->capture_default_str();
  synth->add_option("--min-length", p.min_length, "Planted corpus: shortest sequence")
      ->capture_default_str();
  synth->add_option("--max-length", p.max_length, "Planted corpus: longest sequence")
      ->capture_default_str();
  synth->add_option("--seed", p.seed, "Planted corpus: seed")->capture_default_str();

  fs::path model_path, opcodes_path;
  auto* score = app.add_subcommand("score", "Score one opcode file against a saved HMM");
  score->add_option("--model", model_path, "HMM file")->required()->check(CLI::ExistingFile);
  score->add_option("--opcodes", opcodes_path, "Opcode file")->required()->check(CLI::ExistingFile);

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return do_run(run_args);
  if (*synth) return do_synth(synth_args);
  if (*score) return do_score(model_path, opcodes_path);
  if (*version) {
    std::cout << "evotrack " << kVersion << '\n';
    return kExitOk;
  }
  return kExitInternal;
}
