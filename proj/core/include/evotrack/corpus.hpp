#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evotrack/calendar.hpp"

namespace evotrack {

/// One program: its opcode trace, family label and creation date.
struct Sample {
  std::string id;
  std::string family;
  Date created;
  std::vector<std::string> opcodes;

  Month month() const { return Month::of(created); }
};

/// Samples of one family, sorted ascending by creation date. Immutable once
/// constructed; ties on the date keep their input order.
class Corpus {
public:
  Corpus(std::string family, std::vector<Sample> samples);

  const std::string& family() const noexcept { return family_; }
  std::span<const Sample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  Month first_month() const noexcept { return first_; }
  Month last_month() const noexcept { return last_; }
  /// Inclusive number of calendar months covered.
  int span_months() const noexcept { return last_ - first_ + 1; }

private:
  std::string family_;
  std::vector<Sample> samples_;
  Month first_;
  Month last_;
};

/// One token per nonblank line, trimmed and lower-cased. Lines starting with
/// `;` or `#` are comments. Throws MalformedSampleError naming `source` when
/// no tokens remain.
std::vector<std::string> parse_opcode_text(std::string_view text,
                                           std::string_view source);

struct LoadOptions {
  /// Samples created outside [min_year-01, max_year-12] are treated as having
  /// an altered timestamp and dropped.
  int min_year = 1990;
  int max_year = current_year();
  /// When empty the family of the first valid row is used; rows of other
  /// families are dropped.
  std::string family;
  /// Per-drop reasons are echoed here when set.
  std::ostream* diagnostics = nullptr;
};

struct LoadReport {
  std::size_t loaded = 0;
  std::size_t dropped = 0;
  /// Samples whose opcode sequence repeats an earlier sample exactly. They
  /// are kept.
  std::size_t duplicates = 0;
  std::vector<std::string> reasons;

  /// `loaded=<n> dropped=<m>`
  std::string summary() const;
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

/// Reads a CSV manifest with header `id,family,created,path`. Relative paths
/// resolve against the manifest's directory.
LoadResult load_corpus(const std::filesystem::path& manifest,
                       const LoadOptions& options = {});

/// Writes `manifest.csv` plus `opcodes/<id>.txt` under `directory`; the
/// result loads back to the same corpus.
void write_corpus(const Corpus& corpus, const std::filesystem::path& directory);

// --- synthetic corpora -----------------------------------------------------

struct EvolutionPoint {
  int month_index = 0;
  std::vector<double> replacement;
  double blend = 1.0;
};

/// Description of a synthetic family. Months are counted from `start`. An
/// evolution point at month t is the last month of the old regime: from month
/// t + 1 onward the active opcode distribution becomes
/// (1 - blend) * current + blend * replacement.
struct SynthSpec {
  std::string family = "synthetic";
  Month start{2010, 1};
  int months = 24;
  int samples_per_month = 30;
  std::vector<std::string> opcodes;
  std::vector<double> base;
  std::vector<EvolutionPoint> evolution;
  int min_length = 60;
  int max_length = 120;
  std::uint64_t seed = 1;

  /// Throws InputError when an invariant does not hold.
  void validate() const;
};

Corpus generate_synthetic(const SynthSpec& spec);

/// Shorthand for the single-change corpora used in experiments and tests: the
/// base is a Zipf(1) law over a seeded opcode order and the replacement gives
/// the same law over the reversed order.
struct PlantedOptions {
  int vocabulary = 20;
  int months = 24;
  int samples_per_month = 30;
  /// Negative means no evolution point (a control corpus).
  int evolve_at = 12;
  double blend = 1.0;
  int min_length = 150;
  int max_length = 300;
  std::uint64_t seed = 1;
};

/// Base and replacement distributions are Zipf-shaped over two different
/// seeded orderings of the opcode alphabet.
SynthSpec planted_spec(const PlantedOptions& options);

/// Flat `key = value` text form of a SynthSpec.
SynthSpec read_synth_spec(std::istream& in);
SynthSpec read_synth_spec(const std::filesystem::path& path);
void write_synth_spec(std::ostream& out, const SynthSpec& spec);

/// Mnemonic names used for synthetic alphabets (`op<k>` past the list).
std::vector<std::string> synthetic_opcode_names(int count);

}  // namespace evotrack
