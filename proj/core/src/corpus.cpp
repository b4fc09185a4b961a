#include "evotrack/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "evotrack/error.hpp"

namespace evotrack {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("corpus", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace

Corpus::Corpus(std::string family, std::vector<Sample> samples)
    : family_(std::move(family)), samples_(std::move(samples)) {
  if (samples_.empty())
    throw DataError("corpus", "family '" + family_ + "' has no samples",
                    "check the manifest paths and date range");
  for (const auto& s : samples_) {
    if (s.family != family_)
      throw InputError("corpus", "sample " + s.id + " belongs to family '" + s.family +
                                     "', expected '" + family_ + "'");
    if (!s.created.valid())
      throw InputError("corpus", "sample " + s.id + " has an invalid date");
    if (s.opcodes.empty())
      throw InputError("corpus", "sample " + s.id + " has no opcodes");
  }
  std::stable_sort(samples_.begin(), samples_.end(),
                   [](const Sample& a, const Sample& b) { return a.created < b.created; });
  first_ = samples_.front().month();
  last_ = samples_.back().month();
}

std::vector<std::string> parse_opcode_text(std::string_view text, std::string_view source) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == ';' || line.front() == '#') continue;
    if (std::any_of(line.begin(), line.end(),
                    [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
      throw MalformedSampleError("corpus", std::string(source) + ": line '" +
                                               std::string(line) +
                                               "' holds more than one token");
    std::string token(line);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(std::move(token));
  }
  if (tokens.empty())
    throw MalformedSampleError("corpus", std::string(source) + ": no opcodes");
  return tokens;
}

std::string LoadReport::summary() const {
  return "loaded=" + std::to_string(loaded) + " dropped=" + std::to_string(dropped);
}

LoadResult load_corpus(const std::filesystem::path& manifest, const LoadOptions& options) {
  std::ifstream in(manifest);
  if (!in)
    throw DataError("corpus", "cannot open manifest " + manifest.string(),
                    "pass an existing CSV with header id,family,created,path");

  std::string line;
  if (!std::getline(in, line))
    throw DataError("corpus", manifest.string() + " is empty");
  {
    const auto header = split_csv_line(trim(line));
    const std::vector<std::string_view> expected{"id", "family", "created", "path"};
    if (header != expected)
      throw DataError("corpus", manifest.string() + ": header must be id,family,created,path");
  }

  const auto base_dir = manifest.parent_path();
  const Month lowest(options.min_year, 1);
  const Month highest(options.max_year, 12);

  LoadReport report;
  std::vector<Sample> samples;
  std::string family = options.family;
  std::set<std::vector<std::string>> seen;

  auto drop = [&](std::size_t line_no, const std::string& why) {
    ++report.dropped;
    auto reason = manifest.filename().string() + ":" + std::to_string(line_no) + ": " + why;
    if (options.diagnostics) *options.diagnostics << "dropped " << reason << '\n';
    report.reasons.push_back(std::move(reason));
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(trim(line));
    if (fields.size() != 4) {
      drop(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
      continue;
    }
    Sample sample;
    sample.id = fields[0];
    sample.family = fields[1];
    const auto date = parse_iso_date(fields[2]);
    if (!date) {
      drop(line_no, "sample " + sample.id + ": unparseable date '" + std::string(fields[2]) + "'");
      continue;
    }
    if (Month::of(*date) < lowest || Month::of(*date) > highest) {
      drop(line_no, "sample " + sample.id + ": date " + format_date(*date) +
                        " outside plausible range (altered timestamp)");
      continue;
    }
    sample.created = *date;
    if (family.empty()) family = sample.family;
    if (sample.family != family) {
      drop(line_no, "sample " + sample.id + ": family '" + sample.family + "' is not '" +
                        family + "'");
      continue;
    }
    std::filesystem::path path(fields[3]);
    if (path.is_relative()) path = base_dir / path;
    try {
      sample.opcodes = parse_opcode_text(read_file(path), path.string());
    } catch (const Error& e) {
      drop(line_no, "sample " + sample.id + ": " + e.what());
      continue;
    }
    if (!seen.insert(sample.opcodes).second) ++report.duplicates;
    samples.push_back(std::move(sample));
  }

  report.loaded = samples.size();
  if (samples.empty())
    throw DataError("corpus", "no valid samples in " + manifest.string() + " (" +
                                  report.summary() + ")",
                    "inspect the per-sample drop reasons");
  if (options.diagnostics) {
    *options.diagnostics << report.summary();
    if (report.duplicates) *options.diagnostics << " duplicates=" << report.duplicates;
    *options.diagnostics << '\n';
  }
  return LoadResult{Corpus(family, std::move(samples)), std::move(report)};
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory / "opcodes");
  std::ofstream manifest(directory / "manifest.csv", std::ios::binary);
  if (!manifest) throw DataError("corpus", "cannot write " + (directory / "manifest.csv").string());
  manifest << "id,family,created,path\n";
  for (const auto& s : corpus.samples()) {
    const auto rel = fs::path("opcodes") / (s.id + ".txt");
    manifest << s.id << ',' << s.family << ',' << format_date(s.created) << ','
             << rel.generic_string() << '\n';
    std::ofstream out(directory / rel, std::ios::binary);
    if (!out) throw DataError("corpus", "cannot write " + (directory / rel).string());
    for (const auto& op : s.opcodes) out << op << '\n';
  }
}

}  // namespace evotrack
