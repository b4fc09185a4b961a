#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "evotrack/corpus.hpp"
#include "evotrack/error.hpp"
#include "evotrack/random.hpp"

namespace evotrack {
namespace {

constexpr double kSumTolerance = 1e-9;

void check_distribution(const std::vector<double>& p, std::size_t size, const std::string& what) {
  if (p.size() != size)
    throw InputError("corpus", what + " has " + std::to_string(p.size()) +
                                   " entries, expected " + std::to_string(size));
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InputError("corpus", what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw InputError("corpus", what + " sums to " + std::to_string(sum) + ", not 1");
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  cdf.back() = 1.0;
  return cdf;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> zipf(int size, double exponent) {
  std::vector<double> p(static_cast<std::size_t>(size));
  for (int r = 0; r < size; ++r) p[static_cast<std::size_t>(r)] = std::pow(r + 1.0, -exponent);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> parse_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw InputError("corpus", "synth spec: bad number list for " + key);
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> synthetic_opcode_names(int count) {
  static const char* const kNames[] = {
      "mov",  "push", "pop",  "call", "add",  "sub",   "cmp",  "jmp",  "jz",   "jnz",
      "lea",  "xor",  "test", "ret",  "and",  "or",    "inc",  "dec",  "shl",  "shr",
      "imul", "nop",  "movzx", "sar", "not",  "neg",   "leave", "int", "rep",  "stosd",
      "movsb", "ja",  "jb",   "jg",   "jl",   "sbb",   "adc",  "xchg", "cdq",  "idiv"};
  constexpr int kKnown = static_cast<int>(std::size(kNames));
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i)
    names.push_back(i < kKnown ? std::string(kNames[i]) : "op" + std::to_string(i));
  return names;
}

void SynthSpec::validate() const {
  if (months < 1) throw InputError("corpus", "synth spec: months must be >= 1");
  if (samples_per_month < 1) throw InputError("corpus", "synth spec: samples_per_month must be >= 1");
  if (min_length < 1 || max_length < min_length)
    throw InputError("corpus", "synth spec: need 1 <= min_length <= max_length");
  if (opcodes.empty()) throw InputError("corpus", "synth spec: empty opcode alphabet");
  for (const auto& op : opcodes)
    if (op.empty() || op.find_first_of(" \t\r\n") != std::string::npos)
      throw InputError("corpus", "synth spec: opcode names must be nonempty without whitespace");
  check_distribution(base, opcodes.size(), "base distribution");
  for (const auto& point : evolution) {
    if (point.month_index <= 0 || point.month_index >= months)
      throw InputError("corpus", "synth spec: evolution month " +
                                     std::to_string(point.month_index) +
                                     " must lie strictly inside (0, months)");
    if (!(point.blend >= 0.0 && point.blend <= 1.0))
      throw InputError("corpus", "synth spec: blend factor must be in [0, 1]");
    check_distribution(point.replacement, opcodes.size(), "replacement distribution");
  }
}

Corpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  auto points = spec.evolution;
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.month_index < b.month_index; });

  Rng rng(spec.seed);
  std::vector<double> active = spec.base;
  auto cdf = cumulative(active);
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(spec.months * spec.samples_per_month));
  auto next_point = points.begin();
  const auto lengths = static_cast<std::uint64_t>(spec.max_length - spec.min_length + 1);

  for (int m = 0; m < spec.months; ++m) {
    bool changed = false;
    for (; next_point != points.end() && next_point->month_index < m; ++next_point) {
      for (std::size_t i = 0; i < active.size(); ++i)
        active[i] = (1.0 - next_point->blend) * active[i] +
                    next_point->blend * next_point->replacement[i];
      changed = true;
    }
    if (changed) cdf = cumulative(active);

    const Month month = spec.start + m;
    for (int i = 0; i < spec.samples_per_month; ++i) {
      Sample s;
      s.family = spec.family;
      s.created = Date{month.year(), month.month(), 1 + i % 28};
      char id[64];
      std::snprintf(id, sizeof id, "%04d%02d-%03d", month.year(), month.month(), i);
      s.id = spec.family + "-" + id;
      const auto length = spec.min_length + static_cast<int>(rng() % lengths);
      s.opcodes.reserve(static_cast<std::size_t>(length));
      for (int t = 0; t < length; ++t) s.opcodes.push_back(spec.opcodes[draw(cdf, rng)]);
      samples.push_back(std::move(s));
    }
  }
  return Corpus(spec.family, std::move(samples));
}

SynthSpec planted_spec(const PlantedOptions& options) {
  if (options.vocabulary < 2) throw InputError("corpus", "planted corpus needs >= 2 opcodes");
  SynthSpec spec;
  spec.family = "planted";
  spec.months = options.months;
  spec.samples_per_month = options.samples_per_month;
  spec.min_length = options.min_length;
  spec.max_length = options.max_length;
  spec.seed = options.seed;
  spec.opcodes = synthetic_opcode_names(options.vocabulary);

  const auto v = static_cast<std::size_t>(options.vocabulary);
  Rng rng(derive_seed(options.seed, "planted-distributions"));
  const auto shape = zipf(options.vocabulary, 1.0);
  std::vector<std::size_t> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  spec.base.assign(v, 0.0);
  for (std::size_t r = 0; r < v; ++r) spec.base[order[r]] = shape[r];

  if (options.evolve_at >= 0) {
    EvolutionPoint point;
    point.month_index = options.evolve_at;
    point.blend = options.blend;
    point.replacement.assign(v, 0.0);
    for (std::size_t r = 0; r < v; ++r) point.replacement[order[r]] = shape[v - 1 - r];
    spec.evolution.push_back(std::move(point));
  }
  spec.validate();
  return spec;
}

SynthSpec read_synth_spec(std::istream& in) {
  SynthSpec spec;
  spec.opcodes.clear();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw InputError("corpus", "synth spec line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(std::string_view(text).substr(0, eq));
    const auto value = trim(std::string_view(text).substr(eq + 1));
    try {
      if (key == "family") spec.family = value;
      else if (key == "start") {
        const auto m = parse_month(value);
        if (!m) throw InputError("corpus", "bad start month '" + value + "'");
        spec.start = *m;
      } else if (key == "months") spec.months = std::stoi(value);
      else if (key == "samples_per_month") spec.samples_per_month = std::stoi(value);
      else if (key == "min_length") spec.min_length = std::stoi(value);
      else if (key == "max_length") spec.max_length = std::stoi(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "opcodes") {
        std::string names = value;
        std::replace(names.begin(), names.end(), ',', ' ');
        std::istringstream list(names);
        for (std::string op; list >> op;) spec.opcodes.push_back(op);
      } else if (key == "base") spec.base = parse_list(value, key);
      else if (key == "evolution") {
        // evolution = <month index> ; <blend> ; <p1,p2,...>
        const auto a = value.find(';');
        const auto b = value.find(';', a == std::string::npos ? a : a + 1);
        if (a == std::string::npos || b == std::string::npos)
          throw InputError("corpus", "evolution must be '<month>; <blend>; <distribution>'");
        EvolutionPoint point;
        point.month_index = std::stoi(trim(std::string_view(value).substr(0, a)));
        point.blend = std::stod(trim(std::string_view(value).substr(a + 1, b - a - 1)));
        point.replacement = parse_list(std::string_view(value).substr(b + 1), key);
        spec.evolution.push_back(std::move(point));
      } else {
        throw InputError("corpus", "unknown synth spec key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw InputError("corpus", "synth spec line " + std::to_string(line_no) +
                                     ": bad value for '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

SynthSpec read_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("corpus", "cannot open synth spec " + path.string());
  return read_synth_spec(in);
}

void write_synth_spec(std::ostream& out, const SynthSpec& spec) {
  auto list = [&](const std::vector<double>& p) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < p.size(); ++i) s << (i ? "," : "") << p[i];
    return s.str();
  };
  out << "family = " << spec.family << '\n'
      << "start = " << spec.start.str() << '\n'
      << "months = " << spec.months << '\n'
      << "samples_per_month = " << spec.samples_per_month << '\n'
      << "min_length = " << spec.min_length << '\n'
      << "max_length = " << spec.max_length << '\n'
      << "seed = " << spec.seed << '\n'
      << "opcodes = ";
  for (std::size_t i = 0; i < spec.opcodes.size(); ++i) out << (i ? "," : "") << spec.opcodes[i];
  out << "\nbase = " << list(spec.base) << '\n';
  for (const auto& p : spec.evolution)
    out << "evolution = " << p.month_index << "; " << std::setprecision(17) << p.blend << "; "
        << list(p.replacement) << '\n';
}

}  // namespace evotrack
