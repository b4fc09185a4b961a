#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "evotrack/corpus.hpp"

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("evotrack-" + tag + "-" + std::to_string(rng() % 1000000000ULL));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline evotrack::Sample sample(std::string id, evotrack::Date created,
                               std::vector<std::string> opcodes, std::string family = "fam") {
  return evotrack::Sample{std::move(id), std::move(family), created, std::move(opcodes)};
}

// Control or planted corpus with the default planted geometry.
inline evotrack::Corpus planted(std::uint64_t seed, double blend = 1.0, int evolve_at = 12,
                                int samples_per_month = 30) {
  evotrack::PlantedOptions options;
  options.seed = seed;
  options.blend = blend;
  options.evolve_at = evolve_at;
  options.samples_per_month = samples_per_month;
  return evotrack::generate_synthetic(evotrack::planted_spec(options));
}

}  // namespace testing_support
