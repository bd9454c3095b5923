#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "earda/dann.hpp"
#include "earda/datasets.hpp"

namespace earda::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;   // missing, unreadable or incompatible inputs
inline constexpr int kExitUsage = 64;  // bad flags or configuration

enum class FilterMode { Auto, On, Off };

struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  std::string out_dir = "earda-out";
  unsigned threads = 1;

  // [data]
  std::string root;                   // corpus root; EARDA_DATA_ROOT when empty
  std::vector<std::string> corpora;   // public corpora read from root
  std::vector<std::string> recordings;  // canonical CSV files
  std::string source_windows;         // default <out>/source_windows.bin
  std::string target_windows;         // default <out>/target_windows.bin
  std::size_t source_per_class = 0;   // 0 keeps every source window
  std::array<double, 3> source_split = {0.8, 0.1, 0.1};
  std::array<double, 3> target_split = {0.1, 0.1, 0.8};

  // [filter]
  signal::FilterSpec filter;

  // [preprocess]
  DomainTag preprocess_domain = DomainTag::Target;
  FilterMode preprocess_filter = FilterMode::Auto;  // Auto filters target recordings only

  // [train]
  dann::TrainConfig train;
  bool domain_adaptation = true;
  std::string checkpoint;  // default <out>/model.ckpt

  // [eval]
  std::string eval_split = "test";  // test | all

  // [ablate]
  std::string ablate_mode = "da";

  // [synth]
  datasets::SynthConfig synth;

  // [spectrum]
  std::string spectrum_input;
  std::string spectrum_channel = "gyro";
  std::size_t spectrum_start = 0;
  std::size_t spectrum_length = 0;  // 0 uses the whole recording

  void validate() const;  // throws ConfigError
};

// Sectioned "key = value" text; '#' starts a comment. Keys that are absent
// keep their defaults; unknown sections or keys and duplicates throw
// ConfigError.
RunConfig parse_config(std::string_view text, std::string_view source_name = "<config>");
RunConfig load_config(const std::string& path);

// Canonical form listing every key. parse_config(format_config(c)) yields c,
// and formatting that again reproduces the same bytes.
std::string format_config(const RunConfig& config);

// Runs the earda command line; returns the process exit code. Errors are
// reported on stderr.
int run(int argc, const char* const* argv);

}  // namespace earda::cli
