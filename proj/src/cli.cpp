#include "earda/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "earda/errors.hpp"
#include "earda/eval.hpp"
#include "earda/rng.hpp"
#include "text_util.hpp"

namespace earda::cli {

namespace fs = std::filesystem;
using datasets::LabeledWindow;
using nlohmann::ordered_json;

namespace {

// derive_seed stream tags; kept distinct from the training streams.
constexpr std::uint64_t kSourceSplitStream = 10;
constexpr std::uint64_t kTargetSplitStream = 11;
constexpr std::uint64_t kBalanceStream = 12;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool no_da = false;
  bool no_filter = false;
  std::optional<std::string> mode;
  std::optional<std::size_t> epochs;
  std::optional<double> lambda;
  std::optional<std::string> out;
  std::optional<std::string> channel;
  std::optional<unsigned> threads;
  std::vector<std::string> inputs;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.no_da) c.domain_adaptation = false;
  if (o.no_filter) {
    c.train.target_filter_enabled = false;
    c.preprocess_filter = FilterMode::Off;
  }
  if (o.mode) c.ablate_mode = *o.mode;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.lambda) c.train.lambda = *o.lambda;
  if (o.out) c.out_dir = *o.out;
  if (o.channel) c.spectrum_channel = *o.channel;
  if (o.threads) c.threads = *o.threads;
  if (c.root.empty()) {
    if (const char* env = std::getenv("EARDA_DATA_ROOT")) c.root = env;
  }
  c.train.seed = c.seed;
  c.train.threads = c.threads;
  c.train.target_filter = c.filter;
  c.validate();
  return c;
}

fs::path out_path(const RunConfig& c, const std::string& configured, const char* fallback) {
  return configured.empty() ? fs::path(c.out_dir) / fallback : fs::path(configured);
}

void write_json(const fs::path& path, const ordered_json& j) {
  detail::write_file(path, j.dump(2) + "\n");
}

ordered_json counts_json(std::span<const LabeledWindow> windows) {
  ordered_json per_class = ordered_json::object();
  const auto hist = datasets::class_histogram(windows);
  for (auto a : kAllActivities) per_class[std::string(to_string(a))] = hist[static_cast<std::size_t>(to_index(a))];
  std::map<HeadMovement, std::size_t> heads;
  for (const auto& w : windows) ++heads[w.head];
  ordered_json per_head = ordered_json::object();
  for (const auto& [h, n] : heads) per_head[std::string(to_string(h))] = n;
  return {{"total", windows.size()}, {"per_class", std::move(per_class)}, {"per_head_movement", std::move(per_head)}};
}

ordered_json filter_json(const signal::FilterSpec& f) {
  return {{"cutoff_hz", f.cutoff_hz}, {"order", f.order}, {"zero_phase", f.zero_phase}};
}

datasets::SplitSpec split_spec(const std::array<double, 3>& f, std::uint64_t seed) {
  return {f[0], f[1], f[2], seed};
}

struct LoadedData {
  datasets::Splits source;
  datasets::Splits target;  // conditioned per the training config
  datasets::Splits target_raw;
  dann::TrainConfig train;
};

std::vector<LabeledWindow> load_domain(const fs::path& path, DomainTag domain, bool* filtered) {
  datasets::WindowFileInfo info;
  auto windows = datasets::load_windows(path, &info);
  std::erase_if(windows, [&](const LabeledWindow& w) { return w.domain != domain; });
  if (windows.empty())
    throw DataError(path.string() + ": no " + std::string(to_string(domain)) + " windows");
  if (filtered) *filtered = info.filtered;
  return windows;
}

LoadedData load_data(const RunConfig& c, bool need_source) {
  LoadedData d;
  d.train = c.train;
  if (need_source) {
    auto source = load_domain(out_path(c, c.source_windows, "source_windows.bin"), DomainTag::Source, nullptr);
    if (c.source_per_class > 0)
      source = datasets::balanced_sample(source, c.source_per_class, derive_seed(c.seed, kBalanceStream));
    d.source = datasets::split(source, split_spec(c.source_split, derive_seed(c.seed, kSourceSplitStream)));
  }
  bool prefiltered = false;
  const auto target =
      load_domain(out_path(c, c.target_windows, "target_windows.bin"), DomainTag::Target, &prefiltered);
  d.target_raw = datasets::split(target, split_spec(c.target_split, derive_seed(c.seed, kTargetSplitStream)));
  auto conditioning = c.train;
  // Windows filtered during preprocessing are not filtered a second time.
  if (prefiltered) conditioning.target_filter_enabled = false;
  d.target = dann::condition_target(d.target_raw, conditioning);
  return d;
}

// --- subcommands --------------------------------------------------------------

int cmd_preprocess(const RunConfig& c, const std::vector<std::string>& extra_inputs) {
  std::vector<std::pair<std::string, signal::RawRecording>> recordings;
  auto inputs = c.recordings;
  inputs.insert(inputs.end(), extra_inputs.begin(), extra_inputs.end());
  for (const auto& path : inputs) recordings.emplace_back(path, datasets::load_canonical(path));
  if (!c.corpora.empty()) {
    if (c.root.empty())
      throw ConfigError("data.corpora is set but no corpus root was given (data.root or EARDA_DATA_ROOT)");
    for (const auto& name : c.corpora) {
      const auto corpus = datasets::parse_corpus(name);
      const fs::path dir = fs::path(c.root) / name;
      if (!fs::exists(dir)) throw IoError("corpus directory '" + dir.string() + "' does not exist");
      auto recs = datasets::adapt_public(corpus, dir);
      for (std::size_t i = 0; i < recs.size(); ++i)
        recordings.emplace_back(name + "#" + std::to_string(i), std::move(recs[i]));
    }
  }
  if (recordings.empty())
    throw ConfigError("nothing to preprocess: set data.recordings, data.corpora or pass --input");

  const bool filter = c.preprocess_filter == FilterMode::On ||
                      (c.preprocess_filter == FilterMode::Auto && c.preprocess_domain == DomainTag::Target);
  datasets::PreprocessOptions opts;
  if (filter) opts.filter = c.filter;
  opts.domain = c.preprocess_domain;

  std::vector<LabeledWindow> windows;
  ordered_json per_input = ordered_json::array();
  for (const auto& [name, rec] : recordings) {
    opts.origin = name;
    auto ws = datasets::preprocess_recording(rec, opts);
    per_input.push_back({{"input", name}, {"rate_hz", rec.rate_hz}, {"samples", rec.size()}, {"windows", ws.size()}});
    windows.insert(windows.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
  }
  if (c.preprocess_domain == DomainTag::Source && c.source_per_class > 0)
    windows = datasets::balanced_sample(windows, c.source_per_class, derive_seed(c.seed, kBalanceStream));

  const bool source = c.preprocess_domain == DomainTag::Source;
  const auto path = source ? out_path(c, c.source_windows, "source_windows.bin")
                           : out_path(c, c.target_windows, "target_windows.bin");
  datasets::save_windows(windows, path, {filter});
  const ordered_json manifest = {
      {"format_version", 1},
      {"kind", "preprocess_manifest"},
      {"domain", to_string(c.preprocess_domain)},
      {"seed", c.seed},
      {"window_file", path.filename().string()},
      {"rate_hz", datasets::kModelRateHz},
      {"window_length", datasets::kWindowLength},
      {"filter", filter ? filter_json(c.filter) : ordered_json(nullptr)},
      {"inputs", std::move(per_input)},
      {"windows", counts_json(windows)},
  };
  const auto manifest_path = fs::path(c.out_dir) / (std::string(to_string(c.preprocess_domain)) + "_manifest.json");
  write_json(manifest_path, manifest);
  std::printf("preprocess: %zu %s windows -> %s\n", windows.size(),
              std::string(to_string(c.preprocess_domain)).c_str(), path.string().c_str());
  return kExitOk;
}

int cmd_synth(const RunConfig& c) {
  const auto pack = datasets::synth_generate(c.synth, c.seed);
  const fs::path out(c.out_dir);
  datasets::save_canonical(
      datasets::windows_to_recording(pack.source, c.synth.rate_hz, SensorLocation::Pocket),
      out / "synth_source.csv");
  datasets::save_canonical(
      datasets::windows_to_recording(pack.target, c.synth.rate_hz, SensorLocation::Head),
      out / "synth_target.csv");
  datasets::save_windows(pack.source, out_path(c, c.source_windows, "source_windows.bin"));
  datasets::save_windows(pack.target, out_path(c, c.target_windows, "target_windows.bin"));

  const auto& s = c.synth;
  ordered_json waveforms = ordered_json::object();
  for (auto a : kAllActivities) {
    const auto& w = s.waveforms[static_cast<std::size_t>(to_index(a))];
    waveforms[std::string(to_string(a))] = {{"fundamental_hz", w.fundamental_hz},
                                            {"accel_amplitude", w.accel_amplitude},
                                            {"gyro_baseline", w.gyro_baseline},
                                            {"gyro_amplitude", w.gyro_amplitude}};
  }
  ordered_json interference = ordered_json::object();
  for (auto h : kHeadConditions)
    interference[std::string(to_string(h))] = s.interference_amplitude[static_cast<std::size_t>(to_index(h))];
  const ordered_json manifest = {
      {"format_version", 1},
      {"kind", "synth_manifest"},
      {"seed", c.seed},
      {"generator",
       {{"per_class", s.per_class},
        {"rate_hz", s.rate_hz},
        {"window_length", s.window_length},
        {"waveforms", std::move(waveforms)},
        {"source_amplitude_multiplier", s.source_amplitude_multiplier},
        {"harmonics", s.harmonics},
        {"harmonic_decay", s.harmonic_decay},
        {"noise_sigma", s.noise_sigma},
        {"standing_noise_sigma", s.standing_noise_sigma},
        {"jitter", s.jitter},
        {"band_hz", {s.band_low_hz, s.band_high_hz}},
        {"interference_tones", s.interference_tones},
        {"interference_amplitude", std::move(interference)},
        {"gyro_interference_ratio", s.gyro_interference_ratio},
        {"domain_shift", s.domain_shift}}},
      {"domains", {{"source", counts_json(pack.source)}, {"target", counts_json(pack.target)}}},
  };
  write_json(out / "synth_manifest.json", manifest);
  std::printf("synth: %zu source and %zu target windows -> %s\n", pack.source.size(), pack.target.size(),
              out.string().c_str());
  return kExitOk;
}

int cmd_train(const RunConfig& c) {
  const auto data = load_data(c, true);
  auto result = c.domain_adaptation ? dann::train_dann(data.source, data.target, data.train)
                                    : dann::train_source_only(data.source, data.train);
  const auto ckpt = out_path(c, c.checkpoint, "model.ckpt");
  dann::save_checkpoint(result.model, ckpt);
  write_json(fs::path(c.out_dir) / "train_report.json", dann::to_json(result.report, data.train));

  const auto fmt_acc = [](std::span<const LabeledWindow> ws, const dann::DannModel& m, unsigned t) {
    return ws.empty() ? std::string("n/a") : std::to_string(dann::accuracy(m, ws, t));
  };
  const auto& last = result.report.epochs.back();
  std::printf("train: mode=%s epochs=%zu selected=%zu label_loss=%.6f source_test=%s target_test=%s checkpoint=%s\n",
              c.domain_adaptation ? "dann" : "source_only", result.report.epochs.size(),
              result.report.selected_epoch, last.label_loss,
              fmt_acc(data.source.test, result.model, c.threads).c_str(),
              fmt_acc(data.target.test, result.model, c.threads).c_str(), ckpt.string().c_str());
  return kExitOk;
}

int cmd_eval(const RunConfig& c) {
  const auto model = dann::load_checkpoint(out_path(c, c.checkpoint, "model.ckpt"));
  if (model.architecture().input_dim != static_cast<int>(datasets::kWindowChannels))
    throw CompatibilityError("checkpoint expects " + std::to_string(model.architecture().input_dim) +
                             " input channels, windows have " + std::to_string(datasets::kWindowChannels));
  const auto data = load_data(c, false);
  std::vector<LabeledWindow> windows = data.target.test;
  if (c.eval_split == "all") {
    windows = data.target.train;
    windows.insert(windows.end(), data.target.val.begin(), data.target.val.end());
    windows.insert(windows.end(), data.target.test.begin(), data.target.test.end());
  }
  if (windows.empty()) throw DataError("no target windows to evaluate");
  const auto report = eval::evaluate(model, windows, c.threads);
  auto j = eval::to_json(report);
  j["split"] = c.eval_split;
  j["seed"] = c.seed;
  write_json(fs::path(c.out_dir) / "eval_report.json", j);
  const auto table = eval::format_table(report);
  detail::write_file(fs::path(c.out_dir) / "eval_table.txt", table);
  std::fputs(table.c_str(), stdout);
  return kExitOk;
}

int cmd_ablate(const RunConfig& c) {
  const auto data = load_data(c, true);
  if (c.ablate_mode == "da") {
    const auto cmp = eval::ablate_da(data.source, data.target_raw, data.train);
    write_json(fs::path(c.out_dir) / "ablation_da.json", eval::to_json(cmp, data.train));
    std::printf("ablate da: dann=%.4f source_only=%.4f gap=%+.1f points\n", cmp.dann.overall.accuracy,
                cmp.source_only.overall.accuracy, 100.0 * cmp.accuracy_gap);
  } else {
    const auto cmp = eval::ablate_filter(data.source, data.target_raw, data.train);
    write_json(fs::path(c.out_dir) / "ablation_filter.json", eval::to_json(cmp, data.train));
    std::printf("ablate filter: filtered=%.4f unfiltered=%.4f gain=%+.1f points\n",
                cmp.filtered.overall.accuracy, cmp.unfiltered.overall.accuracy, 100.0 * cmp.accuracy_gain);
  }
  return kExitOk;
}

int cmd_spectrum(const RunConfig& c, const std::vector<std::string>& extra_inputs) {
  const std::string input = extra_inputs.empty() ? c.spectrum_input : extra_inputs.front();
  if (input.empty()) throw ConfigError("spectrum needs an input recording (spectrum.input or --input)");
  const auto rec = datasets::load_canonical(input);
  std::vector<double> series = c.spectrum_channel == "accel"
                                   ? signal::normalize_gravity(signal::magnitude(rec.accel), rec.accel_unit)
                                   : signal::magnitude(rec.gyro);
  if (c.spectrum_start >= series.size())
    throw ConfigError("spectrum.start is beyond the end of the recording");
  const std::size_t available = series.size() - c.spectrum_start;
  const std::size_t length = c.spectrum_length == 0 ? available : c.spectrum_length;
  if (length > available) throw ConfigError("spectrum segment runs past the end of the recording");
  const auto spec = signal::spectrum(std::span<const double>(series).subspan(c.spectrum_start, length), rec.rate_hz);

  std::string csv = "freq_hz,magnitude\n";
  for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
    detail::append_double(csv, spec.freqs[i]);
    csv += ',';
    detail::append_double(csv, spec.magnitudes[i]);
    csv += '\n';
  }
  const auto path = fs::path(c.out_dir) / ("spectrum_" + c.spectrum_channel + ".csv");
  detail::write_file(path, csv);
  std::printf("spectrum: %zu bins -> %s\n", spec.freqs.size(), path.string().c_str());
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const SpecError*>(&e))
    return kExitUsage;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const CompatibilityError*>(&e) ||
      dynamic_cast<const CorruptionError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const DataError*>(&e) || dynamic_cast<const CorpusFormatError*>(&e) ||
      dynamic_cast<const LabelError*>(&e) || dynamic_cast<const UnitError*>(&e) ||
      dynamic_cast<const ShortageError*>(&e))
    return kExitInput;
  return kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Earable activity recognition with adversarial domain adaptation", "earda"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "Run configuration file");
  app.add_option("--seed", o.seed, "Seed for generation, splits and training");
  app.add_flag("--no-da", o.no_da, "Train without the domain classifier");
  app.add_flag("--no-filter", o.no_filter, "Skip the target-domain low-pass filter");
  app.add_option("--mode", o.mode, "Ablation to run")->check(CLI::IsMember({"da", "filter"}));
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--lambda", o.lambda, "Domain loss weight");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--channel", o.channel, "Spectrum channel")->check(CLI::IsMember({"accel", "gyro"}));
  app.add_option("--threads", o.threads, "Worker threads for per-sample work");
  app.add_option("--input", o.inputs, "Canonical recording(s) to read");

  auto* pre = app.add_subcommand("preprocess", "Recordings to window files and a manifest")->fallthrough();
  auto* syn = app.add_subcommand("synth", "Generate a synthetic source/target pack")->fallthrough();
  auto* tr = app.add_subcommand("train", "Train a model and write a checkpoint and report")->fallthrough();
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on target windows")->fallthrough();
  auto* ab = app.add_subcommand("ablate", "Compare with/without adaptation or filtering")->fallthrough();
  auto* sp = app.add_subcommand("spectrum", "Amplitude spectrum of a recording channel")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const auto config = resolve(o);
    if (pre->parsed()) return cmd_preprocess(config, o.inputs);
    if (syn->parsed()) return cmd_synth(config);
    if (tr->parsed()) return cmd_train(config);
    if (ev->parsed()) return cmd_eval(config);
    if (ab->parsed()) return cmd_ablate(config);
    if (sp->parsed()) return cmd_spectrum(config, o.inputs);
  } catch (const Error& e) {
    std::fprintf(stderr, "earda: %s\n", e.what());
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "earda: %s\n", e.what());
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace earda::cli
