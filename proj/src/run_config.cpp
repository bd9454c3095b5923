#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "earda/cli.hpp"
#include "earda/errors.hpp"
#include "text_util.hpp"

namespace earda::cli {

namespace {

std::string fmt(double v) {
  std::string s;
  detail::append_double(s, v);
  return s;
}

double to_double(std::string_view v, const std::string& where) {
  try {
    return detail::parse_double(v, where);
  } catch (const DataError&) {
    throw ConfigError(where + ": expected a number, got '" + std::string(v) + "'");
  }
}

std::uint64_t to_u64(std::string_view v, const std::string& where) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(where + ": expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view v, const std::string& where) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(where + ": expected true or false, got '" + std::string(v) + "'");
}

std::string fmt(bool v) { return v ? "true" : "false"; }

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  if (detail::trim(v).empty()) return out;
  for (auto item : detail::split(v, ',')) out.emplace_back(item);
  return out;
}

std::string fmt_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

template <std::size_t N>
std::array<double, N> to_doubles(std::string_view v, const std::string& where) {
  const auto parts = detail::split(v, ',');
  if (parts.size() != N)
    throw ConfigError(where + ": expected " + std::to_string(N) + " comma-separated numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = to_double(parts[i], where);
  return out;
}

template <std::size_t N>
std::string fmt_doubles(const std::array<double, N>& a) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ", ";
    out += fmt(a[i]);
  }
  return out;
}

std::string_view to_string(FilterMode m) {
  switch (m) {
    case FilterMode::Auto: return "auto";
    case FilterMode::On: return "on";
    case FilterMode::Off: return "off";
  }
  return "auto";
}

struct Field {
  std::string_view section;
  std::string_view key;
  std::function<void(RunConfig&, std::string_view, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define EARDA_DOUBLE(sec, name, member)                                                        \
  Field {                                                                                     \
    sec, name, [](RunConfig& c, std::string_view v, const std::string& w) {                   \
      c.member = to_double(v, w);                                                             \
    },                                                                                        \
        [](const RunConfig& c) { return fmt(static_cast<double>(c.member)); }                 \
  }
#define EARDA_COUNT(sec, name, member)                                                         \
  Field {                                                                                     \
    sec, name, [](RunConfig& c, std::string_view v, const std::string& w) {                   \
      c.member = static_cast<decltype(c.member)>(to_u64(v, w));                               \
    },                                                                                        \
        [](const RunConfig& c) { return std::to_string(c.member); }                           \
  }
#define EARDA_BOOL(sec, name, member)                                                          \
  Field {                                                                                     \
    sec, name, [](RunConfig& c, std::string_view v, const std::string& w) {                   \
      c.member = to_bool(v, w);                                                               \
    },                                                                                        \
        [](const RunConfig& c) { return fmt(static_cast<bool>(c.member)); }                   \
  }
#define EARDA_STRING(sec, name, member)                                                        \
  Field {                                                                                     \
    sec, name, [](RunConfig& c, std::string_view v, const std::string&) {                     \
      c.member = std::string(v);                                                              \
    },                                                                                        \
        [](const RunConfig& c) { return c.member; }                                           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        EARDA_COUNT("run", "seed", seed),
        EARDA_STRING("run", "out", out_dir),
        EARDA_COUNT("run", "threads", threads),

        EARDA_STRING("data", "root", root),
        {"data", "corpora",
         [](RunConfig& c, std::string_view v, const std::string&) {
           c.corpora = to_list(v);
           for (auto& name : c.corpora) name = std::string(datasets::to_string(datasets::parse_corpus(name)));
         },
         [](const RunConfig& c) { return fmt_list(c.corpora); }},
        {"data", "recordings",
         [](RunConfig& c, std::string_view v, const std::string&) { c.recordings = to_list(v); },
         [](const RunConfig& c) { return fmt_list(c.recordings); }},
        EARDA_STRING("data", "source_windows", source_windows),
        EARDA_STRING("data", "target_windows", target_windows),
        EARDA_COUNT("data", "source_per_class", source_per_class),
        {"data", "source_split",
         [](RunConfig& c, std::string_view v, const std::string& w) { c.source_split = to_doubles<3>(v, w); },
         [](const RunConfig& c) { return fmt_doubles(c.source_split); }},
        {"data", "target_split",
         [](RunConfig& c, std::string_view v, const std::string& w) { c.target_split = to_doubles<3>(v, w); },
         [](const RunConfig& c) { return fmt_doubles(c.target_split); }},

        EARDA_DOUBLE("filter", "cutoff_hz", filter.cutoff_hz),
        EARDA_COUNT("filter", "order", filter.order),
        EARDA_BOOL("filter", "zero_phase", filter.zero_phase),

        {"preprocess", "domain",
         [](RunConfig& c, std::string_view v, const std::string& w) {
           if (v == "source") c.preprocess_domain = DomainTag::Source;
           else if (v == "target") c.preprocess_domain = DomainTag::Target;
           else throw ConfigError(w + ": expected source or target, got '" + std::string(v) + "'");
         },
         [](const RunConfig& c) { return std::string(earda::to_string(c.preprocess_domain)); }},
        {"preprocess", "filter",
         [](RunConfig& c, std::string_view v, const std::string& w) {
           if (v == "auto") c.preprocess_filter = FilterMode::Auto;
           else if (v == "on") c.preprocess_filter = FilterMode::On;
           else if (v == "off") c.preprocess_filter = FilterMode::Off;
           else throw ConfigError(w + ": expected auto, on or off, got '" + std::string(v) + "'");
         },
         [](const RunConfig& c) { return std::string(to_string(c.preprocess_filter)); }},

        EARDA_DOUBLE("train", "lambda", train.lambda),
        EARDA_COUNT("train", "batch_size", train.batch_size),
        EARDA_COUNT("train", "epochs", train.epochs),
        EARDA_DOUBLE("train", "learning_rate", train.learning_rate),
        EARDA_DOUBLE("train", "clip_norm", train.clip_norm),
        EARDA_BOOL("train", "target_filter", train.target_filter_enabled),
        {"train", "selection",
         [](RunConfig& c, std::string_view v, const std::string&) { c.train.selection = dann::parse_selection(v); },
         [](const RunConfig& c) { return std::string(dann::to_string(c.train.selection)); }},
        EARDA_BOOL("train", "target_labels", train.target_labels),
        EARDA_BOOL("train", "domain_adaptation", domain_adaptation),
        EARDA_COUNT("train", "hidden", train.arch.hidden),
        EARDA_COUNT("train", "layers", train.arch.layers),
        EARDA_COUNT("train", "head_width", train.arch.head_width),
        EARDA_STRING("train", "checkpoint", checkpoint),

        EARDA_STRING("eval", "split", eval_split),

        EARDA_STRING("ablate", "mode", ablate_mode),

        EARDA_COUNT("synth", "per_class", synth.per_class),
        EARDA_DOUBLE("synth", "source_amplitude_multiplier", synth.source_amplitude_multiplier),
        EARDA_COUNT("synth", "harmonics", synth.harmonics),
        EARDA_DOUBLE("synth", "harmonic_decay", synth.harmonic_decay),
        EARDA_DOUBLE("synth", "noise_sigma", synth.noise_sigma),
        EARDA_DOUBLE("synth", "standing_noise_sigma", synth.standing_noise_sigma),
        EARDA_DOUBLE("synth", "jitter", synth.jitter),
        EARDA_DOUBLE("synth", "band_low_hz", synth.band_low_hz),
        EARDA_DOUBLE("synth", "band_high_hz", synth.band_high_hz),
        EARDA_COUNT("synth", "interference_tones", synth.interference_tones),
        {"synth", "interference_amplitude",
         [](RunConfig& c, std::string_view v, const std::string& w) {
           const auto a = to_doubles<5>(v, w);
           for (std::size_t i = 0; i < a.size(); ++i) c.synth.interference_amplitude[i] = a[i];
         },
         [](const RunConfig& c) {
           std::array<double, 5> a{};
           for (std::size_t i = 0; i < a.size(); ++i) a[i] = c.synth.interference_amplitude[i];
           return fmt_doubles(a);
         }},
        EARDA_DOUBLE("synth", "gyro_interference_ratio", synth.gyro_interference_ratio),
        EARDA_BOOL("synth", "domain_shift", synth.domain_shift),

        EARDA_STRING("spectrum", "input", spectrum_input),
        EARDA_STRING("spectrum", "channel", spectrum_channel),
        EARDA_COUNT("spectrum", "start", spectrum_start),
        EARDA_COUNT("spectrum", "length", spectrum_length),
    };
    return f;
  }();
  return table;
}

#undef EARDA_DOUBLE
#undef EARDA_COUNT
#undef EARDA_BOOL
#undef EARDA_STRING

}  // namespace

void RunConfig::validate() const {
  auto check_split = [](const std::array<double, 3>& s, const char* name) {
    datasets::SplitSpec spec{s[0], s[1], s[2], 0};
    try {
      spec.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string(name) + ": " + e.what());
    }
  };
  check_split(source_split, "data.source_split");
  check_split(target_split, "data.target_split");
  try {
    train.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  try {
    filter.validate(datasets::kModelRateHz);
  } catch (const SpecError& e) {
    throw ConfigError(std::string("filter: ") + e.what());
  }
  synth.validate();
  if (threads < 1) throw ConfigError("run.threads must be at least 1");
  if (eval_split != "test" && eval_split != "all")
    throw ConfigError("eval.split must be test or all, got '" + eval_split + "'");
  if (ablate_mode != "da" && ablate_mode != "filter")
    throw ConfigError("ablate.mode must be da or filter, got '" + ablate_mode + "'");
  if (spectrum_channel != "accel" && spectrum_channel != "gyro")
    throw ConfigError("spectrum.channel must be accel or gyro, got '" + spectrum_channel + "'");
}

RunConfig parse_config(std::string_view text, std::string_view source_name) {
  RunConfig config;
  config.train.target_filter = config.filter;
  std::map<std::pair<std::string_view, std::string_view>, const Field*> index;
  std::set<std::string_view> sections;
  for (const auto& f : fields()) {
    index[{f.section, f.key}] = &f;
    sections.insert(f.section);
  }

  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::size_t line_no = 0;
  for (auto raw : detail::split_lines(text)) {
    ++line_no;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (!sections.contains(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const auto key = std::string(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
    const auto it = index.find({section, key});
    if (it == index.end()) throw ConfigError(where + ": unknown key '" + section + "." + key + "'");
    if (!seen.insert({section, key}).second)
      throw ConfigError(where + ": duplicate key '" + section + "." + key + "'");
    it->second->set(config, value, where + " (" + section + "." + key + ")");
  }
  config.train.target_filter = config.filter;
  config.train.seed = config.seed;
  config.train.threads = config.threads;
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  return parse_config(detail::read_file(path), path);
}

std::string format_config(const RunConfig& config) {
  std::string out;
  std::string_view section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + std::string(section) + "]\n";
    }
    const auto value = f.get(config);
    out += std::string(f.key) + " =";
    if (!value.empty()) out += " " + value;
    out += '\n';
  }
  return out;
}

}  // namespace earda::cli
