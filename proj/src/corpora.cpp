// Adapters from the published layouts of the four public smartphone corpora
// to RawRecording.

#include <algorithm>
#include <iostream>
#include <map>
#include <numeric>

#include "earda/datasets.hpp"
#include "earda/errors.hpp"
#include "text_util.hpp"

namespace fs = std::filesystem;

namespace earda::datasets {

using signal::RawRecording;

namespace {

std::vector<std::optional<ActivityLabel>> repeat_label(std::optional<ActivityLabel> a,
                                                       std::size_t n) {
  return std::vector<std::optional<ActivityLabel>>(n, a);
}

void set_uniform_timestamps(RawRecording& rec, double rate_hz) {
  rec.rate_hz = rate_hz;
  rec.timestamps.resize(rec.accel.size());
  for (std::size_t i = 0; i < rec.timestamps.size(); ++i)
    rec.timestamps[i] = static_cast<double>(i) / rate_hz;
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Column lookup by header name, failing with a corpus-format error.
std::size_t column(const std::vector<std::string_view>& header, std::string_view name,
                   const std::string& where) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw CorpusFormatError(where + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

// MotionSense: A_DeviceMotion_data/<act>_<trial>/sub_<n>.csv, values in g
// (gravity + userAcceleration) and rad/s.
std::vector<RawRecording> load_motionsense(const fs::path& root) {
  fs::path base = root / "A_DeviceMotion_data";
  if (!fs::is_directory(base)) base = root;
  std::vector<RawRecording> out;
  for (const auto& trial : sorted_entries(base)) {
    if (!fs::is_directory(trial)) continue;
    const auto trial_name = trial.filename().string();
    const auto code = trial_name.substr(0, trial_name.find('_'));
    const auto activity = harmonize_label(code);
    for (const auto& file : sorted_entries(trial)) {
      if (file.extension() != ".csv") continue;
      const auto text = detail::read_file(file);
      const auto lines = detail::split_lines(text);
      if (lines.empty()) continue;
      const auto header = detail::split(lines[0], ',');
      const auto where = file.string();
      const std::size_t gx = column(header, "gravity.x", where);
      const std::size_t rx = column(header, "rotationRate.x", where);
      const std::size_t ux = column(header, "userAcceleration.x", where);
      const std::size_t gy = column(header, "gravity.y", where);
      const std::size_t gz = column(header, "gravity.z", where);
      const std::size_t ry = column(header, "rotationRate.y", where);
      const std::size_t rz = column(header, "rotationRate.z", where);
      const std::size_t uy = column(header, "userAcceleration.y", where);
      const std::size_t uz = column(header, "userAcceleration.z", where);
      RawRecording rec;
      rec.accel_unit = AccelUnit::G;
      rec.location = SensorLocation::Pocket;
      for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto f = detail::split(lines[r], ',');
        if (f.size() != header.size())
          throw CorpusFormatError(where + ": ragged row " + std::to_string(r + 1));
        auto v = [&](std::size_t c) { return detail::parse_double(f[c], where); };
        rec.accel.x.push_back(v(gx) + v(ux));
        rec.accel.y.push_back(v(gy) + v(uy));
        rec.accel.z.push_back(v(gz) + v(uz));
        rec.gyro.x.push_back(v(rx));
        rec.gyro.y.push_back(v(ry));
        rec.gyro.z.push_back(v(rz));
      }
      set_uniform_timestamps(rec, native_rate_hz(Corpus::MotionSense));
      rec.activity = repeat_label(activity, rec.size());
      out.push_back(std::move(rec));
    }
  }
  return out;
}

struct HharRow {
  double t;
  double x, y, z;
  std::string gt;
};

using HharStreams = std::map<std::pair<std::string, std::string>, std::vector<HharRow>>;

HharStreams read_hhar(const fs::path& file) {
  const auto text = detail::read_file(file);
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw CorpusFormatError(file.string() + ": empty");
  const auto header = detail::split(lines[0], ',');
  const auto where = file.string();
  const std::size_t ct = column(header, "Creation_Time", where);
  const std::size_t cx = column(header, "x", where);
  const std::size_t cy = column(header, "y", where);
  const std::size_t cz = column(header, "z", where);
  const std::size_t cu = column(header, "User", where);
  const std::size_t cd = column(header, "Device", where);
  const std::size_t cg = column(header, "gt", where);
  HharStreams streams;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto f = detail::split(lines[r], ',');
    if (f.size() != header.size())
      throw CorpusFormatError(where + ": ragged row " + std::to_string(r + 1));
    HharRow row{detail::parse_double(f[ct], where) * 1e-9, detail::parse_double(f[cx], where),
                detail::parse_double(f[cy], where), detail::parse_double(f[cz], where),
                std::string(f[cg])};
    streams[{std::string(f[cu]), std::string(f[cd])}].push_back(std::move(row));
  }
  for (auto& [key, rows] : streams)
    std::stable_sort(rows.begin(), rows.end(),
                     [](const HharRow& a, const HharRow& b) { return a.t < b.t; });
  return streams;
}

double interpolate_at(const std::vector<HharRow>& rows, double t, double HharRow::*axis,
                      std::size_t& cursor) {
  while (cursor + 1 < rows.size() && rows[cursor + 1].t <= t) ++cursor;
  if (t <= rows.front().t) return rows.front().*axis;
  if (cursor + 1 >= rows.size()) return rows.back().*axis;
  const auto& a = rows[cursor];
  const auto& b = rows[cursor + 1];
  const double dt = b.t - a.t;
  const double u = dt > 0.0 ? (t - a.t) / dt : 0.0;
  return a.*axis + u * (b.*axis - a.*axis);
}

// HHAR: Phones_accelerometer.csv + Phones_gyroscope.csv, one stream per
// (User, Device); gyro is interpolated onto the accelerometer timestamps.
std::vector<RawRecording> load_hhar(const fs::path& root) {
  const auto acc_path = root / "Phones_accelerometer.csv";
  const auto gyr_path = root / "Phones_gyroscope.csv";
  if (!fs::exists(acc_path) || !fs::exists(gyr_path))
    throw CorpusFormatError(root.string() +
                            ": expected Phones_accelerometer.csv and Phones_gyroscope.csv");
  const auto acc = read_hhar(acc_path);
  const auto gyr = read_hhar(gyr_path);
  std::vector<RawRecording> out;
  for (const auto& [key, rows] : acc) {
    auto g = gyr.find(key);
    if (g == gyr.end() || rows.size() < 2) continue;
    RawRecording rec;
    rec.accel_unit = AccelUnit::MetersPerSecond2;
    rec.location = SensorLocation::Waist;
    std::size_t cursor = 0;
    for (const auto& r : rows) {
      rec.timestamps.push_back(r.t);
      rec.accel.x.push_back(r.x);
      rec.accel.y.push_back(r.y);
      rec.accel.z.push_back(r.z);
      const std::size_t saved = cursor;
      rec.gyro.x.push_back(interpolate_at(g->second, r.t, &HharRow::x, cursor));
      cursor = saved;
      rec.gyro.y.push_back(interpolate_at(g->second, r.t, &HharRow::y, cursor));
      cursor = saved;
      rec.gyro.z.push_back(interpolate_at(g->second, r.t, &HharRow::z, cursor));
      rec.activity.push_back(harmonize_label(r.gt));
    }
    const double span = rec.timestamps.back() - rec.timestamps.front();
    if (!(span > 0.0)) continue;
    rec.rate_hz = static_cast<double>(rec.size() - 1) / span;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::vector<double>> read_matrix(const fs::path& file) {
  const auto text = detail::read_file(file);
  std::vector<std::vector<double>> rows;
  for (auto line : detail::split_lines(text)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      const auto end = std::min(line.find(' ', pos), line.size());
      if (end > pos) row.push_back(detail::parse_double(line.substr(pos, end - pos), file.string()));
      pos = end;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// UCI HAR: fixed 128-sample windows with 50% overlap; the stream of each
// subject is rebuilt from the first half of every window.
std::vector<RawRecording> load_ucihar(const fs::path& root) {
  fs::path base = root / "UCI HAR Dataset";
  if (!fs::is_directory(base)) base = root;
  static const char* const kActivityNames[] = {"walking",  "walking upstairs", "walking downstairs",
                                               "sitting",  "standing",         "laying"};
  std::vector<RawRecording> out;
  bool any = false;
  for (const std::string part : {"train", "test"}) {
    const auto dir = base / part;
    const auto signals = dir / "Inertial Signals";
    if (!fs::is_directory(signals)) continue;
    any = true;
    auto load = [&](const std::string& name) {
      return read_matrix(signals / (name + "_" + part + ".txt"));
    };
    const auto ax = load("total_acc_x"), ay = load("total_acc_y"), az = load("total_acc_z");
    const auto gx = load("body_gyro_x"), gy = load("body_gyro_y"), gz = load("body_gyro_z");
    const auto labels = read_matrix(dir / ("y_" + part + ".txt"));
    const auto subjects = read_matrix(dir / ("subject_" + part + ".txt"));
    const std::size_t n = ax.size();
    for (const auto* m : {&ay, &az, &gx, &gy, &gz, &labels, &subjects})
      if (m->size() != n) throw CorpusFormatError(signals.string() + ": row counts differ");

    std::map<int, RawRecording> per_subject;
    for (std::size_t w = 0; w < n; ++w) {
      const int subject = static_cast<int>(subjects[w].at(0));
      const int code = static_cast<int>(labels[w].at(0));
      if (code < 1 || code > 6) throw CorpusFormatError("unknown UCI HAR activity code");
      auto& rec = per_subject[subject];
      const auto activity = harmonize_label(kActivityNames[code - 1]);
      const std::size_t half = ax[w].size() / 2;
      for (std::size_t i = 0; i < half; ++i) {
        rec.accel.x.push_back(ax[w].at(i));
        rec.accel.y.push_back(ay[w].at(i));
        rec.accel.z.push_back(az[w].at(i));
        rec.gyro.x.push_back(gx[w].at(i));
        rec.gyro.y.push_back(gy[w].at(i));
        rec.gyro.z.push_back(gz[w].at(i));
        rec.activity.push_back(activity);
      }
    }
    for (auto& [subject, rec] : per_subject) {
      rec.accel_unit = AccelUnit::G;
      rec.location = SensorLocation::Waist;
      set_uniform_timestamps(rec, native_rate_hz(Corpus::UCIHAR));
      out.push_back(std::move(rec));
    }
  }
  if (!any) throw CorpusFormatError(base.string() + ": no train/ or test/ Inertial Signals");
  return out;
}

SensorLocation shoaib_location(std::string_view position) {
  const auto p = detail::lower(position);
  if (p.find("pocket") != std::string::npos) return SensorLocation::Pocket;
  if (p.find("wrist") != std::string::npos) return SensorLocation::Wrist;
  if (p.find("arm") != std::string::npos) return SensorLocation::Arm;
  if (p.find("belt") != std::string::npos) return SensorLocation::Belt;
  throw CorpusFormatError("unknown body position '" + std::string(position) + "'");
}

// Shoaib: Participant_<n>.csv with a position row, a column-name row, one
// block (time_stamp, Ax..Az, Lx..Lz, Gx..Gz, Mx..Mz) per body position and
// the activity in the last column. m/s^2 and rad/s.
std::vector<RawRecording> load_shoaib(const fs::path& root) {
  std::vector<RawRecording> out;
  for (const auto& file : sorted_entries(root)) {
    const auto name = file.filename().string();
    if (file.extension() != ".csv" || name.rfind("Participant", 0) != 0) continue;
    const auto text = detail::read_file(file);
    const auto lines = detail::split_lines(text);
    const auto where = file.string();
    if (lines.size() < 3) throw CorpusFormatError(where + ": too few rows");
    const auto positions = detail::split(lines[0], ',');
    const auto header = detail::split(lines[1], ',');

    struct Block {
      std::size_t ax, gx;
      SensorLocation location;
    };
    std::vector<Block> blocks;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] != "Ax") continue;
      std::size_t g = c;
      while (g < header.size() && header[g] != "Gx") ++g;
      if (g + 2 >= header.size()) throw CorpusFormatError(where + ": block without Gx..Gz");
      std::string_view pos_name;
      for (std::size_t p = std::min(c, positions.size() - 1) + 1; p-- > 0;)
        if (!positions[p].empty()) {
          pos_name = positions[p];
          break;
        }
      blocks.push_back({c, g, shoaib_location(pos_name)});
    }
    if (blocks.empty()) throw CorpusFormatError(where + ": no sensor blocks found");

    std::vector<RawRecording> recs(blocks.size());
    for (std::size_t r = 2; r < lines.size(); ++r) {
      if (detail::trim(lines[r]).empty()) continue;
      auto f = detail::split(lines[r], ',');
      while (!f.empty() && f.back().empty()) f.pop_back();
      if (f.empty()) continue;
      const auto activity = harmonize_label(f.back());
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        if (blk.gx + 2 >= f.size()) throw CorpusFormatError(where + ": short row");
        auto v = [&](std::size_t c) { return detail::parse_double(f[c], where); };
        recs[b].accel.x.push_back(v(blk.ax));
        recs[b].accel.y.push_back(v(blk.ax + 1));
        recs[b].accel.z.push_back(v(blk.ax + 2));
        recs[b].gyro.x.push_back(v(blk.gx));
        recs[b].gyro.y.push_back(v(blk.gx + 1));
        recs[b].gyro.z.push_back(v(blk.gx + 2));
        recs[b].activity.push_back(activity);
      }
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      recs[b].accel_unit = AccelUnit::MetersPerSecond2;
      recs[b].location = blocks[b].location;
      set_uniform_timestamps(recs[b], native_rate_hz(Corpus::Shoaib));
      out.push_back(std::move(recs[b]));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Corpus c) {
  switch (c) {
    case Corpus::MotionSense: return "motionsense";
    case Corpus::HHAR: return "hhar";
    case Corpus::UCIHAR: return "ucihar";
    case Corpus::Shoaib: return "shoaib";
  }
  return "?";
}

Corpus parse_corpus(std::string_view s) {
  const auto l = detail::lower(s);
  for (auto c : {Corpus::MotionSense, Corpus::HHAR, Corpus::UCIHAR, Corpus::Shoaib})
    if (l == to_string(c)) return c;
  throw ConfigError("unknown corpus '" + std::string(s) + "'");
}

double native_rate_hz(Corpus c) {
  switch (c) {
    case Corpus::MotionSense:
    case Corpus::UCIHAR:
    case Corpus::Shoaib:
      return 50.0;
    case Corpus::HHAR:
      return 0.0;  // per device, 50-200 Hz; derived from timestamps
  }
  return 0.0;
}

std::vector<RawRecording> adapt_public(Corpus corpus, const fs::path& root) {
  if (!fs::is_directory(root))
    throw CorpusFormatError("corpus root '" + root.string() + "' is not a directory");
  std::vector<RawRecording> recs;
  switch (corpus) {
    case Corpus::MotionSense: recs = load_motionsense(root); break;
    case Corpus::HHAR: recs = load_hhar(root); break;
    case Corpus::UCIHAR: recs = load_ucihar(root); break;
    case Corpus::Shoaib: recs = load_shoaib(root); break;
  }
  if (recs.empty())
    throw CorpusFormatError("no " + std::string(to_string(corpus)) + " recordings found under '" +
                            root.string() + "'");
  for (const auto& r : recs) r.validate();
  return recs;
}

std::optional<ActivityLabel> harmonize_label(std::string_view source_label) {
  auto s = detail::lower(detail::trim(source_label));
  std::replace(s.begin(), s.end(), '_', ' ');
  std::replace(s.begin(), s.end(), '-', ' ');

  static const std::map<std::string, std::optional<ActivityLabel>, std::less<>> kTable = {
      {"walking", ActivityLabel::Walking},
      {"walk", ActivityLabel::Walking},
      {"wlk", ActivityLabel::Walking},
      {"upstairs", ActivityLabel::Upstairs},
      {"walking upstairs", ActivityLabel::Upstairs},
      {"stairsup", ActivityLabel::Upstairs},
      {"ups", ActivityLabel::Upstairs},
      {"standing", ActivityLabel::Standing},
      {"stand", ActivityLabel::Standing},
      {"std", ActivityLabel::Standing},
      {"jogging", ActivityLabel::Jogging},
      {"jog", ActivityLabel::Jogging},
      // Known activities outside the four in scope.
      {"downstairs", std::nullopt},
      {"walking downstairs", std::nullopt},
      {"stairsdown", std::nullopt},
      {"dws", std::nullopt},
      {"sitting", std::nullopt},
      {"sit", std::nullopt},
      {"biking", std::nullopt},
      {"bike", std::nullopt},
      {"lying", std::nullopt},
      {"laying", std::nullopt},
      {"null", std::nullopt},
      {"other", std::nullopt},
  };
  if (auto it = kTable.find(s); it != kTable.end()) return it->second;
  std::cerr << "warning: unrecognized activity label '" << source_label << "' dropped\n";
  return std::nullopt;
}

}  // namespace earda::datasets
