#include <charconv>
#include <fstream>
#include <sstream>

#include "earda/datasets.hpp"
#include "earda/errors.hpp"
#include "text_util.hpp"

namespace earda::datasets {

using signal::RawRecording;

RawRecording parse_canonical(std::string_view text, std::string_view source_name) {
  const std::string where(source_name);
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw SchemaError(where + ": empty file, expected a header row");

  const auto header = detail::split(lines[0], ',');
  std::array<std::size_t, kCanonicalColumns.size()> col{};
  for (std::size_t c = 0; c < kCanonicalColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kCanonicalColumns[c]);
    if (it == header.end())
      throw SchemaError(where + ": missing column '" + std::string(kCanonicalColumns[c]) + "'");
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  RawRecording rec;
  std::optional<AccelUnit> unit;
  std::optional<SensorLocation> location;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto fields = detail::split(lines[r], ',');
    const std::string row_where = where + ":" + std::to_string(r + 1);
    if (fields.size() != header.size())
      throw SchemaError(row_where + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    auto num = [&](std::size_t c) { return detail::parse_double(fields[col[c]], row_where); };
    const double t = num(0);
    if (!rec.timestamps.empty() && t < rec.timestamps.back())
      throw DataError(row_where + ": timestamps are not monotonically non-decreasing");
    rec.timestamps.push_back(t);
    rec.accel.x.push_back(num(1));
    rec.accel.y.push_back(num(2));
    rec.accel.z.push_back(num(3));
    rec.gyro.x.push_back(num(4));
    rec.gyro.y.push_back(num(5));
    rec.gyro.z.push_back(num(6));
    rec.activity.push_back(parse_activity(fields[col[7]]));
    rec.head_movement.push_back(parse_head_movement(fields[col[8]]));

    const auto loc = parse_location(fields[col[9]]);
    if (location && *location != loc)
      throw DataError(row_where + ": location changes within one recording");
    location = loc;
    const auto u = parse_accel_unit(fields[col[10]]);
    if (unit && *unit != u) throw DataError(row_where + ": accel_unit changes within one recording");
    unit = u;
  }
  if (rec.timestamps.size() < 2)
    throw DataError(where + ": at least two rows are needed to determine the sampling rate");
  const double span = rec.timestamps.back() - rec.timestamps.front();
  if (!(span > 0.0)) throw DataError(where + ": timestamps do not advance");
  rec.rate_hz = static_cast<double>(rec.timestamps.size() - 1) / span;
  rec.accel_unit = *unit;
  rec.location = *location;
  rec.validate();
  return rec;
}

RawRecording load_canonical(const std::filesystem::path& path) {
  return parse_canonical(detail::read_file(path), path.string());
}

std::string format_canonical(const RawRecording& rec) {
  rec.validate();
  std::string out;
  for (std::size_t c = 0; c < kCanonicalColumns.size(); ++c) {
    if (c) out += ',';
    out += kCanonicalColumns[c];
  }
  out += '\n';
  const auto unit = to_string(rec.accel_unit);
  const auto location = to_string(rec.location);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    for (double v : {rec.timestamps[i], rec.accel.x[i], rec.accel.y[i], rec.accel.z[i],
                     rec.gyro.x[i], rec.gyro.y[i], rec.gyro.z[i]}) {
      detail::append_double(out, v);
      out += ',';
    }
    const auto& act = rec.activity.empty() ? std::nullopt : rec.activity[i];
    out += act ? to_string(*act) : std::string_view("other");
    out += ',';
    out += to_string(rec.head_movement.empty() ? HeadMovement::None : rec.head_movement[i]);
    out += ',';
    out += location;
    out += ',';
    out += unit;
    out += '\n';
  }
  return out;
}

void save_canonical(const RawRecording& rec, const std::filesystem::path& path) {
  detail::write_file(path, format_canonical(rec));
}

}  // namespace earda::datasets
