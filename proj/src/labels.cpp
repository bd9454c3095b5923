#include "earda/labels.hpp"

#include "earda/errors.hpp"

namespace earda {

ActivityLabel activity_from_index(int code) {
  if (code < 0 || code >= kNumActivities)
    throw IndexError("activity code out of range: " + std::to_string(code));
  return static_cast<ActivityLabel>(code);
}

HeadMovement head_movement_from_index(int code) {
  if (code < 0 || code > static_cast<int>(HeadMovement::None))
    throw IndexError("head-movement code out of range: " + std::to_string(code));
  return static_cast<HeadMovement>(code);
}

DomainTag domain_from_index(int code) {
  if (code != 0 && code != 1)
    throw IndexError("domain code out of range: " + std::to_string(code));
  return static_cast<DomainTag>(code);
}

std::string_view to_string(ActivityLabel a) {
  switch (a) {
    case ActivityLabel::Walking: return "walking";
    case ActivityLabel::Upstairs: return "upstairs";
    case ActivityLabel::Standing: return "standing";
    case ActivityLabel::Jogging: return "jogging";
  }
  return "?";
}

std::string_view to_string(HeadMovement h) {
  switch (h) {
    case HeadMovement::Slight: return "slight";
    case HeadMovement::Random: return "random";
    case HeadMovement::Roll: return "roll";
    case HeadMovement::Yaw: return "yaw";
    case HeadMovement::Pitch: return "pitch";
    case HeadMovement::None: return "none";
  }
  return "?";
}

std::string_view to_string(DomainTag d) {
  return d == DomainTag::Source ? "source" : "target";
}

std::string_view to_string(SensorLocation l) {
  switch (l) {
    case SensorLocation::Head: return "head";
    case SensorLocation::Pocket: return "pocket";
    case SensorLocation::Waist: return "waist";
    case SensorLocation::Arm: return "arm";
    case SensorLocation::Belt: return "belt";
    case SensorLocation::Wrist: return "wrist";
  }
  return "?";
}

std::string_view to_string(AccelUnit u) {
  return u == AccelUnit::G ? "g" : "ms2";
}

std::optional<ActivityLabel> parse_activity(std::string_view s) {
  for (auto a : kAllActivities)
    if (s == to_string(a)) return a;
  if (s == "other") return std::nullopt;
  throw LabelError("unknown activity '" + std::string(s) + "'");
}

HeadMovement parse_head_movement(std::string_view s) {
  for (auto h : kAllHeadMovements)
    if (s == to_string(h)) return h;
  throw LabelError("unknown head movement '" + std::string(s) + "'");
}

SensorLocation parse_location(std::string_view s) {
  for (auto l : {SensorLocation::Head, SensorLocation::Pocket, SensorLocation::Waist,
                 SensorLocation::Arm, SensorLocation::Belt, SensorLocation::Wrist})
    if (s == to_string(l)) return l;
  throw LabelError("unknown sensor location '" + std::string(s) + "'");
}

AccelUnit parse_accel_unit(std::string_view s) {
  if (s == "g") return AccelUnit::G;
  if (s == "ms2") return AccelUnit::MetersPerSecond2;
  throw UnitError("unknown acceleration unit '" + std::string(s) + "'");
}

}  // namespace earda
