#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace earda {

inline constexpr int kNumActivities = 4;

// Integer codes are part of the window-file and checkpoint formats.
enum class ActivityLabel : std::uint8_t { Walking = 0, Upstairs = 1, Standing = 2, Jogging = 3 };

// None is reserved for recordings that are not head-worn.
enum class HeadMovement : std::uint8_t { Slight = 0, Random = 1, Roll = 2, Yaw = 3, Pitch = 4, None = 5 };

enum class DomainTag : std::uint8_t { Source = 0, Target = 1 };

enum class SensorLocation : std::uint8_t { Head, Pocket, Waist, Arm, Belt, Wrist };

enum class AccelUnit : std::uint8_t { MetersPerSecond2, G };

inline constexpr std::array<ActivityLabel, 4> kAllActivities = {
    ActivityLabel::Walking, ActivityLabel::Upstairs, ActivityLabel::Standing, ActivityLabel::Jogging};

inline constexpr std::array<HeadMovement, 6> kAllHeadMovements = {
    HeadMovement::Slight, HeadMovement::Random, HeadMovement::Roll,
    HeadMovement::Yaw,    HeadMovement::Pitch,  HeadMovement::None};

// The five annotated conditions of head-worn recordings.
inline constexpr std::array<HeadMovement, 5> kHeadConditions = {
    HeadMovement::Slight, HeadMovement::Random, HeadMovement::Roll, HeadMovement::Yaw,
    HeadMovement::Pitch};

constexpr int to_index(ActivityLabel a) { return static_cast<int>(a); }
constexpr int to_index(HeadMovement h) { return static_cast<int>(h); }
constexpr int to_index(DomainTag d) { return static_cast<int>(d); }

// Throws IndexError for codes outside the enum.
ActivityLabel activity_from_index(int code);
HeadMovement head_movement_from_index(int code);
DomainTag domain_from_index(int code);

std::string_view to_string(ActivityLabel a);
std::string_view to_string(HeadMovement h);
std::string_view to_string(DomainTag d);
std::string_view to_string(SensorLocation l);
std::string_view to_string(AccelUnit u);

// Parsers for the canonical CSV vocabulary. "other" parses to nullopt;
// anything else unknown throws LabelError (activity, head movement,
// location) or UnitError (accel unit).
std::optional<ActivityLabel> parse_activity(std::string_view s);
HeadMovement parse_head_movement(std::string_view s);
SensorLocation parse_location(std::string_view s);
AccelUnit parse_accel_unit(std::string_view s);

}  // namespace earda
