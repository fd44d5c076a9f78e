#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace wheelflat {

enum class Bogie { Front, Rear };
enum class Wheelset { Front, Rear };
enum class Side { Left, Right };

/// Location of a wheel (and its axle-box accelerometer) on the vehicle.
/// Only the front bogie is measured, so every channel index maps to one of
/// the four front-bogie wheels.
struct WheelPosition {
  Bogie bogie = Bogie::Front;
  Wheelset wheelset = Wheelset::Front;
  Side side = Side::Left;

  friend bool operator==(const WheelPosition&, const WheelPosition&) = default;
};

inline constexpr std::size_t kChannelCount = 4;

/// Fixed channel order used by records, features and labels: FL, FR, RL, RR.
inline constexpr std::array<WheelPosition, kChannelCount> kChannelOrder = {{
    {Bogie::Front, Wheelset::Front, Side::Left},
    {Bogie::Front, Wheelset::Front, Side::Right},
    {Bogie::Front, Wheelset::Rear, Side::Left},
    {Bogie::Front, Wheelset::Rear, Side::Right},
}};

inline constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "FL", "FR", "RL", "RR"};

/// Index into kChannelOrder. Throws std::invalid_argument for rear-bogie
/// positions.
std::size_t channel_index(const WheelPosition& position);

WheelPosition position_from_channel(std::size_t channel);

std::string_view position_name(const WheelPosition& position);

/// Accepts "FL", "fl", "FR", ... Throws std::invalid_argument otherwise.
WheelPosition parse_position(std::string_view name);

}  // namespace wheelflat
