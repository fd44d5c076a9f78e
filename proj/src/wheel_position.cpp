#include "wheelflat/wheel_position.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace wheelflat {

std::size_t channel_index(const WheelPosition& position) {
  if (position.bogie != Bogie::Front) {
    throw std::invalid_argument("only front-bogie wheels carry a channel");
  }
  const std::size_t wheelset = position.wheelset == Wheelset::Front ? 0 : 1;
  const std::size_t side = position.side == Side::Left ? 0 : 1;
  return 2 * wheelset + side;
}

WheelPosition position_from_channel(std::size_t channel) {
  if (channel >= kChannelCount) {
    throw std::out_of_range("channel index " + std::to_string(channel) +
                            " out of range");
  }
  return kChannelOrder[channel];
}

std::string_view position_name(const WheelPosition& position) {
  return kChannelNames[channel_index(position)];
}

WheelPosition parse_position(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(c));
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (upper == kChannelNames[i]) return kChannelOrder[i];
  }
  throw std::invalid_argument("unknown wheel position '" + std::string(name) +
                              "'");
}

}  // namespace wheelflat
