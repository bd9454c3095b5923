// Window file layout (little-endian):
//   "EARDAWIN" | u32 version | u8 filtered | u64 count | u32 rows | u32 cols
//   | count*rows*cols f64 (row-major per window)
//   | count u8 labels | count u8 domains | count u8 heads
//   | count length-prefixed origin strings

#include "binary_io.hpp"
#include "earda/datasets.hpp"
#include "text_util.hpp"

namespace earda::datasets {

namespace {
constexpr std::string_view kMagic = "EARDAWIN";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_windows(std::span<const LabeledWindow> windows, const std::filesystem::path& path,
                  WindowFileInfo info) {
  detail::BinaryWriter w;
  w.put_bytes(kMagic);
  w.put(kVersion);
  w.put(static_cast<std::uint8_t>(info.filtered ? 1 : 0));
  w.put(static_cast<std::uint64_t>(windows.size()));
  w.put(static_cast<std::uint32_t>(kWindowLength));
  w.put(static_cast<std::uint32_t>(kWindowChannels));
  for (const auto& win : windows) {
    validate(win);
    for (Eigen::Index r = 0; r < win.data.rows(); ++r)
      for (Eigen::Index c = 0; c < win.data.cols(); ++c) w.put(win.data(r, c));
  }
  for (const auto& win : windows) w.put(static_cast<std::uint8_t>(to_index(win.label)));
  for (const auto& win : windows) w.put(static_cast<std::uint8_t>(to_index(win.domain)));
  for (const auto& win : windows) w.put(static_cast<std::uint8_t>(to_index(win.head)));
  for (const auto& win : windows) w.put_string(win.origin);
  detail::write_file(path, w.bytes());
}

std::vector<LabeledWindow> load_windows(const std::filesystem::path& path, WindowFileInfo* info) {
  const auto bytes = detail::read_file(path);
  detail::BinaryReader r(bytes, path.string());
  if (r.get_bytes(kMagic.size()) != kMagic)
    throw CorruptionError(path.string() + ": not a window file");
  if (const auto v = r.get<std::uint32_t>(); v != kVersion)
    throw CompatibilityError(path.string() + ": window file version " + std::to_string(v) +
                             ", expected " + std::to_string(kVersion));
  const bool filtered = r.get<std::uint8_t>() != 0;
  const auto count = r.get<std::uint64_t>();
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  if (rows != kWindowLength || cols != kWindowChannels)
    throw CompatibilityError(path.string() + ": unexpected window shape");
  if (count > r.remaining() / (sizeof(double) * rows * cols))
    throw CorruptionError(path.string() + ": truncated");

  std::vector<LabeledWindow> out(count);
  for (auto& win : out) {
    win.data.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index c = 0; c < cols; ++c) win.data(i, c) = r.get<double>();
  }
  try {
    for (auto& win : out) win.label = activity_from_index(r.get<std::uint8_t>());
    for (auto& win : out) win.domain = domain_from_index(r.get<std::uint8_t>());
    for (auto& win : out) win.head = head_movement_from_index(r.get<std::uint8_t>());
  } catch (const IndexError& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  }
  for (auto& win : out) win.origin = r.get_string();
  if (r.remaining() != 0) throw CorruptionError(path.string() + ": trailing bytes");
  for (const auto& win : out) validate(win);
  if (info) info->filtered = filtered;
  return out;
}

}  // namespace earda::datasets
