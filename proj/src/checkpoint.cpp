// Checkpoint layout (little-endian):
//   "EARDACKP" | u32 version | u32 input_dim | u32 hidden | u32 layers
//   | u32 head_width | u32 label_classes | u32 domain_classes
//   | f64 lambda | u64 seed | u8 has_domain_head | u32 tensor_count
//   | per tensor: name | u32 rows | u32 cols | rows*cols f64 row-major

#include <cmath>

#include "binary_io.hpp"
#include "earda/dann.hpp"
#include "earda/errors.hpp"
#include "text_util.hpp"

namespace earda::dann {

namespace {
constexpr std::string_view kMagic = "EARDACKP";
}

std::string serialize_checkpoint(const DannModel& model) {
  model.validate();
  const auto arch = model.architecture();
  detail::BinaryWriter w;
  w.put_bytes(kMagic);
  w.put(kCheckpointVersion);
  for (int v : {arch.input_dim, arch.hidden, arch.layers, arch.head_width, arch.label_classes,
                arch.domain_classes})
    w.put(static_cast<std::uint32_t>(v));
  w.put(model.lambda);
  w.put(model.seed);
  w.put(static_cast<std::uint8_t>(model.has_domain_head ? 1 : 0));

  std::uint32_t count = 0;
  nn::for_each_tensor([&](const std::string&, const auto&) { ++count; }, model.params);
  w.put(count);
  nn::for_each_tensor(
      [&](const std::string& name, const auto& t) {
        w.put_string(name);
        w.put(static_cast<std::uint32_t>(t.rows()));
        w.put(static_cast<std::uint32_t>(t.cols()));
        for (Eigen::Index r = 0; r < t.rows(); ++r)
          for (Eigen::Index c = 0; c < t.cols(); ++c) w.put(static_cast<double>(t(r, c)));
      },
      model.params);
  return w.bytes();
}

DannModel deserialize_checkpoint(std::string_view bytes, const std::string& what) {
  detail::BinaryReader r(bytes, what);
  if (r.get_bytes(kMagic.size()) != kMagic)
    throw CompatibilityError(what + ": not a checkpoint file");
  if (const auto v = r.get<std::uint32_t>(); v != kCheckpointVersion)
    throw CompatibilityError(what + ": checkpoint version " + std::to_string(v) + ", expected " +
                             std::to_string(kCheckpointVersion));
  nn::Architecture arch;
  arch.input_dim = static_cast<int>(r.get<std::uint32_t>());
  arch.hidden = static_cast<int>(r.get<std::uint32_t>());
  arch.layers = static_cast<int>(r.get<std::uint32_t>());
  arch.head_width = static_cast<int>(r.get<std::uint32_t>());
  arch.label_classes = static_cast<int>(r.get<std::uint32_t>());
  arch.domain_classes = static_cast<int>(r.get<std::uint32_t>());
  try {
    arch.validate();
  } catch (const ArgumentError& e) {
    throw CorruptionError(what + ": " + e.what());
  }

  DannModel model;
  model.lambda = r.get<double>();
  model.seed = r.get<std::uint64_t>();
  model.has_domain_head = r.get<std::uint8_t>() != 0;
  model.params = nn::zeros_like(nn::init_params(arch, 0));

  std::uint32_t expected = 0;
  nn::for_each_tensor([&](const std::string&, const auto&) { ++expected; }, model.params);
  if (r.get<std::uint32_t>() != expected) throw CorruptionError(what + ": wrong tensor count");
  nn::for_each_tensor(
      [&](const std::string& name, auto& t) {
        const auto stored = r.get_string();
        if (stored != name)
          throw CorruptionError(what + ": expected tensor '" + name + "', found '" + stored + "'");
        const auto rows = r.get<std::uint32_t>();
        const auto cols = r.get<std::uint32_t>();
        if (static_cast<Eigen::Index>(rows) != t.rows() || static_cast<Eigen::Index>(cols) != t.cols())
          throw CorruptionError(what + ": tensor '" + name + "' has the wrong shape");
        for (Eigen::Index i = 0; i < t.rows(); ++i)
          for (Eigen::Index c = 0; c < t.cols(); ++c) {
            const double v = r.get<double>();
            if (!std::isfinite(v)) throw CorruptionError(what + ": non-finite value in " + name);
            t(i, c) = v;
          }
      },
      model.params);
  if (r.remaining() != 0) throw CorruptionError(what + ": trailing bytes");
  try {
    model.validate();
  } catch (const Error& e) {
    throw CompatibilityError(what + ": " + e.what());
  }
  return model;
}

void save_checkpoint(const DannModel& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_checkpoint(model));
}

DannModel load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(detail::read_file(path), path.string());
}

}  // namespace earda::dann
