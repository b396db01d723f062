#include "s2v/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

namespace s2v::nn {
namespace {

void put_le(std::vector<char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::filesystem::path data_path = path.string() + ".bin";
  std::vector<char> blob;
  blob.reserve(ckpt.params.numel() * 8);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.params) {
    entries.push_back({{"name", name}, {"shape", t.shape()}, {"offset", blob.size()}, {"count", t.size()}});
    for (double v : t.data()) put_le(blob, v);
  }
  nlohmann::json manifest = {{"version", kCheckpointVersion},
                             {"data_file", data_path.filename().string()},
                             {"dtype", "f64-le"},
                             {"params", entries},
                             {"metadata", ckpt.metadata}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream bin(data_path, std::ios::binary | std::ios::trunc);
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!bin) throw CheckpointError("failed writing " + data_path.string());
  std::ofstream js(path, std::ios::trunc);
  js << manifest.dump(2) << '\n';
  if (!js) throw CheckpointError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream js(path);
  if (!js) throw CheckpointError("cannot open checkpoint manifest " + path.string());
  nlohmann::json manifest;
  try {
    js >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint manifest " + path.string() + ": " + e.what());
  }
  if (manifest.value("version", "") != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version in " + path.string());
  const auto data_path = path.parent_path() / manifest.at("data_file").get<std::string>();
  std::ifstream bin(data_path, std::ios::binary);
  if (!bin) throw CheckpointError("cannot open checkpoint data " + data_path.string());
  std::vector<char> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  ckpt.metadata = manifest.value("metadata", nlohmann::json::object());
  std::size_t expected_offset = 0;
  for (const auto& e : manifest.at("params")) {
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<Shape>();
    const auto offset = e.at("offset").get<std::size_t>();
    const auto count = e.at("count").get<std::size_t>();
    if (shape_numel(shape) != count || offset != expected_offset || offset + 8 * count > blob.size())
      throw CheckpointError("inconsistent entry '" + name + "' in " + path.string());
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = get_le(blob.data() + offset + 8 * i);
    ckpt.params.add(name, Tensor(shape, std::move(data)));
    expected_offset = offset + 8 * count;
  }
  if (expected_offset != blob.size()) throw CheckpointError("trailing bytes in " + data_path.string());
  return ckpt;
}

}  // namespace s2v::nn
