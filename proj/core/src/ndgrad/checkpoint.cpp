#include "mmfc/ndgrad/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "mmfc/bytes.hpp"

namespace mmfc::ndgrad {

std::vector<std::uint8_t> ParameterFile::serialize() const {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kParamMagic), 8));
  w.u16(kParamFormatVersion);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params.all()) {
    if (p->name.size() > 0xFFFF) throw Error("parameter name too long: " + p->name);
    w.u16(static_cast<std::uint16_t>(p->name.size()));
    w.text(p->name);
    w.u8(static_cast<std::uint8_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : p->value.values()) w.f32(v);
  }
  for (const auto& [tag, bytes] : sections) {
    if (tag.size() != 4) throw Error("section tag must be 4 characters: '" + tag + "'");
    w.text(tag);
    w.u32(static_cast<std::uint32_t>(bytes.size()));
    w.raw(bytes);
  }
  return w.take();
}

ParameterFile ParameterFile::parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(8);
  if (!std::equal(magic.begin(), magic.end(), kParamMagic)) {
    throw IntegrityError("not a parameter file (bad magic)");
  }
  const std::uint16_t version = r.u16();
  if (version != kParamFormatVersion) {
    throw IntegrityError("unsupported parameter file version " + std::to_string(version));
  }
  ParameterFile file;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.text(r.u16());
    const std::uint8_t rank = r.u8();
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    Tensor<float> value(shape);
    for (auto& v : value.values()) v = r.f32();
    file.params.add(std::move(name), std::move(value));
  }
  while (r.remaining() > 0) {
    std::string tag = r.text(4);
    const std::uint32_t len = r.u32();
    const auto body = r.raw(len);
    file.sections[tag] = std::vector<std::uint8_t>(body.begin(), body.end());
  }
  return file;
}

void ParameterFile::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

ParameterFile ParameterFile::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

void copy_values(const ParameterStore<float>& src, ParameterStore<float>& dst) {
  for (auto* p : dst.all()) {
    const auto* s = src.find(p->name);
    if (s == nullptr) throw IntegrityError("checkpoint lacks parameter '" + p->name + "'");
    if (s->value.shape() != p->value.shape()) {
      throw IntegrityError("checkpoint parameter '" + p->name + "' has shape " +
                           to_string(s->value.shape()) + ", expected " + to_string(p->value.shape()));
    }
    p->value = s->value;
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mmfc::ndgrad
