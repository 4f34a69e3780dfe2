#include "mmfc/entropy/bitstream.hpp"

#include <algorithm>

#include "mmfc/bytes.hpp"
#include "mmfc/ndgrad/checkpoint.hpp"

namespace mmfc::entropy {

std::vector<std::uint8_t> Bitstream::serialize() const {
  if (payload.size() != header.payload_length) {
    throw IntegrityError("bitstream: header payload length " + std::to_string(header.payload_length) +
                         " != payload size " + std::to_string(payload.size()));
  }
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kStreamMagic), 4));
  w.u8(header.version);
  w.u8(header.approach);
  w.u8(static_cast<std::uint8_t>(static_cast<std::uint8_t>(header.role) |
                                 (header.conditional ? kConditionalRoleFlag : 0)));
  w.u8(header.lambda_index);
  w.u16(header.rows);
  w.u16(header.dim);
  w.u64(header.model_hash);
  if (header.conditional) w.u64(header.condition_digest);
  w.u32(header.payload_length);
  w.raw(payload);
  return w.take();
}

Bitstream Bitstream::parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kStreamMagic)) {
    throw IntegrityError("bitstream: bad magic at byte offset 0");
  }
  Bitstream bs;
  bs.header.version = r.u8();
  if (bs.header.version != kStreamVersion) {
    throw IntegrityError("bitstream: unsupported version " + std::to_string(bs.header.version) +
                         " at byte offset 4");
  }
  bs.header.approach = r.u8();
  const std::uint8_t role = r.u8();
  bs.header.conditional = (role & kConditionalRoleFlag) != 0;
  const std::uint8_t modality = role & static_cast<std::uint8_t>(~kConditionalRoleFlag);
  if (modality > 2) throw IntegrityError("bitstream: invalid role byte at offset 6");
  bs.header.role = static_cast<Modality>(modality);
  bs.header.lambda_index = r.u8();
  bs.header.rows = r.u16();
  bs.header.dim = r.u16();
  bs.header.model_hash = r.u64();
  if (bs.header.conditional) bs.header.condition_digest = r.u64();
  bs.header.payload_length = r.u32();
  if (r.remaining() != bs.header.payload_length) {
    throw IntegrityError("bitstream: header declares " + std::to_string(bs.header.payload_length) +
                         " payload bytes but " + std::to_string(r.remaining()) + " are present (offset " +
                         std::to_string(r.position()) + ")");
  }
  const auto body = r.raw(bs.header.payload_length);
  bs.payload.assign(body.begin(), body.end());
  return bs;
}

void Bitstream::save(const std::filesystem::path& path) const {
  ndgrad::write_file_atomic(path, serialize());
}

Bitstream Bitstream::load(const std::filesystem::path& path) { return parse(ndgrad::read_file(path)); }

}  // namespace mmfc::entropy
