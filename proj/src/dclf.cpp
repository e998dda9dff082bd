#include "dcl/dclf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace dcl {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'L', 'F'};

std::uint32_t load_u32(const std::byte *p) {
  return std::uint32_t(std::to_integer<std::uint8_t>(p[0])) |
         std::uint32_t(std::to_integer<std::uint8_t>(p[1])) << 8 |
         std::uint32_t(std::to_integer<std::uint8_t>(p[2])) << 16 |
         std::uint32_t(std::to_integer<std::uint8_t>(p[3])) << 24;
}

void store_u32(std::byte *p, std::uint32_t v) {
  for (int k = 0; k < 4; ++k)
    p[k] = std::byte((v >> (8 * k)) & 0xffu);
}

[[noreturn]] void parse_error(std::size_t offset, const std::string &what) {
  fail(ErrorCode::Parse, "DCLF: " + what + " at offset " + std::to_string(offset));
}

} // namespace

FeatureMap FeatureDump::map(std::size_t instance, std::size_t view) const {
  if (instance >= instances || view >= views)
    fail(ErrorCode::InvalidInput, "DCLF: (instance, view) out of range");
  const std::size_t block = std::size_t{dim} * height * width;
  const std::size_t start = (instance * views + view) * block;
  std::vector<double> widened(values.begin() + static_cast<std::ptrdiff_t>(start),
                              values.begin() + static_cast<std::ptrdiff_t>(start + block));
  return FeatureMap::from_channel_major(dim, height, width, widened);
}

std::vector<FeatureMap> FeatureDump::view_maps(std::size_t view) const {
  std::vector<FeatureMap> out;
  out.reserve(instances);
  for (std::size_t i = 0; i < instances; ++i)
    out.push_back(map(i, view));
  return out;
}

ViewPairBatch FeatureDump::to_batch() const {
  if (views != 2)
    fail(ErrorCode::MissingView,
         "a view-pair batch needs V = 2, dump has V = " + std::to_string(views));
  std::vector<ViewPair> pairs;
  pairs.reserve(instances);
  for (std::size_t i = 0; i < instances; ++i)
    pairs.push_back({map(i, 0), map(i, 1)});
  return ViewPairBatch(std::move(pairs));
}

FeatureDump FeatureDump::from_batch(const ViewPairBatch &batch) {
  FeatureDump dump;
  dump.instances = static_cast<std::uint32_t>(batch.size());
  dump.views = 2;
  dump.dim = static_cast<std::uint32_t>(batch.dim());
  dump.height = static_cast<std::uint32_t>(batch.height());
  dump.width = static_cast<std::uint32_t>(batch.width());
  dump.values.reserve(dump.value_count());
  for (const auto &v : batch.instances())
    for (const FeatureMap *m : {&v.view_a, &v.view_b})
      for (double x : m->to_channel_major())
        dump.values.push_back(static_cast<float>(x));
  return dump;
}

FeatureDump FeatureDump::from_maps(std::span<const FeatureMap> maps) {
  if (maps.empty())
    fail(ErrorCode::InvalidInput, "DCLF: no maps to write");
  FeatureDump dump;
  dump.instances = static_cast<std::uint32_t>(maps.size());
  dump.views = 1;
  dump.dim = static_cast<std::uint32_t>(maps[0].dim());
  dump.height = static_cast<std::uint32_t>(maps[0].height());
  dump.width = static_cast<std::uint32_t>(maps[0].width());
  for (const auto &m : maps) {
    if (!m.same_shape(maps[0]))
      fail(ErrorCode::InvalidInput, "DCLF: maps differ in shape");
    for (double x : m.to_channel_major())
      dump.values.push_back(static_cast<float>(x));
  }
  return dump;
}

FeatureDump decode_dclf(std::span<const std::byte> bytes) {
  if (bytes.size() < 4)
    parse_error(bytes.size(), "truncated magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    parse_error(0, "bad magic (expected 'DCLF')");
  if (bytes.size() < FeatureDump::kHeaderBytes)
    parse_error(bytes.size(), "truncated header");
  const std::uint32_t version = load_u32(bytes.data() + 4);
  if (version != FeatureDump::kVersion)
    parse_error(4, "unsupported version " + std::to_string(version));

  FeatureDump dump;
  dump.instances = load_u32(bytes.data() + 8);
  dump.views = load_u32(bytes.data() + 12);
  dump.dim = load_u32(bytes.data() + 16);
  dump.height = load_u32(bytes.data() + 20);
  dump.width = load_u32(bytes.data() + 24);
  const std::uint32_t *fields[] = {&dump.instances, &dump.views, &dump.dim, &dump.height,
                                   &dump.width};
  for (std::size_t k = 0; k < 5; ++k)
    if (*fields[k] == 0)
      parse_error(8 + 4 * k, "zero extent");

  const std::size_t payload = bytes.size() - FeatureDump::kHeaderBytes;
  unsigned __int128 wide = 1;
  for (const std::uint32_t *f : fields)
    wide *= *f;
  if (wide > payload / 4)
    parse_error(bytes.size(), "truncated payload (header declares " +
                                  std::to_string(static_cast<unsigned long long>(wide)) +
                                  " values, found " + std::to_string(payload) + " bytes)");
  const std::size_t count = dump.value_count();
  if (payload != count * 4)
    parse_error(FeatureDump::kHeaderBytes + count * 4, "trailing bytes after payload");

  dump.values.resize(count);
  const std::byte *p = bytes.data() + FeatureDump::kHeaderBytes;
  for (std::size_t k = 0; k < count; ++k)
    dump.values[k] = std::bit_cast<float>(load_u32(p + 4 * k));
  return dump;
}

std::vector<std::byte> encode_dclf(const FeatureDump &dump) {
  if (dump.values.size() != dump.value_count())
    fail(ErrorCode::InvalidInput, "DCLF: value count does not match the header");
  std::vector<std::byte> out(FeatureDump::kHeaderBytes + 4 * dump.values.size());
  std::memcpy(out.data(), kMagic, 4);
  store_u32(out.data() + 4, FeatureDump::kVersion);
  store_u32(out.data() + 8, dump.instances);
  store_u32(out.data() + 12, dump.views);
  store_u32(out.data() + 16, dump.dim);
  store_u32(out.data() + 20, dump.height);
  store_u32(out.data() + 24, dump.width);
  std::byte *p = out.data() + FeatureDump::kHeaderBytes;
  for (std::size_t k = 0; k < dump.values.size(); ++k)
    store_u32(p + 4 * k, std::bit_cast<std::uint32_t>(dump.values[k]));
  return out;
}

FeatureDump read_dclf(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_dclf(std::as_bytes(std::span(raw)));
  } catch (const Error &e) {
    fail(e.code(), path + ": " + e.what());
  }
}

void write_dclf(const std::string &path, const FeatureDump &dump) {
  const auto bytes = encode_dclf(dump);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorCode::Io, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    fail(ErrorCode::Io, "write failed for '" + path + "'");
}

} // namespace dcl
