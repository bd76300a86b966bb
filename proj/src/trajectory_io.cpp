#include "xdiff/trajectory_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "xdiff/errors.hpp"

namespace xdiff {

namespace {

constexpr uint16_t kFormatVersion = 1;

const std::array<uint32_t, 256>& crc_table() {
  static const std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int bit = 0; bit < 8; ++bit) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

template <typename T>
void put(std::vector<unsigned char>& buf, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T take(const std::vector<unsigned char>& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw IoError("trajectory header truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

uint32_t crc32(const unsigned char* data, size_t len) {
  uint32_t c = 0xFFFFFFFFu;
  for (size_t i = 0; i < len; ++i) c = crc_table()[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void write_trajectory(const std::string& path, const Field& field) {
  const SpaceTimeGrid& g = field.grid;
  size_t expected = static_cast<size_t>(g.snapshots) * static_cast<size_t>(g.cells()) *
                    static_cast<size_t>(g.n_species);
  if (field.values.size() != expected)
    throw IoError("field payload size does not match its grid");

  std::vector<unsigned char> header;
  header.insert(header.end(), {'X', 'D', 'I', 'F'});
  put<uint16_t>(header, kFormatVersion);
  put<uint16_t>(header, static_cast<uint16_t>(g.dim));
  put<uint32_t>(header, static_cast<uint32_t>(g.n_species));
  put<uint32_t>(header, static_cast<uint32_t>(g.cells_per_axis));
  put<uint32_t>(header, static_cast<uint32_t>(g.snapshots));
  put<double>(header, g.dt_snap);
  for (int axis = 0; axis < g.dim; ++axis) put<double>(header, g.extent[static_cast<size_t>(axis)]);
  uint32_t checksum = crc32(header.data(), header.size());
  put<uint32_t>(header, checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open trajectory file for writing: " + path);
  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!out) throw IoError("short write to trajectory file: " + path);
}

Field read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  size_t pos = 0;
  if (bytes.size() < 4 || bytes[0] != 'X' || bytes[1] != 'D' || bytes[2] != 'I' ||
      bytes[3] != 'F')
    throw IoError("not a trajectory file (bad magic): " + path);
  pos = 4;
  uint16_t version = take<uint16_t>(bytes, pos);
  if (version != kFormatVersion)
    throw IoError("unsupported trajectory format version " + std::to_string(version));
  uint16_t dim = take<uint16_t>(bytes, pos);
  if (dim != 1 && dim != 2) throw IoError("trajectory dimension must be 1 or 2");
  uint32_t n_species = take<uint32_t>(bytes, pos);
  uint32_t cells_per_axis = take<uint32_t>(bytes, pos);
  uint32_t snapshots = take<uint32_t>(bytes, pos);
  double dt_snap = take<double>(bytes, pos);
  std::array<double, 2> extent{1.0, 1.0};
  for (int axis = 0; axis < dim; ++axis) extent[static_cast<size_t>(axis)] = take<double>(bytes, pos);
  size_t header_len = pos;
  uint32_t stored = take<uint32_t>(bytes, pos);
  if (crc32(bytes.data(), header_len) != stored)
    throw IoError("trajectory header checksum mismatch: " + path);

  SpaceTimeGrid g;
  g.dim = dim;
  g.extent = extent;
  g.cells_per_axis = static_cast<int>(cells_per_axis);
  g.dt = dt_snap;
  g.dt_snap = dt_snap;
  g.snapshots = static_cast<int>(snapshots);
  g.n_species = static_cast<int>(n_species);
  g.t_start = 0.0;
  g.validate();

  size_t expected = static_cast<size_t>(g.snapshots) * static_cast<size_t>(g.cells()) *
                    static_cast<size_t>(g.n_species);
  if (bytes.size() - pos != expected * sizeof(double))
    throw IoError("trajectory payload length mismatch: " + path);
  Field f = Field::zeros(g);
  std::memcpy(f.values.data(), bytes.data() + pos, expected * sizeof(double));
  return f;
}

}  // namespace xdiff
