#ifndef XDIFF_TRAJECTORY_IO_HPP
#define XDIFF_TRAJECTORY_IO_HPP

#include <cstdint>
#include <string>

#include "xdiff/grid.hpp"

namespace xdiff {

// Binary trajectory format: header (magic "XDIF", format version u16,
// dim u16, n_species u32, cells_per_axis u32, snapshot count u32,
// dt_snap f64, extent f64 per axis, CRC32 of the preceding header bytes),
// then the payload as contiguous little-endian binary64, snapshot-major,
// cell-major, species-minor. The solver step dt and t_start are not stored;
// a read-back grid has dt = dt_snap and t_start = 0.
void write_trajectory(const std::string& path, const Field& field);
Field read_trajectory(const std::string& path);

uint32_t crc32(const unsigned char* data, size_t len);

}  // namespace xdiff

#endif
