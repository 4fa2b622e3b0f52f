#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lineleak/linecloud.hpp"

namespace lineleak {

// File formats
//
//  * PLY ASCII 1.0 with `element vertex N` and double x, y, z properties.
//    Other elements and properties are tolerated on read and ignored.
//  * LINECLOUD v1 text: `LINECLOUD v1`, `count N`, then N rows
//    `ox oy oz dx dy dz`. Directions that are not unit length are
//    renormalized on read with a warning.
//
// Numbers are written with 17 significant digits, so a write/read cycle
// reproduces every coordinate bit-exactly. Optional sidecars next to the
// main file:
//
//  * `<file>.payloads`: `PAYLOADS v1`, `count N`, then one hex blob per row.
//  * `<file>.sources`:  `SOURCES v1`, `count N`, `total M`, then one source
//    index per row. Written whenever the element-to-source mapping is not the
//    identity (sparsified clouds, recovered clouds with dropped estimates).

/// Mapping of the elements of a file back to the source point cloud.
struct SourceMap {
  std::vector<std::size_t> indices;
  std::size_t total = 0;  // size of the set the elements were drawn from
};

PointCloud read_ply(const std::string& path, SourceMap* sources = nullptr);
void write_ply(const PointCloud& pc, const std::string& path, const SourceMap* sources = nullptr);

LineCloud read_lines(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_lines(const LineCloud& lc, const std::string& path);

std::string sidecar_path(const std::string& path, const char* suffix);

}  // namespace lineleak
