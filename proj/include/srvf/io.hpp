#pragma once

#include <string>
#include <vector>

#include "srvf/curve.hpp"

namespace srvf {

enum class OutlineFormat { Csv, Txt };

OutlineFormat parse_outline_format(const std::string& name);

/// Reads outlines from `path`.
///
/// Csv: one file, header `shape_id,label,x,y`, one row per point in
/// traversal order, blank label = unlabeled.
///
/// Txt: one shape per file as whitespace-separated `x y` pairs, label
/// inferred from the trailing integer in the parent directory name. `path`
/// may be a single file or a directory scanned recursively for `*.txt`.
///
/// All returned curves get the given `closed` flag.
std::vector<PlanarCurve> load_outlines(const std::string& path,
                                       OutlineFormat format,
                                       bool closed = true);

/// Writes curves in the Csv outline format (shape ids synthesized from the
/// position when empty).
void write_outlines(const std::string& path,
                    const std::vector<PlanarCurve>& curves);

}  // namespace srvf
