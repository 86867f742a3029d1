#ifndef CHERNLAB_SNAPSHOT_HPP
#define CHERNLAB_SNAPSHOT_HPP

#include "chernlab/map_state.hpp"

namespace chernlab {

/// Binary map snapshot.
///
/// Layout: one JSON header line (format_version, domain spec, target id,
/// chart_ids encoding, grid count) terminated by '\n', then per grid an
/// optional chart-id block (int16 little-endian, n^2 entries, present when
/// chart_ids == "i16"), then the payload: row-major complex pairs as
/// little-endian 8-byte floats, real part then imaginary part, z1 then z2
/// (2*2*8*n^2 bytes per grid).
void save_snapshot(const MapState& m, const std::string& path);
MapState load_snapshot(const std::string& path,
                       std::shared_ptr<const HermitianTarget> tgt = nullptr);

/// Header summary for `snapshot-info`.
std::string snapshot_info(const std::string& path);

std::vector<uint8_t> snapshot_bytes(const MapState& m);

}  // namespace chernlab

#endif
