// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "mtpgd/plast/plasticity.hpp"

namespace mtpgd::plast {

// Chunked binary snapshot format (little-endian):
//   magic "MTPS", u32 version, u64 rows, u64 cols, u32 ncomp, u32 chunk_cols
// followed by column chunks of width chunk_cols (last may be narrower), each
// stored row-major (rows x width doubles). Chunking keeps peak memory bounded
// when streaming histories with very large N_t.
void save_snapshot(const HistorySnapshot& snap, const std::string& path,
                   std::uint32_t chunk_cols = 4096);
HistorySnapshot load_snapshot(const std::string& path);

// Dense CSV for small cases: header "row,t0,t1,...", one line per row.
void export_snapshot_csv(const HistorySnapshot& snap, const std::string& path);

// Plastic state as CSV (p11,p22,p33,p12,ebar per point) and back.
void save_state_csv(const PlasticState& state, const std::string& path);
PlasticState load_state_csv(const std::string& path);

}  // namespace mtpgd::plast
