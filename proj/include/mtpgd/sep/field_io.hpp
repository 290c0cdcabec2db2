// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mtpgd/sep/separated_field.hpp"

namespace mtpgd::sep {

// Binary separated-field container (MTPF v1, little-endian): magic "MTPF",
// u32 version, u64 n_rows, u32 n_micro, u32 n_macro, u32 rank, then per mode
// the spatial, micro and macro factors as raw doubles.
void save_field(const std::string& path, const SeparatedField& field);
SeparatedField load_field(const std::string& path);

}  // namespace mtpgd::sep
