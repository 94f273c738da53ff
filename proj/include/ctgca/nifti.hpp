#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctgca/volume.hpp"

namespace ctgca {

// NIfTI-1 subset: single-file .nii, little-endian, 3-D, datatype int16 or
// float32. Values are converted to Hounsfield units via scl_slope/scl_inter
// on read; writes always emit float32 with slope 1 / inter 0.

// Parses an in-memory .nii image. `name` is used in error messages only.
// Throws FormatError naming the offending field and byte offset.
Volume read_nifti_bytes(const std::vector<uint8_t>& bytes, const std::string& name);

// Serializes a volume as a .nii byte stream (348-byte header + 4-byte
// extension flag + float32 data, vox_offset 352).
std::vector<uint8_t> write_nifti_bytes(const Volume& v);

// File wrappers around the byte-level routines.
Volume read_nifti(const std::string& path);
void write_nifti(const std::string& path, const Volume& v);

}  // namespace ctgca
