#include "ctgca/nifti.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace ctgca {
namespace {

// On-disk NIfTI-1 header. Offsets follow the official nifti1.h layout; the
// struct is naturally packed (no padding needed for these field types).
struct Nifti1Header {
  int32_t sizeof_hdr;     // 0    must be 348
  char data_type[10];     // 4    unused
  char db_name[18];       // 14   unused
  int32_t extents;        // 32   unused
  int16_t session_error;  // 36   unused
  char regular;           // 38   unused
  char dim_info;          // 39
  int16_t dim[8];         // 40
  float intent_p1;        // 56
  float intent_p2;        // 60
  float intent_p3;        // 64
  int16_t intent_code;    // 68
  int16_t datatype;       // 70
  int16_t bitpix;         // 72
  int16_t slice_start;    // 74
  float pixdim[8];        // 76
  float vox_offset;       // 108
  float scl_slope;        // 112
  float scl_inter;        // 116
  int16_t slice_end;      // 120
  char slice_code;        // 122
  char xyzt_units;        // 123
  float cal_max;          // 124
  float cal_min;          // 128
  float slice_duration;   // 132
  float toffset;          // 136
  int32_t glmax;          // 140
  int32_t glmin;          // 144
  char descrip[80];       // 148
  char aux_file[24];      // 228
  int16_t qform_code;     // 252
  int16_t sform_code;     // 254
  float quatern_b;        // 256
  float quatern_c;        // 260
  float quatern_d;        // 264
  float qoffset_x;        // 268
  float qoffset_y;        // 272
  float qoffset_z;        // 276
  float srow_x[4];        // 280
  float srow_y[4];        // 296
  float srow_z[4];        // 312
  char intent_name[16];   // 328
  char magic[4];          // 344
};
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

[[noreturn]] void fail(const std::string& name, const std::string& what) {
  throw FormatError(name + ": " + what);
}

Mat4 affine_from_qform(const Nifti1Header& h) {
  const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
  double a2 = 1.0 - (b * b + c * c + d * d);
  const double a = a2 > 0 ? std::sqrt(a2) : 0.0;
  const double qfac = (h.pixdim[0] < 0) ? -1.0 : 1.0;
  Mat4 r = Mat4::identity();
  r(0, 0) = a * a + b * b - c * c - d * d;
  r(0, 1) = 2 * (b * c - a * d);
  r(0, 2) = 2 * (b * d + a * c);
  r(1, 0) = 2 * (b * c + a * d);
  r(1, 1) = a * a + c * c - b * b - d * d;
  r(1, 2) = 2 * (c * d - a * b);
  r(2, 0) = 2 * (b * d - a * c);
  r(2, 1) = 2 * (c * d + a * b);
  r(2, 2) = a * a + d * d - b * b - c * c;
  for (int i = 0; i < 3; ++i) {
    r(i, 0) *= h.pixdim[1];
    r(i, 1) *= h.pixdim[2];
    r(i, 2) *= h.pixdim[3] * qfac;
  }
  r(0, 3) = h.qoffset_x;
  r(1, 3) = h.qoffset_y;
  r(2, 3) = h.qoffset_z;
  return r;
}

}  // namespace

Volume read_nifti_bytes(const std::vector<uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 348)
    fail(name, "truncated header: need 348 bytes, got " + std::to_string(bytes.size()));
  Nifti1Header h;
  std::memcpy(&h, bytes.data(), sizeof(h));

  if (h.sizeof_hdr != 348) {
    if (h.sizeof_hdr == 1543569408)  // 348 byte-swapped
      fail(name, "big-endian NIfTI is not supported (sizeof_hdr at offset 0 is byte-swapped)");
    fail(name, "bad sizeof_hdr at offset 0: expected 348, got " + std::to_string(h.sizeof_hdr));
  }
  if (!(h.magic[0] == 'n' && h.magic[1] == '+' && h.magic[2] == '1' && h.magic[3] == '\0'))
    fail(name, "bad magic at offset 344: expected \"n+1\\0\" (single-file NIfTI-1)");
  if (h.dim[0] != 3)
    fail(name, "unsupported dim[0] at offset 40: expected 3 spatial dimensions, got " +
                   std::to_string(h.dim[0]));
  for (int a = 1; a <= 3; ++a)
    if (h.dim[a] < 1)
      fail(name, "bad dim[" + std::to_string(a) + "] at offset " + std::to_string(40 + 2 * a) +
                     ": must be >= 1, got " + std::to_string(h.dim[a]));
  size_t bpp;
  if (h.datatype == 4) {
    bpp = 2;
    if (h.bitpix != 16)
      fail(name, "bitpix at offset 72 inconsistent with int16 datatype: got " +
                     std::to_string(h.bitpix));
  } else if (h.datatype == 16) {
    bpp = 4;
    if (h.bitpix != 32)
      fail(name, "bitpix at offset 72 inconsistent with float32 datatype: got " +
                     std::to_string(h.bitpix));
  } else {
    fail(name, "unsupported datatype at offset 70: expected 4 (int16) or 16 (float32), got " +
                   std::to_string(h.datatype));
  }
  const size_t nvox = static_cast<size_t>(h.dim[1]) * h.dim[2] * h.dim[3];
  if (nvox > (size_t{1} << 31))
    fail(name, "volume too large: " + std::to_string(nvox) + " voxels");
  if (!(h.vox_offset >= 352.0f) || h.vox_offset != std::floor(h.vox_offset))
    fail(name, "bad vox_offset at offset 108: expected an integer >= 352, got " +
                   std::to_string(h.vox_offset));
  const size_t off = static_cast<size_t>(h.vox_offset);
  if (bytes.size() < off + nvox * bpp)
    fail(name, "truncated data: need " + std::to_string(off + nvox * bpp) + " bytes, got " +
                   std::to_string(bytes.size()));

  Volume v;
  v.dims = {h.dim[1], h.dim[2], h.dim[3]};

  if (h.sform_code > 0) {
    Mat4 m = Mat4::identity();
    for (int c = 0; c < 4; ++c) {
      m(0, c) = h.srow_x[c];
      m(1, c) = h.srow_y[c];
      m(2, c) = h.srow_z[c];
    }
    v.affine = m;
  } else if (h.qform_code > 0) {
    v.affine = affine_from_qform(h);
  } else {
    Mat4 m = Mat4::identity();
    for (int a = 0; a < 3; ++a) m(a, a) = h.pixdim[a + 1] != 0 ? h.pixdim[a + 1] : 1.0;
    v.affine = m;
  }
  // Spacing is defined as the affine column norms so the Volume invariant
  // holds even when pixdim disagrees with the sform rows.
  const auto norms = v.affine.column_norms3();
  v.spacing = {norms[0], norms[1], norms[2]};
  if (std::fabs(v.affine.det3()) <= 1e-9)
    fail(name, "degenerate voxel-to-world affine (|det| <= 1e-9)");

  const double slope = (h.scl_slope == 0.0f) ? 1.0 : h.scl_slope;
  const double inter = h.scl_inter;
  v.data.resize(nvox);
  const uint8_t* src = bytes.data() + off;
  if (h.datatype == 4) {
    for (size_t i = 0; i < nvox; ++i) {
      int16_t raw;
      std::memcpy(&raw, src + 2 * i, 2);
      v.data[i] = static_cast<float>(raw * slope + inter);
    }
  } else {
    for (size_t i = 0; i < nvox; ++i) {
      float raw;
      std::memcpy(&raw, src + 4 * i, 4);
      v.data[i] = static_cast<float>(raw * slope + inter);
    }
  }
  v.validate();
  return v;
}

std::vector<uint8_t> write_nifti_bytes(const Volume& v) {
  v.validate();
  Nifti1Header h;
  std::memset(&h, 0, sizeof(h));
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  for (int a = 0; a < 3; ++a) h.dim[a + 1] = static_cast<int16_t>(v.dims[a]);
  for (int a = 4; a < 8; ++a) h.dim[a] = 1;
  if (v.dims[0] > 32767 || v.dims[1] > 32767 || v.dims[2] > 32767)
    throw DomainError("write_nifti: dims exceed int16 range");
  h.datatype = 16;  // float32
  h.bitpix = 32;
  h.pixdim[0] = 1.0f;
  for (int a = 0; a < 3; ++a) h.pixdim[a + 1] = static_cast<float>(v.spacing[a]);
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // mm
  h.qform_code = 0;
  h.sform_code = 1;
  for (int c = 0; c < 4; ++c) {
    h.srow_x[c] = static_cast<float>(v.affine(0, c));
    h.srow_y[c] = static_cast<float>(v.affine(1, c));
    h.srow_z[c] = static_cast<float>(v.affine(2, c));
  }
  h.magic[0] = 'n';
  h.magic[1] = '+';
  h.magic[2] = '1';
  h.magic[3] = '\0';

  std::vector<uint8_t> out(352 + v.data.size() * 4, 0);
  std::memcpy(out.data(), &h, sizeof(h));
  std::memcpy(out.data() + 352, v.data.data(), v.data.size() * 4);
  return out;
}

Volume read_nifti(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(path + ": cannot open file");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return read_nifti_bytes(bytes, path);
}

void write_nifti(const std::string& path, const Volume& v) {
  const std::vector<uint8_t> bytes = write_nifti_bytes(v);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(path + ": cannot open file for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError(path + ": write failed");
}

}  // namespace ctgca
