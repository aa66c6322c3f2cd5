#ifndef SUBPIX_IO_HPP
#define SUBPIX_IO_HPP

#include "errors.hpp"
#include "field.hpp"
#include "ndbuffer.hpp"

#include <string>
#include <string_view>

namespace subpix {

/// Invalid-cell magnitude marker for .flo files.
inline constexpr float kFloInvalid = 1e10f;

/// PFM disparity field: "Pf" (1 channel) or "PF" (3 channels), scale sign
/// encoding endianness, bottom-up rows normalized to top-down, non-finite
/// values flagged invalid. All parse_* functions throw FormatError with the
/// offending byte offset and never return partial buffers.
DisparityField parsePfm(std::string_view bytes);
DisparityField readPfm(std::string const& path);

/// Writes little-endian (negative scale), bottom-up per the format.
std::string writePfmBytes(DisparityField const& field);
void writePfm(std::string const& path, DisparityField const& field);

/// Middlebury .flo optical flow: magic 202021.25, interleaved (u, v) floats;
/// |component| > 1e9 marks the cell invalid.
DisparityField parseFlo(std::string_view bytes);
DisparityField readFlo(std::string const& path);

std::string writeFloBytes(DisparityField const& field);
void writeFlo(std::string const& path, DisparityField const& field);

/// Image readers: binary PGM/PPM (8/16-bit) and PNG, values scaled to [0,1],
/// grayscale rank 2, color rank 3. parseImage dispatches on the magic bytes
/// and also accepts PFM (values passed through unscaled).
NdBufferF parsePnm(std::string_view bytes);
NdBufferF parsePng(std::string_view bytes);
NdBufferF parseImage(std::string_view bytes);
NdBufferF readImage(std::string const& path);

/// 8-bit binary PGM (rank 2, clamped to [0,1]) used for diagnostics.
std::string writePgmBytes(NdBufferF const& image);
void writePgm(std::string const& path, NdBufferF const& image);

std::string readFileBytes(std::string const& path);
void writeFileBytes(std::string const& path, std::string_view bytes);

} // namespace subpix

#endif
