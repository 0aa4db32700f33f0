#ifndef ECGD_IMAGE_IO_HPP
#define ECGD_IMAGE_IO_HPP

// Lossless raster I/O: PNG (8-bit gray, gray+alpha, RGB, RGBA, palette;
// non-interlaced) and binary PNM (P6, P5). Requires linking zlib.

#include <zlib.h>

#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "ecgd/error.hpp"
#include "ecgd/raster.hpp"

namespace ecgd {

namespace io_detail {

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                              '\r', '\n', 0x1a, '\n'};

inline std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io, "read failed on '" + path.string() + "'");
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write failed on '" + path.string() + "'");
}

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

inline std::vector<std::uint8_t> inflate_all(std::span<const std::uint8_t> src,
                                             std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw Error(ErrorCode::corrupt_stream, "inflateInit failed");
  zs.next_in = const_cast<Bytef*>(src.data());
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) {
    throw Error(ErrorCode::corrupt_stream, "PNG image data does not inflate to the expected size");
  }
  return out;
}

inline RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || !std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    throw Error(ErrorCode::unsupported_format, "missing PNG signature");
  }
  std::size_t pos = 8;
  std::uint32_t width = 0, height = 0;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::vector<Rgb> palette;
  bool seen_end = false;

  while (!seen_end) {
    if (pos + 12 > bytes.size()) throw Error(ErrorCode::corrupt_stream, "truncated PNG chunk header");
    const std::uint32_t len = read_be32(&bytes[pos]);
    const std::uint8_t* type = &bytes[pos + 4];
    if (len > bytes.size() - pos - 12) throw Error(ErrorCode::corrupt_stream, "truncated PNG chunk");
    const std::uint8_t* payload = &bytes[pos + 8];
    const std::uint32_t crc = read_be32(payload + len);
    if (crc != static_cast<std::uint32_t>(::crc32(0L, type, len + 4))) {
      throw Error(ErrorCode::corrupt_stream, "PNG chunk CRC mismatch");
    }
    const std::string tag(reinterpret_cast<const char*>(type), 4);
    if (tag == "IHDR") {
      if (len != 13) throw Error(ErrorCode::corrupt_stream, "bad IHDR length");
      width = read_be32(payload);
      height = read_be32(payload + 4);
      const int depth = payload[8];
      color_type = payload[9];
      if (width == 0 || height == 0) throw Error(ErrorCode::corrupt_stream, "zero PNG dimension");
      if (depth != 8) {
        throw Error(ErrorCode::unsupported_format,
                    "unsupported PNG bit depth " + std::to_string(depth) + " (need 8)");
      }
      if (color_type != 0 && color_type != 2 && color_type != 3 && color_type != 4 &&
          color_type != 6) {
        throw Error(ErrorCode::unsupported_format,
                    "unsupported PNG color type " + std::to_string(color_type));
      }
      if (payload[12] != 0) throw Error(ErrorCode::unsupported_format, "interlaced PNG not supported");
    } else if (tag == "PLTE") {
      for (std::uint32_t i = 0; i + 2 < len; i += 3) {
        palette.push_back({payload[i], payload[i + 1], payload[i + 2]});
      }
    } else if (tag == "IDAT") {
      idat.insert(idat.end(), payload, payload + len);
    } else if (tag == "IEND") {
      seen_end = true;
    } else if ((type[0] & 0x20) == 0) {
      throw Error(ErrorCode::unsupported_format, "unknown critical PNG chunk " + tag);
    }
    pos += 12 + len;
  }
  if (color_type < 0) throw Error(ErrorCode::corrupt_stream, "PNG without IHDR");
  if (color_type == 3 && palette.empty()) throw Error(ErrorCode::corrupt_stream, "palette PNG without PLTE");

  const std::size_t channels = color_type == 0 ? 1
                               : color_type == 2 ? 3
                               : color_type == 3 ? 1
                               : color_type == 4 ? 2
                                                 : 4;
  const std::size_t stride = std::size_t{width} * channels;
  auto raw = inflate_all(idat, (stride + 1) * height);

  std::vector<std::uint8_t> prev(stride, 0);
  std::vector<std::uint8_t> cur(stride);
  RgbImage img(width, height);
  for (std::size_t r = 0; r < height; ++r) {
    const std::uint8_t filter = raw[r * (stride + 1)];
    const std::uint8_t* line = &raw[r * (stride + 1) + 1];
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= channels ? cur[i - channels] : 0;
      const int b = prev[i];
      const int c = i >= channels ? prev[i - channels] : 0;
      int pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: pred = paeth(a, b, c); break;
        default: throw Error(ErrorCode::corrupt_stream, "bad PNG filter type");
      }
      cur[i] = static_cast<std::uint8_t>(line[i] + pred);
    }
    auto out = img.row(r);
    for (std::size_t x = 0; x < width; ++x) {
      const std::uint8_t* px = &cur[x * channels];
      switch (color_type) {
        case 0:
        case 4: out[x] = {px[0], px[0], px[0]}; break;
        case 3:
          if (px[0] >= palette.size()) throw Error(ErrorCode::corrupt_stream, "palette index out of range");
          out[x] = palette[px[0]];
          break;
        default: out[x] = {px[0], px[1], px[2]}; break;
      }
    }
    std::swap(prev, cur);
  }
  return img;
}

inline std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> pixels, std::size_t width,
                                            std::size_t height, std::size_t channels) {
  const std::size_t stride = width * channels;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * height);
  for (std::size_t r = 0; r < height; ++r) {
    raw.push_back(0);
    raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(r * stride),
               pixels.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride));
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(ErrorCode::io, "deflate failed");
  }
  z.resize(zlen);

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  auto chunk = [&out](const char* tag, std::span<const std::uint8_t> data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), tag, tag + 4);
    out.insert(out.end(), data.begin(), data.end());
    put_be32(out, static_cast<std::uint32_t>(
                      ::crc32(0L, &out[start], static_cast<uInt>(data.size() + 4))));
  };
  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(width));
  put_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);
  ihdr.push_back(channels == 1 ? 0 : 2);
  ihdr.insert(ihdr.end(), {0, 0, 0});
  chunk("IHDR", ihdr);
  chunk("IDAT", z);
  chunk("IEND", {});
  return out;
}

// PNM header tokens: whitespace separated, '#' comments to end of line.
inline std::size_t pnm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    throw Error(ErrorCode::corrupt_stream, "malformed PNM header");
  }
  std::size_t v = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    v = v * 10 + (bytes[pos++] - '0');
    if (v > (1u << 24)) throw Error(ErrorCode::corrupt_stream, "PNM header value too large");
  }
  return v;
}

inline RgbImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const bool color = bytes[1] == '6';
  std::size_t pos = 2;
  const std::size_t w = pnm_token(bytes, pos);
  const std::size_t h = pnm_token(bytes, pos);
  const std::size_t maxval = pnm_token(bytes, pos);
  if (w == 0 || h == 0) throw Error(ErrorCode::corrupt_stream, "zero PNM dimension");
  if (maxval != 255) {
    throw Error(ErrorCode::unsupported_format,
                "unsupported PNM maxval " + std::to_string(maxval) + " (need 255)");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::corrupt_stream, "malformed PNM header");
  }
  ++pos;
  const std::size_t channels = color ? 3 : 1;
  if (bytes.size() - pos < w * h * channels) throw Error(ErrorCode::corrupt_stream, "truncated PNM raster");
  RgbImage img(w, h);
  auto dst = img.data();
  for (std::size_t i = 0; i < w * h; ++i) {
    const std::uint8_t* px = &bytes[pos + i * channels];
    dst[i] = color ? Rgb{px[0], px[1], px[2]} : Rgb{px[0], px[0], px[0]};
  }
  return img;
}

inline std::vector<std::uint8_t> encode_pnm(std::span<const std::uint8_t> pixels, std::size_t width,
                                            std::size_t height, std::size_t channels) {
  const std::string header = std::string(channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

inline bool wants_pnm(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

inline void save_channels(std::span<const std::uint8_t> pixels, std::size_t width,
                          std::size_t height, std::size_t channels,
                          const std::filesystem::path& path) {
  const auto bytes = wants_pnm(path) ? encode_pnm(pixels, width, height, channels)
                                     : encode_png(pixels, width, height, channels);
  write_file(path, bytes);
}

}  // namespace io_detail

/// Decodes PNG or binary PNM from memory. Gray inputs are replicated to RGB,
/// alpha is dropped.
inline RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return io_detail::decode_pnm(bytes);
  }
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') {
    return io_detail::decode_png(bytes);
  }
  throw Error(ErrorCode::unsupported_format, "input is neither PNG nor binary PNM (P5/P6)");
}

inline RgbImage load_image(const std::filesystem::path& path) {
  const auto bytes = io_detail::read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

/// Writes PNG, or PPM/PGM when the extension asks for it.
inline void save_image(const RgbImage& img, const std::filesystem::path& path) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(img.data().data());
  io_detail::save_channels({p, img.size() * 3}, img.width(), img.height(), 3, path);
}

inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
  io_detail::save_channels(img.data(), img.width(), img.height(), 1, path);
}

/// Binary images are written as 0/255 gray.
inline void save_image(const BinaryImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray(img.size());
  std::transform(img.data().begin(), img.data().end(), gray.begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
  io_detail::save_channels(gray, img.width(), img.height(), 1, path);
}

}  // namespace ecgd

#endif  // ECGD_IMAGE_IO_HPP
