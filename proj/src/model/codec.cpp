#include "xcap/model/codec.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <png.h>

#include "xcap/error.hpp"

namespace xcap::model {

namespace {

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

void png_write_fn(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_fn(png_structp) {}

void png_read_fn(png_structp png, png_bytep data, png_size_t len) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + len > cur->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(data, cur->bytes.data() + cur->offset, len);
  cur->offset += len;
}

// Rows are handed to libpng in network byte order for 16-bit data.
Bytes encode_png_rows(int width, int height, int color_type, int bit_depth,
                      const std::vector<std::uint8_t>& packed, std::size_t row_bytes) {
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn,
                                            png_warning_fn);
  if (!png) throw IoError("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  Bytes out;
  std::vector<png_const_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encode failed: " + err);
  }
  png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = packed.data() + y * row_bytes;
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int color_type = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> data;
  std::size_t row_bytes = 0;
};

DecodedPng decode_png_raw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw ParseError("png: bad signature");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn,
                                           png_warning_fn);
  if (!png) throw IoError("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{bytes, 0};
  DecodedPng out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("png decode failed: " + err);
  }
  png_set_read_fn(png, &cursor, png_read_fn);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.color_type = png_get_color_type(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.row_bytes = png_get_rowbytes(png, info);
  out.data.resize(out.row_bytes * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.data.data() + y * out.row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void put_u16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(Bytes& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace

Bytes encode_png(const RgbImage& img) {
  if (img.channels != 3) throw ArgumentError("encode_png: RGB image must have 3 channels");
  return encode_png_rows(img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.pixels,
                         static_cast<std::size_t>(img.width) * 3);
}

Bytes encode_png(const DepthImage& img) {
  if (img.channels != 1) throw ArgumentError("encode_png: depth image must have 1 channel");
  std::vector<std::uint8_t> packed(img.pixels.size() * 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    packed[2 * i] = static_cast<std::uint8_t>(img.pixels[i] >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(img.pixels[i] & 0xff);
  }
  return encode_png_rows(img.width, img.height, PNG_COLOR_TYPE_GRAY, 16, packed,
                         static_cast<std::size_t>(img.width) * 2);
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  auto raw = decode_png_raw(bytes);
  if (raw.color_type != PNG_COLOR_TYPE_RGB || raw.bit_depth != 8)
    throw ParseError("png: expected 8-bit RGB");
  RgbImage img(raw.width, raw.height, 3);
  for (int y = 0; y < raw.height; ++y)
    std::memcpy(&img.at(0, y), raw.data.data() + y * raw.row_bytes,
                static_cast<std::size_t>(raw.width) * 3);
  return img;
}

DepthImage decode_png_depth(std::span<const std::uint8_t> bytes) {
  auto raw = decode_png_raw(bytes);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY || raw.bit_depth != 16)
    throw ParseError("png: expected 16-bit grayscale");
  DepthImage img(raw.width, raw.height, 1);
  for (int y = 0; y < raw.height; ++y) {
    const auto* row = raw.data.data() + y * raw.row_bytes;
    for (int x = 0; x < raw.width; ++x)
      img.at(x, y) = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
  }
  return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  write_file(path, encode_png(img));
}

void write_png(const std::filesystem::path& path, const DepthImage& img) {
  write_file(path, encode_png(img));
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  try {
    return decode_png_rgb(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

DepthImage read_png_depth(const std::filesystem::path& path) {
  try {
    return decode_png_depth(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

Bytes encode_wav(std::span<const float> samples, int sample_rate_hz) {
  static_assert(std::numeric_limits<float>::is_iec559);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  Bytes b;
  b.reserve(44 + data_bytes);
  put_tag(b, "RIFF");
  put_u32(b, 36 + data_bytes);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, 3);  // IEEE float
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(sample_rate_hz));
  put_u32(b, static_cast<std::uint32_t>(sample_rate_hz) * 4);
  put_u16(b, 4);
  put_u16(b, 32);
  put_tag(b, "data");
  put_u32(b, data_bytes);
  for (float s : samples) put_u32(b, std::bit_cast<std::uint32_t>(s));
  return b;
}

WavData decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE"))
    throw ParseError("wav: not a RIFF/WAVE stream");
  WavData out;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const auto size = get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (body + size > b.size()) throw ParseError("wav: truncated chunk");
    if (tag_is(b, at, "fmt ")) {
      if (size < 16) throw ParseError("wav: short fmt chunk");
      if (get_u16(b, body) != 3 || get_u16(b, body + 2) != 1 || get_u16(b, body + 14) != 32)
        throw ParseError("wav: expected mono 32-bit float");
      out.sample_rate_hz = static_cast<int>(get_u32(b, body + 4));
      have_fmt = true;
    } else if (tag_is(b, at, "data")) {
      if (!have_fmt) throw ParseError("wav: data before fmt");
      out.samples.resize(size / 4);
      for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = std::bit_cast<float>(get_u32(b, body + 4 * i));
      return out;
    }
    at = body + size + (size & 1);
  }
  throw ParseError("wav: missing data chunk");
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate_hz) {
  write_file(path, encode_wav(samples, sample_rate_hz));
}

WavData read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.filename().string() + " (" + path.string() + ")");
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  auto b = read_file(path);
  return std::string(b.begin(), b.end());
}

}  // namespace xcap::model

namespace xcap::model {

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ParseError("base64: length not a multiple of 4");
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int d;
      if (c == '=' && last && k >= 2) {
        ++pad;
        d = 0;
      } else {
        if (pad > 0) throw ParseError("base64: data after padding");
        d = b64_value(c);
        if (d < 0) throw ParseError("base64: invalid character");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace xcap::model
