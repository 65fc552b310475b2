#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "hobs/image.hpp"

namespace hobs {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

RasterImage from_bytes(int width, int height, const std::uint8_t* bytes) {
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = bytes[i] / 255.0;
  return RasterImage(width, height, std::move(data),
                     Calibration::default_for(width, height));
}

// Header token reader for netpbm: skips whitespace and '#' comments.
class PgmHeader {
 public:
  explicit PgmHeader(const std::vector<std::uint8_t>& b) : b_(b) {}

  int next_int() {
    skip();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) {
      throw MalformedHeader("PGM: expected an integer in header");
    }
    long value = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      value = value * 10 + (b_[pos_++] - '0');
      if (value > 1'000'000) throw MalformedHeader("PGM: header value too large");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) {
      throw MalformedHeader("PGM: missing whitespace after maxval");
    }
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 2;
};

bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

struct PngReadBuffer {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void png_read_from_buffer(png_structp png, png_bytep out, png_size_t n) {
  auto* buf = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
  if (buf->pos + n > buf->bytes->size()) {
    png_error(png, "truncated PNG");
  }
  std::copy_n(buf->bytes->data() + buf->pos, n, out);
  buf->pos += n;
}

// libpng reports errors by longjmp back to the setjmp in the caller's frame;
// the message is stashed here so the caller can throw after unwinding.
void png_error_handler(png_structp png, png_const_charp msg) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           png_error_handler, png_warning_handler);
  if (!png) throw IoError("PNG: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  PngReadBuffer buf{&bytes, 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  int width = 0;
  int height = 0;
  bool gray = true;
  if (setjmp(png_jmpbuf(png))) {
    throw MalformedHeader("PNG: " + error);
  }
  png_set_read_fn(png, &buf, png_read_from_buffer);
  png_read_info(png, info);
  gray = png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY;
  if (gray) {
    const int depth = png_get_bit_depth(png, info);
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    png_read_update_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    pixels.resize(static_cast<std::size_t>(width) * height);
    rows.resize(height);
    for (int r = 0; r < height; ++r) {
      rows[r] = pixels.data() + static_cast<std::size_t>(r) * width;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  if (!gray) {
    throw UnsupportedFormat("PNG: only grayscale images without alpha are supported");
  }
  return from_bytes(width, height, pixels.data());
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            png_error_handler, png_warning_handler);
  if (!png) throw IoError("PNG: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> row(image.width());
  if (setjmp(png_jmpbuf(png))) {
    throw IoError("PNG: " + error);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) row[u] = quantize(image.at(u, v));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  return out;
}

}  // namespace

RasterImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw UnsupportedFormat("not a binary PGM (P5) file");
  }
  PgmHeader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width <= 0 || height <= 0) throw MalformedHeader("PGM: empty dimensions");
  if (maxval != 255) throw UnsupportedFormat("PGM: only maxval 255 is supported");
  const std::size_t offset = header.raster_offset();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() < offset + n) throw MalformedHeader("PGM: truncated raster");
  return from_bytes(width, height, bytes.data() + offset);
}

std::vector<std::uint8_t> encode_pgm(const RasterImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (double d : image.data()) out.push_back(quantize(d));
  return out;
}

RasterImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw UnsupportedFormat("'" + path.string() + "' is neither PGM (P5) nor PNG");
}

void save_image(const RasterImage& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_file(path, encode_png(image));
  } else if (ext == ".pgm") {
    write_file(path, encode_pgm(image));
  } else {
    throw UnsupportedFormat("cannot infer image format from '" + path.string() +
                            "' (use .pgm or .png)");
  }
}

}  // namespace hobs
