#include "adaptune/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace adaptune {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool is_pnm(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

std::uint32_t quantize(double s, std::uint32_t max_code) {
  s = std::isnan(s) ? 0.0 : std::clamp(s, 0.0, 1.0);
  return static_cast<std::uint32_t>(std::lround(s * max_code));  // ties away from zero
}

// ---------------------------------------------------------------- PNM

RasterImage read_pnm(std::istream& in, const std::filesystem::path& path) {
  auto fail = [&](const std::string& why) -> IoError {
    return IoError("cannot load '" + path.string() + "': " + why);
  };
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw fail("only binary P5/P6 is supported");
  auto next_int = [&]() {
    // skip whitespace and comments
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    if (!(in >> v)) throw fail("malformed header");
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw fail("invalid header values");
  in.get();  // single whitespace byte before raster
  const int channels = magic == "P6" ? 3 : 1;
  const int bytes = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  std::vector<unsigned char> raw(count * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw fail("truncated raster");
  RasterImage img(static_cast<int>(w), static_cast<int>(h), channels);
  std::size_t k = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c, ++k) {
        const unsigned code = bytes == 2 ? (raw[2 * k] << 8) | raw[2 * k + 1] : raw[k];
        img.at(x, y, c) = std::min(1.0, static_cast<double>(code) / static_cast<double>(maxval));
      }
  return img;
}

void write_pnm(const RasterImage& img, const std::filesystem::path& path, int bitdepth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const std::uint32_t max_code = (1u << bitdepth) - 1;
  out << (img.channels() == 3 ? "P6" : "P5") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << max_code << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(img.samples().size() * (bitdepth / 8));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        const auto code = quantize(img.at(x, y, c), max_code);
        if (bitdepth == 16) raw.push_back(static_cast<unsigned char>(code >> 8));
        raw.push_back(static_cast<unsigned char>(code & 0xff));
      }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------- PNG

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}
void png_warning_fn(png_structp, png_const_charp) {}

RasterImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open '" + path.string() + "'");
  std::string why = "libpng error";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &why, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot load '" + path.string() + "': libpng init failed");
  }
  std::vector<unsigned char> buffer;
  std::vector<png_bytep> rows;
  // libpng reports errors through longjmp; nothing with a non-trivial
  // destructor may be created between setjmp and the last png call.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot load '" + path.string() + "': " + why);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  const int bit_depth_raw = png_get_bit_depth(png, info);
  if (bit_depth_raw == 16) png_set_swap(png);  // little-endian 16-bit samples
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3)
    throw IoError("cannot load '" + path.string() + "': unsupported channel layout");
  RasterImage img(width, height, channels);
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const std::size_t k = static_cast<std::size_t>(x) * channels + c;
        unsigned code;
        if (depth == 16) {
          std::uint16_t v;
          std::memcpy(&v, rows[y] + 2 * k, 2);
          code = v;
        } else {
          code = rows[y][k];
        }
        img.at(x, y, c) = code / scale;
      }
  return img;
}

void write_png(const RasterImage& img, const std::filesystem::path& path, int bitdepth) {
  const int channels = img.channels();
  const std::uint32_t max_code = (1u << bitdepth) - 1;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * channels * (bitdepth / 8);
  std::vector<unsigned char> buffer(rowbytes * img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < channels; ++c) {
        const std::size_t k = static_cast<std::size_t>(x) * channels + c;
        const auto code = quantize(img.at(x, y, c), max_code);
        unsigned char* row = buffer.data() + rowbytes * y;
        if (bitdepth == 16) {
          row[2 * k] = static_cast<unsigned char>(code >> 8);  // PNG is big-endian
          row[2 * k + 1] = static_cast<unsigned char>(code & 0xff);
        } else {
          row[k] = static_cast<unsigned char>(code);
        }
      }
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) rows[y] = buffer.data() + rowbytes * y;

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write '" + path.string() + "'");
  std::string why = "libpng error";
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &why, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("cannot write '" + path.string() + "': libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("cannot write '" + path.string() + "': " + why);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width(), img.height(), bitdepth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
  if (is_pnm(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_pnm(in, path);
  }
  return read_png(path);
}

void save_image(const RasterImage& img, const std::filesystem::path& path, int bitdepth) {
  if (bitdepth != 8 && bitdepth != 16) throw ArgumentError("bit depth must be 8 or 16");
  if (img.empty()) throw ArgumentError("cannot save an empty image");
  if (is_pnm(path))
    write_pnm(img, path, bitdepth);
  else
    write_png(img, path, bitdepth);
}

BlurKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file '" + path.string() + "'");
  int side = 0;
  if (!(in >> side) || side < 1 || side % 2 == 0)
    throw IoError("kernel file '" + path.string() + "': bad side");
  std::vector<double> w(static_cast<std::size_t>(side) * side);
  for (double& v : w)
    if (!(in >> v)) throw IoError("kernel file '" + path.string() + "': too few weights");
  try {
    return BlurKernel(side, std::move(w), /*renormalize=*/true);
  } catch (const ArgumentError& e) {
    throw IoError("kernel file '" + path.string() + "': " + e.what());
  }
}

void save_kernel(const BlurKernel& kernel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << kernel.side() << '\n' << std::setprecision(17);
  for (int y = 0; y < kernel.side(); ++y) {
    for (int x = 0; x < kernel.side(); ++x) out << (x ? " " : "") << kernel.at(x, y);
    out << '\n';
  }
}

}  // namespace adaptune
