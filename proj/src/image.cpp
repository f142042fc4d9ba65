#include "gmbp/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <string>

#include <png.h>

#include "gmbp/error.hpp"
#include "gmbp/random.hpp"

namespace gmbp {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    long value = 0;
    int digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw Error(ErrorKind::CorruptHeader, "PGM header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorKind::CorruptHeader, "expected integer in PGM header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::CorruptHeader, "missing separator before PGM raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 2;
};

struct PngReadState {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->pos + length > state->bytes->size()) png_error(png, "truncated PNG");
  std::copy_n(state->bytes->data() + state->pos, length, out);
  state->pos += length;
}

void png_write_to_memory(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

// libpng reports errors by longjmp; the message is stashed for rethrowing as
// an Error once control is back in C++ frames.
void png_record_error(png_structp png, png_const_charp message) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
  if (slot) *slot = message;
  png_longjmp(png, 1);
}

void png_warn_silently(png_structp, png_const_charp) {}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_record_error,
                                           png_warn_silently);
  if (!png) throw Error(ErrorKind::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw Error(ErrorKind::Io, "png_create_info_struct failed");

  PngReadState state{&bytes, 0};
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<png_byte> raster;
  std::vector<png_bytep> rows;
  volatile ErrorKind failure = ErrorKind::CorruptHeader;
  if (setjmp(png_jmpbuf(png))) {
    throw Error(failure, "PNG: " + error);
  }
  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    failure = ErrorKind::UnsupportedFormat;
    error = "not single-channel grayscale";
    png_longjmp(png, 1);
  }
  if (bit_depth != 8) {
    failure = ErrorKind::UnsupportedFormat;
    error = "bit depth " + std::to_string(bit_depth) + " (need 8)";
    png_longjmp(png, 1);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  raster.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + std::size_t{y} * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  ImageMatrix pixels(height, width);
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) pixels(y, x) = rows[y][x];
  }
  return GrayImage(std::move(pixels));
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_record_error,
                                            png_warn_silently);
  if (!png) throw Error(ErrorKind::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw Error(ErrorKind::Io, "png_create_info_struct failed");

  std::vector<std::uint8_t> out;
  std::vector<png_byte> row(static_cast<std::size_t>(image.width()));
  if (setjmp(png_jmpbuf(png))) {
    throw Error(ErrorKind::Io, "PNG: " + error);
  }
  png_set_write_fn(png, &out, png_write_to_memory, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) row[static_cast<std::size_t>(x)] = to_byte(image(x, y));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  return out;
}

void require_same_shape(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

double psnr_from_mse(double mse) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Valid-mode separable filtering with a symmetric 1-D kernel.
ImageMatrix filter_valid(const ImageMatrix& in, const Eigen::VectorXd& kernel) {
  const Eigen::Index k = kernel.size();
  const Eigen::Index rows = in.rows() - k + 1;
  const Eigen::Index cols = in.cols() - k + 1;
  ImageMatrix horizontal(in.rows(), cols);
  for (Eigen::Index y = 0; y < in.rows(); ++y) {
    for (Eigen::Index x = 0; x < cols; ++x) {
      horizontal(y, x) = in.row(y).segment(x, k).dot(kernel.transpose());
    }
  }
  ImageMatrix out(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y) {
    for (Eigen::Index x = 0; x < cols; ++x) {
      out(y, x) = horizontal.col(x).segment(y, k).dot(kernel);
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(image.width() * image.height()));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out.push_back(to_byte(image(x, y)));
  }
  return out;
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorKind::UnsupportedFormat, "not a PGM or PNG file");
  }
  if (bytes[1] != '5') {
    throw Error(ErrorKind::UnsupportedFormat,
                std::string("PNM variant P") + static_cast<char>(bytes[1]) +
                    " (only binary grayscale P5)");
  }
  PgmHeaderReader reader(bytes);
  const long width = reader.next_int();
  const long height = reader.next_int();
  const long maxval = reader.next_int();
  if (width <= 0 || height <= 0) throw Error(ErrorKind::CorruptHeader, "zero-sized PGM");
  if (maxval != 255) {
    throw Error(ErrorKind::UnsupportedFormat,
                "PGM maxval " + std::to_string(maxval) + " (need 255)");
  }
  const std::size_t offset = reader.raster_offset();
  const auto expected = static_cast<std::size_t>(width * height);
  if (bytes.size() < offset + expected) {
    throw Error(ErrorKind::CorruptHeader, "PGM raster truncated");
  }
  ImageMatrix pixels(height, width);
  for (long y = 0; y < height; ++y) {
    for (long x = 0; x < width; ++x) {
      pixels(y, x) = bytes[offset + static_cast<std::size_t>(y * width + x)];
    }
  }
  return GrayImage(std::move(pixels));
}

GrayImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "missing file " + path.string());
  const auto bytes = read_file(path);
  return has_png_signature(bytes) ? decode_png(bytes) : decode_pgm(bytes);
}

void save_image(const GrayImage& image, const std::filesystem::path& path) {
  const bool png = path.extension() == ".png" || path.extension() == ".PNG";
  write_file(path, png ? encode_png(image) : encode_pgm(image));
}

InpaintMask mask_from_image(const GrayImage& image, int threshold) {
  return InpaintMask(MaskMatrix(image.pixels().array() >= static_cast<double>(threshold)));
}

InpaintMask load_mask(const std::filesystem::path& path, int threshold) {
  return mask_from_image(load_image(path), threshold);
}

void save_mask(const InpaintMask& mask, const std::filesystem::path& path) {
  GrayImage image(ImageMatrix(mask.unknown().cast<double>() * 255.0));
  save_image(image, path);
}

GrayImage quantize(const GrayImage& image) {
  return GrayImage(ImageMatrix(image.pixels().unaryExpr(
      [](double v) { return static_cast<double>(to_byte(v)); })));
}

std::vector<Patch> extract_patches(const GrayImage& image, int size, std::size_t count,
                                   std::uint64_t seed) {
  if (size < 1) throw Error(ErrorKind::InvalidArgument, "patch size must be positive");
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "patch count must be positive");
  if (image.width() < size || image.height() < size) {
    throw Error(ErrorKind::InvalidArgument, "image smaller than patch");
  }
  const auto cols = static_cast<std::uint64_t>(image.width() - size + 1);
  const auto rows = static_cast<std::uint64_t>(image.height() - size + 1);
  Rng rng(seed);
  std::vector<Patch> patches;
  patches.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t corner = uniform_index(rng, cols * rows);
    Patch p;
    p.size = size;
    p.x = static_cast<int>(corner % cols);
    p.y = static_cast<int>(corner / cols);
    p.values.resize(size * size);
    for (int dy = 0; dy < size; ++dy) {
      for (int dx = 0; dx < size; ++dx) p.values(dy * size + dx) = image(p.x + dx, p.y + dy);
    }
    patches.push_back(std::move(p));
  }
  return patches;
}

double psnr(const GrayImage& reference, const GrayImage& test) {
  require_same_shape(reference, test);
  const double mse = (reference.pixels() - test.pixels()).squaredNorm() /
                     static_cast<double>(reference.pixels().size());
  return psnr_from_mse(mse);
}

double psnr(const GrayImage& reference, const GrayImage& test, const InpaintMask& region) {
  require_same_shape(reference, test);
  if (region.width() != reference.width() || region.height() != reference.height()) {
    throw Error(ErrorKind::DimensionMismatch, "region mask size differs from images");
  }
  const std::size_t selected = region.count();
  if (selected == 0) throw Error(ErrorKind::EmptyRegion, "PSNR region selects no pixels");
  const double sse =
      region.unknown().select((reference.pixels() - test.pixels()).array().square(), 0.0).sum();
  return psnr_from_mse(sse / static_cast<double>(selected));
}

double ssim(const GrayImage& reference, const GrayImage& test, const SsimOptions& options) {
  require_same_shape(reference, test);
  if (reference.width() < options.window || reference.height() < options.window) {
    throw Error(ErrorKind::InvalidArgument, "image smaller than the SSIM window");
  }
  Eigen::VectorXd kernel(options.window);
  const double center = (options.window - 1) / 2.0;
  for (int i = 0; i < options.window; ++i) {
    const double d = i - center;
    kernel(i) = std::exp(-d * d / (2.0 * options.sigma * options.sigma));
  }
  kernel /= kernel.sum();

  const ImageMatrix& x = reference.pixels();
  const ImageMatrix& y = test.pixels();
  const ImageMatrix mu_x = filter_valid(x, kernel);
  const ImageMatrix mu_y = filter_valid(y, kernel);
  const ImageMatrix xx = filter_valid(x.cwiseProduct(x), kernel);
  const ImageMatrix yy = filter_valid(y.cwiseProduct(y), kernel);
  const ImageMatrix xy = filter_valid(x.cwiseProduct(y), kernel);

  const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
  const double c2 = std::pow(options.k2 * options.dynamic_range, 2);
  const auto mx = mu_x.array();
  const auto my = mu_y.array();
  const Eigen::ArrayXXd var_x = xx.array() - mx.square();
  const Eigen::ArrayXXd var_y = yy.array() - my.square();
  const Eigen::ArrayXXd cov = xy.array() - mx * my;
  const Eigen::ArrayXXd map = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                              ((mx.square() + my.square() + c1) * (var_x + var_y + c2));
  return map.mean();
}

}  // namespace gmbp
