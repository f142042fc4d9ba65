#ifndef GMBP_IMAGE_HPP_
#define GMBP_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace gmbp {

using ImageMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Real-valued grayscale image, nominal range [0, 255]; pixels(y, x).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0)
      : pixels_(ImageMatrix::Constant(height, width, fill)) {}
  explicit GrayImage(ImageMatrix pixels) : pixels_(std::move(pixels)) {}

  int width() const { return static_cast<int>(pixels_.cols()); }
  int height() const { return static_cast<int>(pixels_.rows()); }
  double operator()(int x, int y) const { return pixels_(y, x); }
  double& operator()(int x, int y) { return pixels_(y, x); }

  const ImageMatrix& pixels() const { return pixels_; }
  ImageMatrix& pixels() { return pixels_; }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           a.pixels_ == b.pixels_;
  }

 private:
  ImageMatrix pixels_;
};

// true = unknown pixel, to be inpainted.
class InpaintMask {
 public:
  InpaintMask() = default;
  InpaintMask(int width, int height, bool fill = false)
      : unknown_(MaskMatrix::Constant(height, width, fill)) {}
  explicit InpaintMask(MaskMatrix unknown) : unknown_(std::move(unknown)) {}

  int width() const { return static_cast<int>(unknown_.cols()); }
  int height() const { return static_cast<int>(unknown_.rows()); }
  bool operator()(int x, int y) const { return unknown_(y, x); }
  bool& operator()(int x, int y) { return unknown_(y, x); }
  std::size_t count() const { return static_cast<std::size_t>(unknown_.count()); }

  const MaskMatrix& unknown() const { return unknown_; }

  friend bool operator==(const InpaintMask& a, const InpaintMask& b) {
    return a.unknown_.rows() == b.unknown_.rows() && a.unknown_.cols() == b.unknown_.cols() &&
           (a.unknown_ == b.unknown_).all();
  }

 private:
  MaskMatrix unknown_;
};

struct Patch {
  int size = 0;
  Eigen::VectorXd values;  // size*size, row-major
  int x = 0, y = 0;        // top-left corner in the source image
};

// 8-bit grayscale PGM (P5, maxval 255) or 8-bit grayscale PNG.
GrayImage load_image(const std::filesystem::path& path);
// Clamps to [0, 255] and rounds. ".png" writes PNG, anything else PGM.
void save_image(const GrayImage& image, const std::filesystem::path& path);

InpaintMask load_mask(const std::filesystem::path& path, int threshold = 128);
void save_mask(const InpaintMask& mask, const std::filesystem::path& path);
InpaintMask mask_from_image(const GrayImage& image, int threshold = 128);

// Quantized copy, as written by save_image.
GrayImage quantize(const GrayImage& image);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes);

// Top-left corners drawn uniformly with replacement, deterministic in seed.
std::vector<Patch> extract_patches(const GrayImage& image, int size, std::size_t count,
                                   std::uint64_t seed);

// 10 log10(255^2 / MSE); +infinity when MSE is zero.
double psnr(const GrayImage& reference, const GrayImage& test);
double psnr(const GrayImage& reference, const GrayImage& test, const InpaintMask& region);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

// Mean SSIM over all fully-contained Gaussian windows.
double ssim(const GrayImage& reference, const GrayImage& test, const SsimOptions& options = {});

}  // namespace gmbp

#endif  // GMBP_IMAGE_HPP_
