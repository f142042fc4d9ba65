#include "gmbp/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "gmbp/error.hpp"

namespace gmbp {

namespace {

void check_inputs(const GrayImage& image, const InpaintMask& mask, const FilterBank& bank,
                  const BaselineConfig& config) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorKind::DimensionMismatch, "mask and image sizes differ");
  }
  if (bank.patch_size < 1 || bank.filters.empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty filter bank");
  }
  for (const auto& f : bank.filters) {
    if (f.size() != static_cast<Eigen::Index>(bank.dimension())) {
      throw Error(ErrorKind::DimensionMismatch, "filter length does not match patch size");
    }
  }
  config.validate(bank.filters.size());
}

double alpha(const BaselineConfig& config, std::size_t f) {
  return config.alphas.empty() ? 1.0 : config.alphas[f];
}

// Calls body(x0, y0) for every window whose pixels include an unknown one.
template <typename Body>
void for_each_window(const InpaintMask& mask, int size, Body&& body) {
  for (int y0 = 0; y0 + size <= mask.height(); ++y0) {
    for (int x0 = 0; x0 + size <= mask.width(); ++x0) {
      bool touched = false;
      for (int dy = 0; dy < size && !touched; ++dy) {
        for (int dx = 0; dx < size && !touched; ++dx) touched = mask(x0 + dx, y0 + dy);
      }
      if (touched) body(x0, y0);
    }
  }
}

Eigen::VectorXd window(const GrayImage& image, int x0, int y0, int size) {
  Eigen::VectorXd v(size * size);
  for (int dy = 0; dy < size; ++dy) {
    for (int dx = 0; dx < size; ++dx) v(dy * size + dx) = image(x0 + dx, y0 + dy);
  }
  return v;
}

}  // namespace

void BaselineConfig::validate(std::size_t filters) const {
  if (!alphas.empty() && alphas.size() != filters) {
    throw Error(ErrorKind::InvalidArgument, "need one alpha per filter");
  }
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "alphas must be positive");
  }
  if (!(step_size > 0.0)) throw Error(ErrorKind::InvalidArgument, "step_size must be positive");
  if (iterations < 0) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 0");
}

ImageMatrix log_prior_gradient(const GrayImage& image, const InpaintMask& mask,
                               const FilterBank& bank, const BaselineConfig& config) {
  check_inputs(image, mask, bank, config);
  const int size = bank.patch_size;
  ImageMatrix grad = ImageMatrix::Zero(image.height(), image.width());
  for_each_window(mask, size, [&](int x0, int y0) {
    const Eigen::VectorXd xc = window(image, x0, y0, size);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(xc.size());
    for (std::size_t f = 0; f < bank.filters.size(); ++f) {
      const double r = bank.filters[f].dot(xc);
      g += (-alpha(config, f) * r / (1.0 + 0.5 * r * r)) * bank.filters[f];
    }
    for (int dy = 0; dy < size; ++dy) {
      for (int dx = 0; dx < size; ++dx) {
        if (mask(x0 + dx, y0 + dy)) grad(y0 + dy, x0 + dx) += g(dy * size + dx);
      }
    }
  });
  return grad;
}

double log_prior_energy(const GrayImage& image, const InpaintMask& mask, const FilterBank& bank,
                        const BaselineConfig& config) {
  check_inputs(image, mask, bank, config);
  const int size = bank.patch_size;
  double energy = 0.0;
  for_each_window(mask, size, [&](int x0, int y0) {
    const Eigen::VectorXd xc = window(image, x0, y0, size);
    for (std::size_t f = 0; f < bank.filters.size(); ++f) {
      const double r = bank.filters[f].dot(xc);
      energy -= alpha(config, f) * std::log1p(0.5 * r * r);
    }
  });
  return energy;
}

BaselineResult run_baseline(const GrayImage& image, const InpaintMask& mask,
                            const FilterBank& bank, const BaselineConfig& config) {
  check_inputs(image, mask, bank, config);
  BaselineResult result{image, {}};
  ImageMatrix& x = result.image.pixels();
  const MaskMatrix& unknown = mask.unknown();
  x = unknown.select(ImageMatrix::Constant(x.rows(), x.cols(), config.initial_value), x);
  result.energy.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    const ImageMatrix grad = log_prior_gradient(result.image, mask, bank, config);
    x = unknown.select((x + config.step_size * grad).cwiseMax(0.0).cwiseMin(255.0), x);
    result.energy.push_back(log_prior_energy(result.image, mask, bank, config));
  }
  return result;
}

}  // namespace gmbp
