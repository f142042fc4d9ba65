#ifndef GMBP_BASELINE_HPP_
#define GMBP_BASELINE_HPP_

#include <vector>

#include "gmbp/image.hpp"
#include "gmbp/prior.hpp"

namespace gmbp {

// Gradient ascent on the Student-t field-of-experts log prior
//   sum_c sum_f -alpha_f log(1 + <J_f, x_c>^2 / 2)
// over the 2x2 windows that touch an unknown pixel.
struct BaselineConfig {
  std::vector<double> alphas;  // empty = 1.0 per filter
  double step_size = 0.1;
  int iterations = 2500;
  double initial_value = 128.0;

  void validate(std::size_t filters) const;
};

// Gradient of the log prior with respect to every pixel; zero on observed pixels.
ImageMatrix log_prior_gradient(const GrayImage& image, const InpaintMask& mask,
                               const FilterBank& bank, const BaselineConfig& config = {});

double log_prior_energy(const GrayImage& image, const InpaintMask& mask, const FilterBank& bank,
                        const BaselineConfig& config = {});

struct BaselineResult {
  GrayImage image;
  std::vector<double> energy;  // after each iteration
};

// Unknown pixels start at config.initial_value; x <- clamp(x + step * grad, 0, 255).
BaselineResult run_baseline(const GrayImage& image, const InpaintMask& mask,
                            const FilterBank& bank, const BaselineConfig& config = {});

}  // namespace gmbp

#endif  // GMBP_BASELINE_HPP_
