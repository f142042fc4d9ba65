#ifndef GMBP_PRIOR_HPP_
#define GMBP_PRIOR_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmbp/gaussmix.hpp"
#include "gmbp/image.hpp"

namespace gmbp {

inline constexpr double kSigmaMin = 1e-3;
inline constexpr int kModelFormatVersion = 1;

// Zero-DC patch filters, unit norm, descending explained variance.
struct FilterBank {
  int patch_size = 2;
  std::vector<Eigen::VectorXd> filters;
  std::vector<double> variances;   // eigenvalue of each kept filter
  double dropped_variance = 0.0;
  double dropped_dc_cosine = 1.0;  // |cos| between dropped component and DC

  std::size_t dimension() const { return static_cast<std::size_t>(patch_size * patch_size); }
};

struct Gaussian1D {
  double weight = 1.0;
  double mean = 0.0;
  double sigma = 1.0;
  friend bool operator==(const Gaussian1D&, const Gaussian1D&) = default;
};

struct PriorMetadata {
  std::uint64_t pca_patches = 0;
  std::uint64_t em_samples = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const PriorMetadata&, const PriorMetadata&) = default;
};

struct PriorModel {
  FilterBank bank;
  std::vector<std::vector<Gaussian1D>> experts;  // one mixture per filter
  PriorMetadata metadata;
};

// Receives non-fatal diagnostics (e.g. a dropped PCA component that does
// not look like the uniform-gray patch). Defaults to stderr.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

FilterBank learn_filters(std::span<const Patch> patches);

// responses[f][p] = <filter f, patch p>
std::vector<std::vector<double>> filter_responses(const FilterBank& bank,
                                                  std::span<const Patch> patches);

std::vector<Gaussian1D> kmeans_init(std::span<const double> data, int k, std::uint64_t seed);

struct EmOptions {
  int components = 3;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  int max_iterations = 500;
};

struct EmResult {
  std::vector<Gaussian1D> components;
  // Mean log-likelihood at the initialization and after every M-step.
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;
};

EmResult fit_gmm_em(std::span<const double> data, const EmOptions& options = {});

// Mean log-likelihood of data under the normalized mixture.
double mixture_log_likelihood(std::span<const double> data,
                              std::span<const Gaussian1D> components);

// Population excess kurtosis.
double excess_kurtosis(std::span<const double> data);

// One expert component as a degenerate n-D Gaussian:
// beta * exp(-(<filter, x> - mu)^2 / (2 sigma^2)) = exp(log beta - (x - m)' L (x - m)).
Component lift_1d(const Gaussian1D& g, const Eigen::VectorXd& filter);
Mixture lift_expert(std::span<const Gaussian1D> expert, const Eigen::VectorXd& filter);

// Unnormalized expert value sum_i beta_i exp(-(r - mu_i)^2 / (2 sigma_i^2)).
double expert_value(std::span<const Gaussian1D> expert, double response);

// Product over experts; component count is the product of expert sizes.
Mixture build_clique_potential(const PriorModel& model, WeightMode mode = WeightMode::Exact);

struct PriorLearningOptions {
  std::size_t pca_patches = 50000;
  std::size_t em_samples = 5000;
  int components = 3;
  int patch_size = 2;
  std::uint64_t seed = 0;
};

// PCA filters on one patch sample, EM experts on an independent sample.
// em_responses, when given, receives the filter responses the experts were fit to.
PriorModel learn_prior(std::span<const GrayImage> images, const PriorLearningOptions& options,
                       std::vector<std::vector<double>>* em_responses = nullptr);

std::string format_model(const PriorModel& model);
PriorModel parse_model(const std::string& text);
void save_model(const PriorModel& model, const std::filesystem::path& path);
PriorModel load_model(const std::filesystem::path& path);

}  // namespace gmbp

#endif  // GMBP_PRIOR_HPP_
