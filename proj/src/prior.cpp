#include "gmbp/prior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>

#include "gmbp/error.hpp"
#include "gmbp/random.hpp"

namespace gmbp {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;
constexpr double kDcCosineThreshold = 0.95;

std::mutex warning_mutex;
WarningSink warning_sink = [](const std::string& message) {
  std::cerr << "warning: " << message << '\n';
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// First clearly non-zero entry positive, so filter signs are reproducible.
void canonical_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

double log_normal_pdf(double x, const Gaussian1D& g) {
  const double z = (x - g.mean) / g.sigma;
  return -0.5 * z * z - std::log(g.sigma) - kLogSqrtTwoPi;
}

std::vector<Patch> sample_patches(std::span<const GrayImage> images, int size, std::size_t count,
                                  std::uint64_t seed) {
  std::vector<Patch> out;
  out.reserve(count);
  const std::size_t per_image = count / images.size();
  const std::size_t extra = count % images.size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t n = per_image + (i < extra ? 1 : 0);
    if (n == 0) continue;
    auto patches = extract_patches(images[i], size, n, derive_seed(seed, i));
    std::move(patches.begin(), patches.end(), std::back_inserter(out));
  }
  return out;
}

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

class ModelReader {
 public:
  explicit ModelReader(const std::string& text) : in_(text) {}

  void expect(const std::string& keyword) {
    const std::string token = word();
    if (token != keyword) fail("expected '" + keyword + "', found '" + token + "'");
  }

  std::string word() {
    std::string token;
    if (!(in_ >> token)) fail("unexpected end of file");
    return token;
  }

  double number() {
    const std::string token = word();
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') fail("bad number '" + token + "'");
    return v;
  }

  std::uint64_t count() {
    const std::string token = word();
    if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit)) {
      fail("bad count '" + token + "'");
    }
    return std::stoull(token);
  }

  void expect_end() {
    std::string token;
    if (in_ >> token) fail("trailing content '" + token + "'");
  }

  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorKind::MalformedModel, what);
  }

 private:
  std::istringstream in_;
};

}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(warning_mutex);
  warning_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard lock(warning_mutex);
  if (warning_sink) warning_sink(message);
}

FilterBank learn_filters(std::span<const Patch> patches) {
  if (patches.empty()) throw Error(ErrorKind::TooFewPatches, "no patches");
  const int size = patches.front().size;
  const auto n = static_cast<Eigen::Index>(size * size);
  if (patches.size() < static_cast<std::size_t>(n) + 1) {
    throw Error(ErrorKind::TooFewPatches, "need at least " + std::to_string(n + 1) +
                                              " patches, got " + std::to_string(patches.size()));
  }
  Eigen::MatrixXd data(static_cast<Eigen::Index>(patches.size()), n);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (patches[i].size != size || patches[i].values.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "patches of mixed sizes");
    }
    data.row(static_cast<Eigen::Index>(i)) = patches[i].values.transpose();
  }
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd covariance =
      centered.transpose() * centered / static_cast<double>(patches.size() - 1);
  if (covariance.trace() <= 1e-12) {
    throw Error(ErrorKind::DegeneratePatches, "patch set has zero variance");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  const Eigen::VectorXd dc = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  const Eigen::VectorXd top = eig.eigenvectors().col(n - 1);

  FilterBank bank;
  bank.patch_size = size;
  bank.dropped_variance = eig.eigenvalues()(n - 1);
  bank.dropped_dc_cosine = std::abs(top.dot(dc));

  if (bank.dropped_dc_cosine >= kDcCosineThreshold) {
    // The dropped component is the uniform-gray direction; take the
    // remaining components from the covariance restricted to its orthogonal
    // complement, so every filter is exactly zero-DC.
    const Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(n, n) - dc * dc.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> restricted(projector * covariance * projector);
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = n - 1; i >= 0; --i) order.push_back(i);
    const auto dc_like = std::max_element(order.begin(), order.end(), [&](auto a, auto b) {
      return std::abs(restricted.eigenvectors().col(a).dot(dc)) <
             std::abs(restricted.eigenvectors().col(b).dot(dc));
    });
    order.erase(dc_like);
    for (Eigen::Index i : order) {
      Eigen::VectorXd v = restricted.eigenvectors().col(i);
      v -= v.dot(dc) * dc;
      v.normalize();
      canonical_sign(v);
      bank.filters.push_back(v);
      bank.variances.push_back(restricted.eigenvalues()(i));
    }
  } else {
    warn("dropped principal component has |cos| = " + format_double(bank.dropped_dc_cosine) +
         " with the uniform-gray patch (expected >= 0.95)");
    for (Eigen::Index i = n - 2; i >= 0; --i) {
      Eigen::VectorXd v = eig.eigenvectors().col(i);
      canonical_sign(v);
      bank.filters.push_back(v);
      bank.variances.push_back(eig.eigenvalues()(i));
    }
  }
  return bank;
}

std::vector<std::vector<double>> filter_responses(const FilterBank& bank,
                                                  std::span<const Patch> patches) {
  std::vector<std::vector<double>> out(bank.filters.size());
  for (auto& r : out) r.reserve(patches.size());
  for (const Patch& p : patches) {
    for (std::size_t f = 0; f < bank.filters.size(); ++f) {
      if (p.values.size() != bank.filters[f].size()) {
        throw Error(ErrorKind::DimensionMismatch, "patch and filter sizes differ");
      }
      out[f].push_back(bank.filters[f].dot(p.values));
    }
  }
  return out;
}

std::vector<Gaussian1D> kmeans_init(std::span<const double> data, int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (data.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientData, std::to_string(data.size()) +
                                                 " points for " + std::to_string(k) + " clusters");
  }
  // Seeded shuffle, then the first k distinct values become the centers.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(rng, i + 1)]);
  }
  std::vector<double> centers;
  for (std::size_t idx : order) {
    if (std::find(centers.begin(), centers.end(), data[idx]) == centers.end()) {
      centers.push_back(data[idx]);
      if (centers.size() == static_cast<std::size_t>(k)) break;
    }
  }
  for (std::size_t i = 0; centers.size() < static_cast<std::size_t>(k); ++i) {
    centers.push_back(data[order[i]]);
  }

  std::vector<int> assignment(data.size(), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
      int best = 0;
      for (int c = 1; c < k; ++c) {
        if (std::abs(data[i] - centers[c]) < std::abs(data[i] - centers[best])) best = c;
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      sum[assignment[i]] += data[i];
      ++members[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (members[c] > 0) centers[c] = sum[c] / static_cast<double>(members[c]);
    }
  }

  std::vector<Gaussian1D> out(k);
  std::vector<double> sq(k, 0.0);
  std::vector<std::size_t> members(k, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = data[i] - centers[assignment[i]];
    sq[assignment[i]] += d * d;
    ++members[assignment[i]];
  }
  for (int c = 0; c < k; ++c) {
    out[c].mean = centers[c];
    out[c].weight = static_cast<double>(members[c]) / static_cast<double>(data.size());
    out[c].sigma = members[c] > 0 ? std::sqrt(sq[c] / static_cast<double>(members[c])) : 0.0;
    out[c].sigma = std::max(out[c].sigma, kSigmaMin);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Gaussian1D& a, const Gaussian1D& b) { return a.mean < b.mean; });
  return out;
}

double mixture_log_likelihood(std::span<const double> data,
                              std::span<const Gaussian1D> components) {
  double total = 0.0;
  std::vector<double> terms(components.size());
  for (double x : data) {
    for (std::size_t c = 0; c < components.size(); ++c) {
      terms[c] = std::log(components[c].weight) + log_normal_pdf(x, components[c]);
    }
    total += detail::log_sum_exp(terms);
  }
  return total / static_cast<double>(data.size());
}

EmResult fit_gmm_em(std::span<const double> data, const EmOptions& options) {
  const int k = options.components;
  EmResult result;
  result.components = kmeans_init(data, k, options.seed);
  auto& comps = result.components;
  const std::size_t n = data.size();
  std::vector<double> resp(n * static_cast<std::size_t>(k));
  std::vector<double> terms(k);

  auto e_step = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) terms[c] = std::log(comps[c].weight) + log_normal_pdf(data[i], comps[c]);
      const double norm = detail::log_sum_exp(terms);
      total += norm;
      for (int c = 0; c < k; ++c) resp[i * k + c] = std::exp(terms[c] - norm);
    }
    return total / static_cast<double>(n);
  };

  double ll = e_step();
  result.log_likelihood.push_back(ll);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (int c = 0; c < k; ++c) {
      double mass = 0.0, first = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        mass += resp[i * k + c];
        first += resp[i * k + c] * data[i];
      }
      comps[c].weight = mass / static_cast<double>(n);
      if (mass <= 0.0) continue;
      const double mean = first / mass;
      double second = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = data[i] - mean;
        second += resp[i * k + c] * d * d;
      }
      comps[c].mean = mean;
      comps[c].sigma = std::max(std::sqrt(second / mass), kSigmaMin);
    }
    const double next = e_step();
    result.log_likelihood.push_back(next);
    result.iterations = iter + 1;
    const double gain = next - ll;
    ll = next;
    if (gain < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double excess_kurtosis(std::span<const double> data) {
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : data) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2) - 3.0;
}

Component lift_1d(const Gaussian1D& g, const Eigen::VectorXd& filter) {
  Eigen::Index pivot = 0;
  if (filter.size() == 0 || filter.cwiseAbs().maxCoeff(&pivot) == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "cannot lift onto a zero filter");
  }
  const Eigen::MatrixXd precision = filter * filter.transpose() / (2.0 * g.sigma * g.sigma);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(filter.size());
  mean(pivot) = g.mean / filter(pivot);
  return from_mean<double>(std::log(g.weight), precision, mean);
}

Mixture lift_expert(std::span<const Gaussian1D> expert, const Eigen::VectorXd& filter) {
  Mixture m;
  m.vars = VarSet::range(filter.size());
  for (const auto& g : expert) m.components.push_back(lift_1d(g, filter));
  return m;
}

double expert_value(std::span<const Gaussian1D> expert, double response) {
  double sum = 0.0;
  for (const auto& g : expert) {
    const double z = (response - g.mean) / g.sigma;
    sum += g.weight * std::exp(-0.5 * z * z);
  }
  return sum;
}

Mixture build_clique_potential(const PriorModel& model, WeightMode mode) {
  if (model.experts.size() != model.bank.filters.size() || model.experts.empty()) {
    throw Error(ErrorKind::InvalidArgument, "model needs one expert per filter");
  }
  Mixture potential = lift_expert(model.experts[0], model.bank.filters[0]);
  for (std::size_t f = 1; f < model.experts.size(); ++f) {
    potential = product(potential, lift_expert(model.experts[f], model.bank.filters[f]), mode);
  }
  return potential;
}

PriorModel learn_prior(std::span<const GrayImage> images, const PriorLearningOptions& options,
                       std::vector<std::vector<double>>* em_responses) {
  if (images.empty()) throw Error(ErrorKind::InvalidArgument, "no training images");
  const auto pca_patches =
      sample_patches(images, options.patch_size, options.pca_patches, derive_seed(options.seed, 1000));
  PriorModel model;
  model.bank = learn_filters(pca_patches);
  const auto em_patches =
      sample_patches(images, options.patch_size, options.em_samples, derive_seed(options.seed, 2000));
  const auto responses = filter_responses(model.bank, em_patches);
  for (std::size_t f = 0; f < responses.size(); ++f) {
    EmOptions em;
    em.components = options.components;
    em.seed = derive_seed(options.seed, 3000 + f);
    model.experts.push_back(fit_gmm_em(responses[f], em).components);
  }
  model.metadata.pca_patches = options.pca_patches;
  model.metadata.em_samples = options.em_samples;
  model.metadata.seed = options.seed;
  if (em_responses) *em_responses = responses;
  return model;
}

std::string format_model(const PriorModel& model) {
  std::ostringstream out;
  out << "gmbp-prior-model " << kModelFormatVersion << '\n';
  out << "patch_size " << model.bank.patch_size << '\n';
  out << "pca_patches " << model.metadata.pca_patches << '\n';
  out << "em_samples " << model.metadata.em_samples << '\n';
  out << "seed " << model.metadata.seed << '\n';
  out << "dropped_variance " << format_double(model.bank.dropped_variance) << '\n';
  out << "dropped_dc_cosine " << format_double(model.bank.dropped_dc_cosine) << '\n';
  out << "filters " << model.bank.filters.size() << '\n';
  for (std::size_t f = 0; f < model.bank.filters.size(); ++f) {
    const double variance = f < model.bank.variances.size() ? model.bank.variances[f] : 0.0;
    out << "  filter " << format_double(variance);
    for (Eigen::Index i = 0; i < model.bank.filters[f].size(); ++i) {
      out << ' ' << format_double(model.bank.filters[f](i));
    }
    out << '\n';
  }
  out << "experts " << model.experts.size() << '\n';
  for (const auto& expert : model.experts) {
    out << "  expert " << expert.size() << '\n';
    for (const auto& g : expert) {
      out << "    gaussian " << format_double(g.weight) << ' ' << format_double(g.mean) << ' '
          << format_double(g.sigma) << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

PriorModel parse_model(const std::string& text) {
  ModelReader in(text);
  in.expect("gmbp-prior-model");
  const std::uint64_t version = in.count();
  if (version != static_cast<std::uint64_t>(kModelFormatVersion)) {
    throw Error(ErrorKind::VersionMismatch, "model format version " + std::to_string(version) +
                                                ", expected " +
                                                std::to_string(kModelFormatVersion));
  }
  PriorModel model;
  in.expect("patch_size");
  model.bank.patch_size = static_cast<int>(in.count());
  if (model.bank.patch_size < 1 || model.bank.patch_size > 16) ModelReader::fail("bad patch_size");
  in.expect("pca_patches");
  model.metadata.pca_patches = in.count();
  in.expect("em_samples");
  model.metadata.em_samples = in.count();
  in.expect("seed");
  model.metadata.seed = in.count();
  in.expect("dropped_variance");
  model.bank.dropped_variance = in.number();
  in.expect("dropped_dc_cosine");
  model.bank.dropped_dc_cosine = in.number();
  in.expect("filters");
  const std::uint64_t filters = in.count();
  const auto n = static_cast<Eigen::Index>(model.bank.patch_size * model.bank.patch_size);
  if (filters > static_cast<std::uint64_t>(n)) ModelReader::fail("too many filters");
  for (std::uint64_t f = 0; f < filters; ++f) {
    in.expect("filter");
    model.bank.variances.push_back(in.number());
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = in.number();
    model.bank.filters.push_back(std::move(v));
  }
  in.expect("experts");
  const std::uint64_t experts = in.count();
  if (experts != filters) ModelReader::fail("expert count differs from filter count");
  for (std::uint64_t e = 0; e < experts; ++e) {
    in.expect("expert");
    const std::uint64_t k = in.count();
    if (k < 1 || k > 1024) ModelReader::fail("bad expert size");
    std::vector<Gaussian1D> expert;
    for (std::uint64_t c = 0; c < k; ++c) {
      in.expect("gaussian");
      Gaussian1D g;
      g.weight = in.number();
      g.mean = in.number();
      g.sigma = in.number();
      if (!(g.sigma > 0.0) || !(g.weight >= 0.0)) ModelReader::fail("bad gaussian parameters");
      expert.push_back(g);
    }
    model.experts.push_back(std::move(expert));
  }
  in.expect("end");
  in.expect_end();
  return model;
}

void save_model(const PriorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << format_model(model);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

PriorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str());
}

}  // namespace gmbp
