#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmbp/baseline.hpp"
#include "gmbp/engine.hpp"
#include "gmbp/error.hpp"
#include "gmbp/graph.hpp"
#include "gmbp/image.hpp"
#include "gmbp/masks.hpp"
#include "gmbp/prior.hpp"

namespace fs = std::filesystem;
using namespace gmbp;

namespace {

// Exit codes: 0 success, 1 usage or invalid input, 2 file or format error,
// 3 numerical failure during inference.
int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::UnsupportedFormat:
    case ErrorKind::CorruptHeader:
    case ErrorKind::MalformedModel:
    case ErrorKind::VersionMismatch:
      return 2;
    case ErrorKind::Numerical:
      return 3;
    default:
      return 1;
  }
}

std::string db(double v) {
  if (std::isinf(v)) return "inf";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", v);
  return buffer;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::vector<GrayImage> load_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error(ErrorKind::InvalidArgument, "no .pgm or .png images in " + dir.string());
  }
  std::vector<GrayImage> images;
  for (const auto& f : files) images.push_back(load_image(f));
  return images;
}

// One report row: whole-image and region PSNR plus SSIM against a reference.
struct Reporter {
  GrayImage reference;
  InpaintMask region;

  void row(const std::string& label, const GrayImage& image) const {
    const GrayImage q = quantize(image);
    std::cout << label << "  psnr " << db(psnr(reference, q));
    if (region.count() > 0) std::cout << "  region_psnr " << db(psnr(reference, q, region));
    if (reference.width() >= 11 && reference.height() >= 11) {
      std::cout << "  ssim " << db(ssim(reference, q));
    }
    std::cout << '\n';
  }
};

std::optional<Reporter> make_reporter(const std::string& path, const InpaintMask& mask,
                                      const GrayImage& image) {
  if (path.empty()) return std::nullopt;
  Reporter r{load_image(path), mask};
  if (r.reference.width() != image.width() || r.reference.height() != image.height()) {
    throw Error(ErrorKind::DimensionMismatch, "reference and image sizes differ");
  }
  return r;
}

struct LearnArgs {
  std::string images, out;
  std::size_t patches = 50000, em_samples = 5000;
  int k = 3;
  std::uint64_t seed = 0;
};

void learn_prior_cmd(const LearnArgs& a) {
  const auto images = load_directory(a.images);
  PriorLearningOptions options;
  options.pca_patches = a.patches;
  options.em_samples = a.em_samples;
  options.components = a.k;
  options.seed = a.seed;
  std::vector<std::vector<double>> responses;
  const PriorModel model = learn_prior(images, options, &responses);
  save_model(model, a.out);
  std::printf("images %zu  pca_patches %zu  em_samples %zu  seed %llu\n", images.size(),
              a.patches, a.em_samples, static_cast<unsigned long long>(a.seed));
  std::printf("dropped component: variance %.6g  |cos with DC| %.6f\n", model.bank.dropped_variance,
              model.bank.dropped_dc_cosine);
  for (std::size_t f = 0; f < model.bank.filters.size(); ++f) {
    const auto& J = model.bank.filters[f];
    std::printf("filter %zu  norm %.12f  sum %.3e  variance %.6g  [", f, J.norm(), J.sum(),
                model.bank.variances[f]);
    for (Eigen::Index i = 0; i < J.size(); ++i) std::printf("%s%+.6f", i ? " " : "", J(i));
    std::printf("]  excess_kurtosis %.4f\n", excess_kurtosis(responses[f]));
    for (const auto& g : model.experts[f]) {
      std::printf("  gaussian  weight %.6f  mean %+.6f  sigma %.6f\n", g.weight, g.mean, g.sigma);
    }
  }
  std::printf("wrote %s\n", a.out.c_str());
}

struct InpaintArgs {
  std::string image, mask, model, out, stats, reference, dump_graph;
  std::string weight_mode = "exact", schedule = "auto", reduction = "lowest", update = "sequential";
  int iterations = 3, mask_threshold = 128, threads = 1;
  std::size_t max_components = 1, working_components = 0;
  double tolerance = 0.1, ridge = 1e-6;
  bool stats_timing = false;
};

int inpaint_cmd(const InpaintArgs& a) {
  const GrayImage image = load_image(a.image);
  const InpaintMask mask = load_mask(a.mask, a.mask_threshold);
  const PriorModel model = load_model(a.model);

  EngineConfig cfg;
  cfg.weight_mode = a.weight_mode == "paper" ? WeightMode::PaperFaithful : WeightMode::Exact;
  cfg.max_components = a.max_components;
  cfg.working_components = a.working_components;
  cfg.iterations = a.iterations;
  cfg.convergence_tol = a.tolerance;
  cfg.ridge = a.ridge;
  cfg.schedule = a.schedule == "two_pass" ? ScheduleKind::TwoPass
                 : a.schedule == "loopy"  ? ScheduleKind::Loopy
                                          : ScheduleKind::Auto;
  cfg.reduction = a.reduction == "mean" ? PixelReduction::MeanOfModes : PixelReduction::LowestClique;
  cfg.update = a.update == "synchronous" ? UpdateOrder::Synchronous : UpdateOrder::Sequential;
  cfg.threads = a.threads;

  if (!a.dump_graph.empty()) write_text(a.dump_graph, dump_graph(build_graph(image, mask)));

  const auto reporter = make_reporter(a.reference, mask, image);
  std::printf("unknown pixels %zu\n", mask.count());
  if (reporter) reporter->row("input ", image);
  const RunResult result = run(image, mask, model, cfg, [&](const IterationStats& it,
                                                            const GrayImage& current) {
    std::printf("iter %d  mean_change %.4f  max_change %.4f  messages %zu  seconds %.3f\n",
                it.iteration, it.mean_change, it.max_change, it.messages, it.seconds);
    if (reporter) reporter->row("iter " + std::to_string(it.iteration), current);
    std::fflush(stdout);
  });
  save_image(result.image, a.out);
  if (!a.stats.empty()) write_text(a.stats, format_stats(result.stats, a.stats_timing));
  std::printf("schedule %s  stop %s\n", to_string(result.stats.schedule),
              to_string(result.stats.stop));
  return 0;
}

struct BaselineArgs {
  std::string image, mask, model, out, energy, reference;
  std::vector<double> alphas;
  double step_size = 0.1, initial = 128.0;
  int iterations = 2500, mask_threshold = 128;
};

void baseline_cmd(const BaselineArgs& a) {
  const GrayImage image = load_image(a.image);
  const InpaintMask mask = load_mask(a.mask, a.mask_threshold);
  const PriorModel model = load_model(a.model);
  BaselineConfig cfg;
  cfg.alphas = a.alphas;
  cfg.step_size = a.step_size;
  cfg.iterations = a.iterations;
  cfg.initial_value = a.initial;
  const auto reporter = make_reporter(a.reference, mask, image);
  if (reporter) reporter->row("input ", image);
  const BaselineResult result = run_baseline(image, mask, model.bank, cfg);
  save_image(result.image, a.out);
  if (!a.energy.empty()) {
    std::string text = "# gmbp-baseline-energy 1\n# iteration <k> <log_prior_energy>\n";
    char line[64];
    for (std::size_t i = 0; i < result.energy.size(); ++i) {
      std::snprintf(line, sizeof(line), "iteration %zu %.17g\n", i + 1, result.energy[i]);
      text += line;
    }
    write_text(a.energy, text + "end\n");
  }
  if (!result.energy.empty()) {
    std::printf("iterations %d  final energy %.6f\n", a.iterations, result.energy.back());
  }
  if (reporter) reporter->row("final ", result.image);
}

struct MetricsArgs {
  std::string reference, test, mask;
  int mask_threshold = 128;
};

void metrics_cmd(const MetricsArgs& a) {
  const GrayImage reference = load_image(a.reference);
  const GrayImage test = load_image(a.test);
  std::printf("psnr %s\n", db(psnr(reference, test)).c_str());
  if (!a.mask.empty()) {
    std::printf("region_psnr %s\n",
                db(psnr(reference, test, load_mask(a.mask, a.mask_threshold))).c_str());
  }
  std::printf("ssim %.6f\n", ssim(reference, test));
}

struct MaskArgs {
  int width = 64, height = 64;
  std::string style = "scratch", out;
  double coverage = 0.05;
  std::uint64_t seed = 0;
};

void make_mask_cmd(const MaskArgs& a) {
  const InpaintMask mask = make_mask(a.width, a.height, parse_mask_style(a.style), a.coverage, a.seed);
  save_mask(mask, a.out);
  std::printf("unknown pixels %zu of %d\n", mask.count(), a.width * a.height);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-mixture belief propagation inpainting"};
  app.require_subcommand(1);

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn-prior", "Learn PCA filters and expert mixtures");
  learn_cmd->add_option("--images", learn.images, "Directory of training images")->required();
  learn_cmd->add_option("--patches", learn.patches, "Patches for PCA")->capture_default_str();
  learn_cmd->add_option("--em-samples", learn.em_samples, "Patches for EM")->capture_default_str();
  learn_cmd->add_option("--k", learn.k, "Gaussians per expert")->capture_default_str()
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--seed", learn.seed, "Random seed")->capture_default_str();
  learn_cmd->add_option("--out", learn.out, "Model file")->required();

  InpaintArgs inp;
  auto* inpaint = app.add_subcommand("inpaint", "Inpaint by belief propagation");
  inpaint->add_option("--image", inp.image, "Input image")->required();
  inpaint->add_option("--mask", inp.mask, "Mask image (>= threshold means unknown)")->required();
  inpaint->add_option("--model", inp.model, "Prior model file")->required();
  inpaint->add_option("--out", inp.out, "Output image")->required();
  inpaint->add_option("--iterations", inp.iterations)->capture_default_str()
      ->check(CLI::PositiveNumber);
  inpaint->add_option("--max-components", inp.max_components, "Gaussians kept per message")
      ->capture_default_str()->check(CLI::PositiveNumber);
  inpaint->add_option("--working-components", inp.working_components,
                      "Gaussians kept while folding messages into a belief (0: max-components x potential size)")
      ->capture_default_str();
  inpaint->add_option("--weight-mode", inp.weight_mode)->capture_default_str()
      ->check(CLI::IsMember({"exact", "paper"}));
  inpaint->add_option("--schedule", inp.schedule)->capture_default_str()
      ->check(CLI::IsMember({"auto", "two_pass", "loopy"}));
  inpaint->add_option("--reduction", inp.reduction, "Pixel estimate: lowest clique or mean of modes")
      ->capture_default_str()->check(CLI::IsMember({"lowest", "mean"}));
  inpaint->add_option("--update", inp.update)->capture_default_str()
      ->check(CLI::IsMember({"sequential", "synchronous"}));
  inpaint->add_option("--threads", inp.threads, "Worker threads (synchronous update)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  inpaint->add_option("--tolerance", inp.tolerance, "Stop when max change is below (gray levels)")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  inpaint->add_option("--ridge", inp.ridge)->capture_default_str()->check(CLI::NonNegativeNumber);
  inpaint->add_option("--mask-threshold", inp.mask_threshold)->capture_default_str()
      ->check(CLI::Range(0, 256));
  inpaint->add_option("--stats", inp.stats, "Write run statistics");
  inpaint->add_flag("--stats-timing", inp.stats_timing, "Include wall times in the stats file");
  inpaint->add_option("--report-psnr-against", inp.reference, "Reference image for PSNR/SSIM");
  inpaint->add_option("--dump-graph", inp.dump_graph, "Write the clique graph");

  BaselineArgs base;
  auto* baseline = app.add_subcommand("baseline", "Inpaint by gradient ascent on the prior");
  baseline->add_option("--image", base.image)->required();
  baseline->add_option("--mask", base.mask)->required();
  baseline->add_option("--model", base.model)->required();
  baseline->add_option("--out", base.out)->required();
  baseline->add_option("--iterations", base.iterations)->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  baseline->add_option("--step-size", base.step_size)->capture_default_str()
      ->check(CLI::PositiveNumber);
  baseline->add_option("--alphas", base.alphas, "One weight per filter (default 1)");
  baseline->add_option("--init", base.initial, "Initial value of unknown pixels")
      ->capture_default_str();
  baseline->add_option("--mask-threshold", base.mask_threshold)->capture_default_str()
      ->check(CLI::Range(0, 256));
  baseline->add_option("--energy", base.energy, "Write the per-iteration energy trace");
  baseline->add_option("--report-psnr-against", base.reference);

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM between two images");
  metrics->add_option("--reference", met.reference)->required();
  metrics->add_option("--test", met.test)->required();
  metrics->add_option("--mask", met.mask, "Region for region PSNR");
  metrics->add_option("--mask-threshold", met.mask_threshold)->capture_default_str()
      ->check(CLI::Range(0, 256));

  MaskArgs mk;
  auto* mask_cmd = app.add_subcommand("make-mask", "Generate a synthetic mask");
  mask_cmd->add_option("--width", mk.width)->capture_default_str()->check(CLI::Range(3, 1 << 15));
  mask_cmd->add_option("--height", mk.height)->capture_default_str()->check(CLI::Range(3, 1 << 15));
  mask_cmd->add_option("--style", mk.style)->capture_default_str()
      ->check(CLI::IsMember({"scratch", "text", "blob"}));
  mask_cmd->add_option("--coverage", mk.coverage, "Fraction of pixels, in (0, 0.5]")
      ->capture_default_str();
  mask_cmd->add_option("--seed", mk.seed)->capture_default_str();
  mask_cmd->add_option("--out", mk.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (*learn_cmd) learn_prior_cmd(learn);
    if (*inpaint) return inpaint_cmd(inp);
    if (*baseline) baseline_cmd(base);
    if (*metrics) metrics_cmd(met);
    if (*mask_cmd) make_mask_cmd(mk);
  } catch (const Error& e) {
    std::cerr << "gmbp: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gmbp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
