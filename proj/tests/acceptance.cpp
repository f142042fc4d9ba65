// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// hard criterion fails. Soft criteria report WARN instead of FAIL.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gmbp/baseline.hpp"
#include "gmbp/engine.hpp"
#include "gmbp/masks.hpp"
#include "oracles.hpp"

using namespace gmbp;
namespace fs = std::filesystem;

namespace {

const fs::path kData = GMBP_TEST_DATA_DIR;
const fs::path kModel = fs::path(GMBP_MODEL_DIR) / "default.model";

enum class Status { Pass, Fail, Warn };

struct Outcome {
  int id = 0;
  std::string name;
  Status status = Status::Fail;
  std::string summary;
  double seconds = 0.0;
};

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

void note(const std::string& line) { std::printf("    %s\n", line.c_str()); std::fflush(stdout); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VarSet random_subset(Rng& rng, int n, bool proper) {
  while (true) {
    std::vector<VarId> ids;
    for (int i = 0; i < n; ++i) {
      if (uniform_index(rng, 2)) ids.push_back(i);
    }
    if (ids.empty() || (proper && static_cast<int>(ids.size()) == n)) continue;
    return VarSet(ids);
  }
}

Eigen::VectorXd random_point(Rng& rng, int n, double spread) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = uniform_real(rng, -spread, spread);
  return x;
}

Eigen::VectorXd pick(const Eigen::VectorXd& x, const VarSet& sub, const VarSet& all) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(sub.size()));
  for (std::size_t i = 0; i < sub.size(); ++i) out(static_cast<Eigen::Index>(i)) = x(*all.index_of(sub.ids()[i]));
  return out;
}

// Criterion 1 ---------------------------------------------------------------

Outcome gaussian_algebra() {
  Outcome o{1, "Gaussian algebra oracles"};
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double product_err = 0, marginal_err = 0, slice_err = 0;
  int products = 0, marginals = 0, slices = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    const int count = 1 + (trial / 4) % 4;
    VarSet all;
    {
      std::vector<VarId> ids;
      for (int i = 0; i < n; ++i) ids.push_back(i);
      all = VarSet(ids);
    }
    const oracle::Terms terms = oracle::random_terms(rng, n, count);
    const Mixture m = oracle::to_mixture(terms, all);

    // Product with a mixture over a random subset of the same variables.
    const VarSet sub = random_subset(rng, n, false);
    const oracle::Terms other = oracle::random_terms(rng, static_cast<int>(sub.size()),
                                                     1 + static_cast<int>(uniform_index(rng, 4)));
    const Mixture prod = product(m, oracle::to_mixture(other, sub), WeightMode::Exact);
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd x = random_point(rng, n, 2.5);
      const double expected = oracle::density(terms, x) * oracle::density(other, pick(x, sub, all));
      product_err = std::max(product_err, oracle::rel_err(density(prod, x), expected));
      ++products;
    }
    if (n == 1) continue;

    // Marginal against tensor trapezoid quadrature over the eliminated variables.
    const VarSet keep = random_subset(rng, n, true);
    const VarSet gone = set_difference(all, keep);
    const Mixture marg = marginalize(m, keep, WeightMode::Exact, 0.0);
    std::vector<double> lo, hi;
    std::vector<int> points;
    for (VarId v : gone) {
      double a = INFINITY, b = -INFINITY;
      for (const auto& t : terms) {
        a = std::min(a, t.mean(v));
        b = std::max(b, t.mean(v));
      }
      lo.push_back(a - 12.0);
      hi.push_back(b + 12.0);
      points.push_back(static_cast<int>(std::ceil((hi.back() - lo.back()) / 0.4)) + 1);
    }
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd xk = random_point(rng, static_cast<int>(keep.size()), 1.5);
      const double integral = oracle::trapezoid(lo, hi, points, [&](const Eigen::VectorXd& xe) {
        Eigen::VectorXd x(n);
        for (std::size_t i = 0; i < keep.size(); ++i) x(keep.ids()[i]) = xk(static_cast<Eigen::Index>(i));
        for (std::size_t i = 0; i < gone.size(); ++i) x(gone.ids()[i]) = xe(static_cast<Eigen::Index>(i));
        return oracle::density(terms, x);
      });
      marginal_err = std::max(marginal_err, oracle::rel_err(density(marg, xk), integral));
      ++marginals;
    }

    // Conditioning is an exact slice of the joint.
    const VarSet observed = random_subset(rng, n, true);
    const VarSet unknown = set_difference(all, observed);
    std::vector<double> values;
    for (std::size_t i = 0; i < observed.size(); ++i) values.push_back(uniform_real(rng, -2.0, 2.0));
    const Mixture cond = condition(m, observed, values);
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd xu = random_point(rng, static_cast<int>(unknown.size()), 2.0);
      Eigen::VectorXd x(n);
      for (std::size_t i = 0; i < unknown.size(); ++i) x(unknown.ids()[i]) = xu(static_cast<Eigen::Index>(i));
      for (std::size_t i = 0; i < observed.size(); ++i) x(observed.ids()[i]) = values[i];
      slice_err = std::max(slice_err, std::abs(density(cond, xu) / oracle::density(terms, x) - 1.0));
      ++slices;
    }
  }
  o.seconds = seconds_since(t0);
  note(fmt("product: %d points, max rel err %.2e (tol 1e-8)", products, product_err));
  note(fmt("marginal: %d points, max rel err vs quadrature %.2e (tol 1e-4)", marginals, marginal_err));
  note(fmt("condition: %d points, max |slice ratio - 1| %.2e (tol 1e-8)", slices, slice_err));
  const bool ok = product_err < 1e-8 && marginal_err < 1e-4 && slice_err < 1e-8 && o.seconds < 30.0;
  o.status = ok ? Status::Pass : Status::Fail;
  o.summary = fmt("200 mixtures; errors %.1e / %.1e / %.1e; %.1f s (limit 30 s)", product_err, marginal_err,
                  slice_err, o.seconds);
  return o;
}

// Criterion 2 ---------------------------------------------------------------

Outcome lifting_identity(const PriorModel& model) {
  Outcome o{2, "lifting identity"};
  const auto patches = extract_patches(load_image(kData / "chelsea128.pgm"), 2, 100, 3);
  double worst = 0.0;
  int checks = 0;
  for (std::size_t f = 0; f < model.bank.filters.size(); ++f) {
    const Eigen::VectorXd& filter = model.bank.filters[f];
    for (const auto& g : model.experts[f]) {
      const Component c = lift_1d(g, filter);
      for (const auto& p : patches) {
        const double r = filter.dot(p.values);
        const double expected = std::log(g.weight) - (r - g.mean) * (r - g.mean) / (2 * g.sigma * g.sigma);
        worst = std::max(worst, std::abs(c.log_density(p.values) - expected) / std::max(1.0, std::abs(expected)));
        ++checks;
      }
    }
  }
  note(fmt("%d filter/Gaussian/patch triples, max relative error %.2e (tol 1e-10)", checks, worst));
  o.status = worst <= 1e-10 ? Status::Pass : Status::Fail;
  o.summary = fmt("max rel err %.1e over %d evaluations", worst, checks);
  return o;
}

// Criterion 3 ---------------------------------------------------------------

Outcome exact_inference(const PriorModel& model) {
  Outcome o{3, "exact inference on forest masks"};
  const auto t0 = std::chrono::steady_clock::now();
  const GrayImage ref = load_image(kData / "chelsea64.pgm");
  const std::vector<std::vector<PixelCoord>> scratches = {
      {{10, 20}, {11, 20}, {12, 20}},  // horizontal
      {{40, 30}, {40, 31}, {40, 32}},  // vertical
      {{20, 44}, {21, 45}, {22, 46}},  // diagonal
      {{30, 10}, {31, 10}, {32, 11}},  // bent
      {{50, 50}},                      // single pixel
      {{6, 55}, {7, 55}},              // short
  };
  bool ok = true;
  int worst = 0;
  for (std::size_t s = 0; s < scratches.size(); ++s) {
    const auto& pixels = scratches[s];
    InpaintMask mask(64, 64);
    GrayImage corrupted = ref;
    for (const auto& p : pixels) {
      mask(p.x, p.y) = true;
      corrupted(p.x, p.y) = 255;
    }
    const CliqueGraph graph = build_graph(corrupted, mask);
    const bool tree = detect_tree(graph);
    const std::vector<int> oracle_modes = oracle::brute_force_modes(corrupted, pixels, model);
    std::string line = fmt("mask %zu: %zu unknown, %zu cliques, junction tree %s; oracle", s + 1, pixels.size(),
                           graph.cliques.size(), tree ? "yes" : "no");
    for (int m : oracle_modes) line += fmt(" %d", m);
    ok = ok && tree;
    for (std::size_t cap : {1, 9}) {
      EngineConfig cfg;
      cfg.max_components = cap;
      cfg.schedule = ScheduleKind::TwoPass;
      if (!tree) break;
      const RunResult r = run(corrupted, mask, model, cfg);
      line += fmt("; cap %zu:", cap);
      for (std::size_t u = 0; u < pixels.size(); ++u) {
        const int est = static_cast<int>(r.image(pixels[u].x, pixels[u].y));
        line += fmt(" %d", est);
        worst = std::max(worst, std::abs(est - oracle_modes[u]));
      }
    }
    note(line);
  }
  o.seconds = seconds_since(t0);
  // Diagnostic only: with one Gaussian per expert nothing is pruned at cap 1,
  // which separates message passing errors from mixture truncation.
  PriorModel single = model;
  for (auto& expert : single.experts) {
    Gaussian1D g = *std::max_element(expert.begin(), expert.end(),
                                     [](const auto& a, const auto& b) { return a.sigma < b.sigma; });
    g.weight = 1.0;
    expert = {g};
  }
  int single_worst = 0;
  for (const auto& pixels : scratches) {
    if (pixels.size() > 2) continue;
    InpaintMask mask(64, 64);
    GrayImage corrupted = ref;
    for (const auto& p : pixels) {
      mask(p.x, p.y) = true;
      corrupted(p.x, p.y) = 255;
    }
    const std::vector<int> modes = oracle::brute_force_modes(corrupted, pixels, single);
    EngineConfig cfg;
    cfg.max_components = 1;
    cfg.schedule = ScheduleKind::TwoPass;
    const RunResult r = run(corrupted, mask, single, cfg);
    for (std::size_t u = 0; u < pixels.size(); ++u) {
      single_worst = std::max(single_worst, std::abs(static_cast<int>(r.image(pixels[u].x, pixels[u].y)) - modes[u]));
    }
  }
  note(fmt("diagnostic, single-Gaussian experts on the 1- and 2-pixel masks at cap 1: worst %d levels", single_worst));
  ok = ok && worst <= 2 && o.seconds < 120.0;
  o.status = ok ? Status::Pass : Status::Fail;
  o.summary = fmt("%zu masks, caps 1 and 9, worst |two_pass - oracle| = %d levels (tol 2); %.1f s (limit 120 s)",
                  scratches.size(), worst, o.seconds);
  return o;
}

// Criterion 4 ---------------------------------------------------------------

Outcome em_monotonicity() {
  Outcome o{4, "EM monotonicity"};
  double worst_drop = 0.0;
  int iterations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    std::vector<double> data;
    const int n = 500 + static_cast<int>(seed) * 150;
    const double means[3] = {uniform_real(rng, -5, 5), uniform_real(rng, -5, 5), uniform_real(rng, -5, 5)};
    const double sigmas[3] = {uniform_real(rng, 0.2, 3), uniform_real(rng, 0.2, 3), uniform_real(rng, 0.2, 3)};
    for (int i = 0; i < n; ++i) {
      const auto c = uniform_index(rng, 3);
      data.push_back(means[c] + sigmas[c] * standard_normal(rng));
    }
    EmOptions options;
    options.seed = seed;
    const EmResult r = fit_gmm_em(data, options);
    for (std::size_t k = 1; k < r.log_likelihood.size(); ++k) {
      worst_drop = std::max(worst_drop, r.log_likelihood[k - 1] - r.log_likelihood[k]);
    }
    iterations += r.iterations;
  }
  note(fmt("20 datasets, %d EM iterations, largest per-iteration decrease %.2e (tol 1e-9)", iterations, worst_drop));
  o.status = worst_drop <= 1e-9 ? Status::Pass : Status::Fail;
  o.summary = fmt("largest decrease %.1e over %d iterations", worst_drop, iterations);
  return o;
}

// Criterion 5 ---------------------------------------------------------------

Outcome potential_structure(const PriorModel& model) {
  Outcome o{5, "potential structure"};
  const Mixture potential = build_clique_potential(model);
  Eigen::MatrixXd filters(4, static_cast<Eigen::Index>(model.bank.filters.size()));
  for (std::size_t f = 0; f < model.bank.filters.size(); ++f) filters.col(static_cast<Eigen::Index>(f)) = model.bank.filters[f];
  const double gram_err =
      (filters.transpose() * filters - Eigen::MatrixXd::Identity(filters.cols(), filters.cols())).cwiseAbs().maxCoeff();

  // Relearn from the natural training images to check the dropped component.
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(kData / "train")) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<GrayImage> images;
  for (const auto& p : paths) images.push_back(load_image(p));
  PriorLearningOptions options;
  options.seed = model.metadata.seed;
  const PriorModel relearned = learn_prior(images, options);
  const double cosine = relearned.bank.dropped_dc_cosine;
  note(fmt("components %zu (expected 27); filter Gram error %.2e (tol 1e-10)", potential.size(), gram_err));
  note(fmt("dropped principal component |cos| with DC %.7f on the natural corpus (soft threshold 0.95)", cosine));
  note(std::string("shipped model reproduced from the corpus: ") +
         (format_model(relearned) == format_model(model) ? "yes" : "no"));
  const bool hard = potential.size() == 27 && gram_err <= 1e-10;
  o.status = !hard ? Status::Fail : (cosine >= 0.95 ? Status::Pass : Status::Warn);
  o.summary = fmt("%zu components, Gram err %.1e, |cos DC| %.4f", potential.size(), gram_err, cosine);
  return o;
}

// Shared instance for criteria 6 to 11 --------------------------------------

struct Instance {
  GrayImage reference;
  InpaintMask mask;
  GrayImage corrupted;
};

Instance make_instance() {
  Instance inst;
  inst.reference = load_image(kData / "chelsea64.pgm");
  inst.mask = make_mask(64, 64, MaskStyle::Scratch, 0.05, 7);
  inst.corrupted = inst.reference;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (inst.mask(x, y)) inst.corrupted(x, y) = 255;
    }
  }
  return inst;
}

struct Trace {
  std::vector<double> region_psnr;  // per iteration
  std::vector<double> ssim;
  std::vector<double> seconds;
  double total_seconds = 0.0;
  RunResult result;
};

Trace run_trace(const Instance& inst, const PriorModel& model, const EngineConfig& cfg) {
  Trace t;
  const auto t0 = std::chrono::steady_clock::now();
  t.result = run(inst.corrupted, inst.mask, model, cfg, [&](const IterationStats& s, const GrayImage& img) {
    t.region_psnr.push_back(psnr(inst.reference, img, inst.mask));
    t.ssim.push_back(ssim(inst.reference, img));
    t.seconds.push_back(s.seconds);
  });
  t.total_seconds = seconds_since(t0);
  return t;
}

EngineConfig protocol_config(std::size_t cap) {
  EngineConfig cfg;  // Exact weights, sequential sweep, lowest-clique estimate
  cfg.max_components = cap;
  cfg.iterations = 3;
  cfg.convergence_tol = 0.0;  // always record three iterations
  return cfg;
}

std::string rows(const Trace& t) {
  std::string s;
  for (std::size_t k = 0; k < t.region_psnr.size(); ++k) {
    s += fmt("%siter %zu %.2f dB (ssim %.4f)", k ? ", " : "", k + 1, t.region_psnr[k], t.ssim[k]);
  }
  return s;
}

// Criterion 6 ---------------------------------------------------------------

Outcome trend(const Instance& inst, const Trace& t) {
  Outcome o{6, "end-to-end trend (cap 1)"};
  const double input = psnr(inst.reference, inst.corrupted, inst.mask);
  GrayImage gray = inst.corrupted;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (inst.mask(x, y)) gray(x, y) = 128;
    }
  }
  note(fmt("%zu unknown pixels; corrupted input (unknowns at 255) region PSNR %.2f dB; with unknowns at 128 %.2f dB",
             inst.mask.count(), input, psnr(inst.reference, gray, inst.mask)));
  note(rows(t) + fmt("; %.1f s", t.total_seconds));
  const auto& p = t.region_psnr;
  if (p.size() != 3) {
    o.summary = "did not record three iterations";
    return o;
  }
  const bool gain = p[0] > input + 5.0;
  const bool second = p[1] >= p[0];
  const bool third = std::abs(p[2] - p[1]) < 0.3;
  const bool fast = t.total_seconds < 180.0;
  note(fmt("iter1 > input + 5 dB: %s; iter2 >= iter1: %s (%+.2f dB); |iter3 - iter2| < 0.3 dB: %s (%.2f dB)",
             gain ? "yes" : "no", second ? "yes" : "no", p[1] - p[0], third ? "yes" : "no", std::abs(p[2] - p[1])));
  o.status = gain && second && third && fast ? Status::Pass : Status::Fail;
  o.summary = fmt("input %.2f, iter1 %.2f, iter2 %.2f, iter3 %.2f dB; %.1f s", input, p[0], p[1], p[2], t.total_seconds);
  return o;
}

// Criterion 7 ---------------------------------------------------------------

Outcome cap_insensitivity(const Instance& inst, const PriorModel& model, const Trace& cap1) {
  Outcome o{7, "cap insensitivity"};
  std::vector<double> finals{cap1.region_psnr.back()};
  note(fmt("cap 1: %s", rows(cap1).c_str()));
  for (std::size_t cap : {3, 9}) {
    const Trace t = run_trace(inst, model, protocol_config(cap));
    note(fmt("cap %zu: %s; %.1f s", cap, rows(t).c_str(), t.total_seconds));
    finals.push_back(t.region_psnr.back());
  }
  const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
  o.status = *hi - *lo < 0.5 ? Status::Pass : Status::Fail;
  o.summary = fmt("final region PSNR %.2f / %.2f / %.2f dB, spread %.2f dB (limit 0.5)", finals[0], finals[1],
                  finals[2], *hi - *lo);
  return o;
}

// Criterion 8 ---------------------------------------------------------------

Outcome mask_bound_runtime(const Instance& inst, const PriorModel& model) {
  Outcome o{8, "runtime bound by the mask"};
  const GrayImage big_ref = load_image(kData / "chelsea128.pgm");
  GrayImage big = big_ref;
  InpaintMask big_mask(128, 128);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      big_mask(x + 32, y + 32) = inst.mask(x, y);
      if (inst.mask(x, y)) big(x + 32, y + 32) = 255;
    }
  }
  const EngineConfig cfg = protocol_config(1);
  // Median per-iteration time over alternating repeats.
  std::vector<double> small_times, big_times;
  std::vector<OpRow> small_ops, big_ops;
  for (int rep = 0; rep < 5; ++rep) {
    const RunResult a = run(inst.corrupted, inst.mask, model, cfg);
    const RunResult b = run(big, big_mask, model, cfg);
    for (const auto& it : a.stats.iterations) small_times.push_back(it.seconds);
    for (const auto& it : b.stats.iterations) big_times.push_back(it.seconds);
    small_ops = count_ops(a.stats);
    big_ops = count_ops(b.stats);
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double ts = median(small_times), tb = median(big_times);
  const double ratio = std::max(ts, tb) / std::min(ts, tb);
  note(fmt("median per-iteration time: 64x64 %.3f s, 128x128 %.3f s; identical operation counts: %s", ts, tb,
             small_ops == big_ops ? "yes" : "no"));
  o.status = ratio < 1.5 ? Status::Pass : Status::Fail;
  o.summary = fmt("per-iteration time ratio %.3f (limit 1.5)", ratio);
  return o;
}

// Criterion 9 ---------------------------------------------------------------

Outcome baseline_comparison(const Instance& inst, const PriorModel& model, const Trace& cap1) {
  Outcome o{9, "baseline comparison (soft)"};
  const auto t0 = std::chrono::steady_clock::now();
  const BaselineResult base = run_baseline(inst.corrupted, inst.mask, model.bank);
  const double base_seconds = seconds_since(t0);
  const double base_psnr = psnr(inst.reference, quantize(base.image), inst.mask);
  const double bp = cap1.region_psnr.at(1);
  const double bp_seconds = cap1.seconds.at(0) + cap1.seconds.at(1);
  note(fmt("BP 2 iterations %.2f dB in %.2f s; gradient baseline 2500 iterations %.2f dB in %.2f s", bp, bp_seconds,
             base_psnr, base_seconds));
  o.status = bp >= base_psnr - 2.0 ? Status::Pass : Status::Warn;
  o.summary = fmt("BP %.2f dB vs baseline %.2f dB (BP may trail by at most 2 dB)", bp, base_psnr);
  return o;
}

// Criterion 10 --------------------------------------------------------------

Outcome gradient_check(const PriorModel& model) {
  Outcome o{10, "baseline gradient vs finite differences"};
  Rng rng(77);
  double worst = 0.0;
  for (int instance = 0; instance < 10; ++instance) {
    GrayImage img(10, 9);
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 10; ++x) img(x, y) = uniform_real(rng, 0.0, 255.0);
    }
    const InpaintMask mask = make_mask(10, 9, MaskStyle::Blob, 0.2, 500 + instance);
    const ImageMatrix g = log_prior_gradient(img, mask, model.bank);
    double diff = 0.0, norm = 0.0;
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 10; ++x) {
        if (!mask(x, y)) continue;
        GrayImage up = img, down = img;
        up(x, y) += 1e-4;
        down(x, y) -= 1e-4;
        const double fd = (log_prior_energy(up, mask, model.bank) - log_prior_energy(down, mask, model.bank)) / 2e-4;
        diff += (fd - g(y, x)) * (fd - g(y, x));
        norm += g(y, x) * g(y, x);
      }
    }
    worst = std::max(worst, std::sqrt(diff / norm));
  }
  note(fmt("10 random instances, h = 1e-4, worst relative error %.2e (tol 1e-5)", worst));
  o.status = worst < 1e-5 ? Status::Pass : Status::Fail;
  o.summary = fmt("worst relative error %.1e", worst);
  return o;
}

// Criterion 11 --------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GMBP_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const Instance& inst) {
  Outcome o{11, "determinism"};
  const fs::path dir = fs::temp_directory_path() / "gmbp_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path corrupted = dir / "corrupted.pgm";
  save_image(inst.corrupted, corrupted);
  bool ok = true;
  std::string outputs[2], stats[2], masks[2];
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k);
    const fs::path mask = dir / ("mask" + tag + ".pgm");
    const fs::path out = dir / ("out" + tag + ".pgm");
    const fs::path st = dir / ("stats" + tag + ".txt");
    ok = ok && cli("make-mask --width 64 --height 64 --style scratch --coverage 0.05 --seed 7 --out \"" +
                   mask.string() + "\"") == 0;
    ok = ok && cli("inpaint --image \"" + corrupted.string() + "\" --mask \"" + mask.string() + "\" --model \"" +
                   kModel.string() + "\" --out \"" + out.string() + "\" --stats \"" + st.string() + "\"") == 0;
    masks[k] = read_file(mask);
    outputs[k] = read_file(out);
    stats[k] = read_file(st);
  }
  ok = ok && !outputs[0].empty() && !stats[0].empty();
  const bool same = masks[0] == masks[1] && outputs[0] == outputs[1] && stats[0] == stats[1];
  note(fmt("masks %s, images %s, stats %s (%zu and %zu bytes)", masks[0] == masks[1] ? "identical" : "differ",
             outputs[0] == outputs[1] ? "identical" : "differ", stats[0] == stats[1] ? "identical" : "differ",
             outputs[0].size(), stats[0].size()));
  o.status = ok && same ? Status::Pass : Status::Fail;
  o.summary = ok ? (same ? "byte-identical mask, image and stats" : "outputs differ") : "CLI run failed";
  return o;
}

const char* label(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Warn: return "WARN";
  }
  return "?";
}

}  // namespace

int main() {
  std::vector<Outcome> outcomes;
  const auto record = [&](Outcome o) {
    std::printf("%s  criterion %d  %s\n", label(o.status), o.id, o.name.c_str());
    std::fflush(stdout);
    outcomes.push_back(std::move(o));
  };
  try {
    const PriorModel model = load_model(kModel);
    std::printf("criterion 1: Gaussian algebra\n");
    record(gaussian_algebra());
    std::printf("criterion 2: lifting identity\n");
    record(lifting_identity(model));
    std::printf("criterion 3: exact inference\n");
    record(exact_inference(model));
    std::printf("criterion 4: EM monotonicity\n");
    record(em_monotonicity());
    std::printf("criterion 5: potential structure\n");
    record(potential_structure(model));

    const Instance inst = make_instance();
    std::printf("criterion 6: end-to-end trend\n");
    const Trace cap1 = run_trace(inst, model, protocol_config(1));
    record(trend(inst, cap1));
    {
      EngineConfig paper = protocol_config(1);
      paper.weight_mode = WeightMode::PaperFaithful;
      note("for reference, paper weight mode: " + rows(run_trace(inst, model, paper)));
    }
    std::printf("criterion 7: cap insensitivity\n");
    record(cap_insensitivity(inst, model, cap1));
    std::printf("criterion 8: mask-bound runtime\n");
    record(mask_bound_runtime(inst, model));
    std::printf("criterion 9: baseline comparison\n");
    record(baseline_comparison(inst, model, cap1));
    std::printf("criterion 10: gradient check\n");
    record(gradient_check(model));
    std::printf("criterion 11: determinism\n");
    record(determinism(inst));
  } catch (const std::exception& e) {
    std::printf("FAIL  aborted: %s\n", e.what());
    return 2;
  }

  std::printf("\nsummary\n");
  int failures = 0;
  for (const auto& o : outcomes) {
    std::printf("%s  %2d  %-42s %s\n", label(o.status), o.id, o.name.c_str(), o.summary.c_str());
    failures += o.status == Status::Fail;
  }
  std::printf("%d of %zu criteria failed\n", failures, outcomes.size());
  return failures == 0 ? 0 : 1;
}
