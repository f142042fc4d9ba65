#include <doctest.h>

#include <cmath>

#include "gmbp/baseline.hpp"
#include "gmbp/error.hpp"
#include "gmbp/masks.hpp"
#include "gmbp/random.hpp"

using namespace gmbp;

namespace {

const PriorModel& default_model() {
  static const PriorModel model = load_model(std::filesystem::path(GMBP_MODEL_DIR) / "default.model");
  return model;
}

GrayImage random_image(Rng& rng, int w, int h) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img(x, y) = uniform_real(rng, 0.0, 255.0);
  }
  return img;
}

InpaintMask random_mask(Rng& rng, int w, int h, int count) {
  InpaintMask mask(w, h);
  while (static_cast<int>(mask.count()) < count) {
    mask(static_cast<int>(uniform_index(rng, w)), static_cast<int>(uniform_index(rng, h))) = true;
  }
  return mask;
}

}  // namespace

TEST_CASE("constant image has zero gradient") {
  const InpaintMask mask = make_mask(16, 16, MaskStyle::Blob, 0.2, 1);
  for (double v : {0.0, 77.0, 255.0}) {
    const ImageMatrix g = log_prior_gradient(GrayImage(16, 16, v), mask, default_model().bank);
    CHECK(g.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("single window, single filter, by hand") {
  FilterBank bank;
  bank.filters = {Eigen::Vector4d(1, -1, 0, 0) / std::sqrt(2.0)};
  GrayImage img(2, 2);
  img(0, 0) = 10;
  img(1, 0) = 20;
  img(0, 1) = 30;
  img(1, 1) = 40;
  InpaintMask mask(2, 2);
  mask(0, 0) = true;
  mask(1, 0) = true;
  // E = -log(1 + (x0 - x1)^2 / 4), dE/dx0 = -(x0 - x1) / 2 / (1 + (x0 - x1)^2 / 4).
  const ImageMatrix g = log_prior_gradient(img, mask, bank);
  CHECK(g(0, 0) == doctest::Approx(5.0 / 26.0).epsilon(1e-12));
  CHECK(g(0, 1) == doctest::Approx(-5.0 / 26.0).epsilon(1e-12));
  CHECK(g(1, 0) == 0.0);
  CHECK(g(1, 1) == 0.0);
  CHECK(log_prior_energy(img, mask, bank) == doctest::Approx(-std::log(26.0)).epsilon(1e-12));

  BaselineConfig cfg;
  cfg.alphas = {2.5};
  CHECK(log_prior_gradient(img, mask, bank, cfg)(0, 0) == doctest::Approx(2.5 * 5.0 / 26.0).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  const FilterBank& bank = default_model().bank;
  Rng rng(2024);
  for (int instance = 0; instance < 10; ++instance) {
    const GrayImage img = random_image(rng, 9, 8);
    const InpaintMask mask = random_mask(rng, 9, 8, 12);
    BaselineConfig cfg;
    cfg.alphas = {uniform_real(rng, 0.5, 2.0), uniform_real(rng, 0.5, 2.0), uniform_real(rng, 0.5, 2.0)};
    const ImageMatrix g = log_prior_gradient(img, mask, bank, cfg);
    const double h = 1e-4;
    double diff = 0.0, norm = 0.0;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 9; ++x) {
        if (!mask(x, y)) continue;
        GrayImage up = img, down = img;
        up(x, y) += h;
        down(x, y) -= h;
        const double fd = (log_prior_energy(up, mask, bank, cfg) - log_prior_energy(down, mask, bank, cfg)) / (2 * h);
        diff += (fd - g(y, x)) * (fd - g(y, x));
        norm += g(y, x) * g(y, x);
      }
    }
    CHECK(std::sqrt(diff / norm) < 1e-5);
  }
}

TEST_CASE("run_baseline") {
  const FilterBank& bank = default_model().bank;

  SUBCASE("zero iterations returns the initialization") {
    GrayImage img(8, 8, 40.0);
    InpaintMask mask(8, 8);
    mask(3, 4) = true;
    BaselineConfig cfg;
    cfg.iterations = 0;
    const BaselineResult r = run_baseline(img, mask, bank, cfg);
    CHECK(r.energy.empty());
    CHECK(r.image(3, 4) == 128.0);
    GrayImage expected = img;
    expected(3, 4) = 128.0;
    CHECK(r.image == expected);
  }

  SUBCASE("small steps never decrease the energy") {
    Rng rng(9);
    const GrayImage img = random_image(rng, 16, 16);
    const InpaintMask mask = make_mask(16, 16, MaskStyle::Scratch, 0.1, 4);
    BaselineConfig cfg;
    cfg.step_size = 0.01;
    cfg.iterations = 300;
    const BaselineResult r = run_baseline(img, mask, bank, cfg);
    REQUIRE(r.energy.size() == 300);
    for (std::size_t k = 1; k < r.energy.size(); ++k) CHECK(r.energy[k] >= r.energy[k - 1]);
  }

  SUBCASE("smooth image with a scratch mask improves by 3 dB") {
    GrayImage img(64, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) img(x, y) = 20.0 + 2.0 * x + 1.0 * y;
    }
    const InpaintMask mask = make_mask(64, 64, MaskStyle::Scratch, 0.05, 7);
    BaselineConfig init_only;
    init_only.iterations = 0;
    const GrayImage start = run_baseline(img, mask, bank, init_only).image;
    const BaselineResult r = run_baseline(img, mask, bank);
    CHECK(r.energy.size() == 2500);
    const double before = psnr(img, start, mask);
    const double after = psnr(img, r.image, mask);
    MESSAGE("region PSNR " << before << " -> " << after);
    CHECK(after >= before + 3.0);
    CHECK((r.image.pixels().array() >= 0).all());
    CHECK((r.image.pixels().array() <= 255).all());
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (!mask(x, y)) CHECK(r.image(x, y) == img(x, y));
      }
    }
  }
}

TEST_CASE("baseline configuration errors") {
  const FilterBank& bank = default_model().bank;
  const GrayImage img(8, 8);
  InpaintMask mask(8, 8);
  mask(4, 4) = true;
  BaselineConfig cfg;
  cfg.alphas = {1.0, 1.0};
  CHECK_THROWS_AS(run_baseline(img, mask, bank, cfg), Error);
  cfg.alphas = {1.0, -1.0, 1.0};
  CHECK_THROWS_AS(log_prior_gradient(img, mask, bank, cfg), Error);
  cfg = BaselineConfig{};
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(run_baseline(img, mask, bank, cfg), Error);
  cfg = BaselineConfig{};
  cfg.iterations = -1;
  CHECK_THROWS_AS(run_baseline(img, mask, bank, cfg), Error);
  CHECK_THROWS_AS(log_prior_gradient(img, InpaintMask(7, 8), bank), Error);
}
