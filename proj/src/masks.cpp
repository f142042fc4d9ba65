#include "gmbp/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmbp/error.hpp"
#include "gmbp/random.hpp"

namespace gmbp {

namespace {

class Painter {
 public:
  Painter(int width, int height, std::size_t target)
      : mask_(width, height), target_(target) {}

  bool done() const { return count_ == target_; }
  bool interior(int x, int y) const {
    return x >= 1 && y >= 1 && x <= mask_.width() - 2 && y <= mask_.height() - 2;
  }
  void paint(int x, int y) {
    if (done() || !interior(x, y) || mask_(x, y)) return;
    mask_(x, y) = true;
    ++count_;
  }
  // 8-connected raster line.
  void line(int x0, int y0, int x1, int y1) {
    const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
    for (int i = 0; i <= steps; ++i) {
      const double t = steps == 0 ? 0.0 : static_cast<double>(i) / steps;
      paint(static_cast<int>(std::lround(x0 + t * (x1 - x0))),
            static_cast<int>(std::lround(y0 + t * (y1 - y0))));
    }
  }
  InpaintMask take() { return std::move(mask_); }

 private:
  InpaintMask mask_;
  std::size_t target_;
  std::size_t count_ = 0;
};

int random_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

void scratches(Painter& p, int w, int h, Rng& rng) {
  constexpr double kPi = std::numbers::pi;
  while (!p.done()) {
    double x = random_int(rng, 1, w - 2);
    double y = random_int(rng, 1, h - 2);
    double heading = uniform_real(rng, 0.0, 2.0 * kPi);
    const int length = random_int(rng, 8, std::max(8, (w + h) / 2));
    int px = static_cast<int>(x), py = static_cast<int>(y);
    p.paint(px, py);
    for (int step = 0; step < length && !p.done(); ++step) {
      heading += 0.35 * standard_normal(rng);
      double nx = x + std::cos(heading);
      double ny = y + std::sin(heading);
      if (nx < 1.0 || nx > w - 2.0) {
        heading = kPi - heading;
        nx = x + std::cos(heading);
      }
      if (ny < 1.0 || ny > h - 2.0) {
        heading = -heading;
        ny = y + std::sin(heading);
      }
      x = std::clamp(nx, 1.0, w - 2.0);
      y = std::clamp(ny, 1.0, h - 2.0);
      const int qx = static_cast<int>(std::lround(x));
      const int qy = static_cast<int>(std::lround(y));
      p.line(px, py, qx, qy);
      px = qx;
      py = qy;
    }
  }
}

void text(Painter& p, int w, int h, Rng& rng) {
  // Glyphs are 7x9 cells at random origins, stroke endpoints on a 3x3
  // lattice inside the cell.
  constexpr int kCellW = 7, kCellH = 9;
  while (!p.done()) {
    const int cx = random_int(rng, 1, std::max(1, w - 1 - kCellW));
    const int cy = random_int(rng, 1, std::max(1, h - 1 - kCellH));
    const int strokes = random_int(rng, 2, 4);
    for (int s = 0; s < strokes && !p.done(); ++s) {
      const int a = random_int(rng, 0, 8);
      int b = random_int(rng, 0, 7);
      if (b >= a) ++b;
      auto at = [&](int k, int span, int origin, int limit) {
        return std::min(limit, origin + 1 + k * (span - 3) / 2);
      };
      p.line(at(a % 3, kCellW, cx, w - 2), at(a / 3, kCellH, cy, h - 2),
             at(b % 3, kCellW, cx, w - 2), at(b / 3, kCellH, cy, h - 2));
    }
  }
}

void blobs(Painter& p, int w, int h, Rng& rng) {
  const int max_radius = std::max(1, std::min(w, h) / 12);
  while (!p.done()) {
    const int sx = random_int(rng, 1, w - 2);
    const int sy = random_int(rng, 1, h - 2);
    const int r = random_int(rng, 1, max_radius);
    for (int y = sy - r; y <= sy + r; ++y) {
      for (int x = sx - r; x <= sx + r; ++x) {
        if ((x - sx) * (x - sx) + (y - sy) * (y - sy) <= r * r) p.paint(x, y);
      }
    }
  }
}

}  // namespace

const char* to_string(MaskStyle style) {
  switch (style) {
    case MaskStyle::Scratch: return "scratch";
    case MaskStyle::Text: return "text";
    case MaskStyle::Blob: return "blob";
  }
  return "unknown";
}

MaskStyle parse_mask_style(const std::string& name) {
  if (name == "scratch") return MaskStyle::Scratch;
  if (name == "text") return MaskStyle::Text;
  if (name == "blob") return MaskStyle::Blob;
  throw Error(ErrorKind::InvalidArgument, "unknown mask style '" + name + "'");
}

InpaintMask make_mask(int width, int height, MaskStyle style, double coverage,
                      std::uint64_t seed) {
  if (!(coverage > 0.0 && coverage <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "coverage must be in (0, 0.5]");
  }
  if (width < 3 || height < 3) {
    throw Error(ErrorKind::InvalidArgument, "mask must be at least 3x3");
  }
  const auto target = static_cast<std::size_t>(std::llround(coverage * width * height));
  const auto interior = static_cast<std::size_t>(width - 2) * static_cast<std::size_t>(height - 2);
  if (target > interior) {
    throw Error(ErrorKind::InvalidArgument, "coverage exceeds the interior of the image");
  }
  Painter painter(width, height, target);
  Rng rng(seed);
  switch (style) {
    case MaskStyle::Scratch: scratches(painter, width, height, rng); break;
    case MaskStyle::Text: text(painter, width, height, rng); break;
    case MaskStyle::Blob: blobs(painter, width, height, rng); break;
  }
  return painter.take();
}

}  // namespace gmbp
