#include "neuromix/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "neuromix/error.hpp"

namespace neuromix {

AugmentConfig AugmentConfig::identity() {
    AugmentConfig c;
    c.crop = c.shift = c.rotate = c.scale = c.brightness = c.contrast = false;
    return c;
}

bool AugmentConfig::is_identity() const { return !(crop || shift || rotate || scale || brightness || contrast); }

void AugmentConfig::validate() const {
    if (crop && !(crop_min > 0.0 && crop_min <= crop_max && crop_max <= 1.0)) {
        throw ConfigError("augment: need 0 < crop_min <= crop_max <= 1");
    }
    if (shift && !(shift_max >= 0.0 && shift_max < 1.0)) throw ConfigError("augment: shift_max must lie in [0, 1)");
    if (rotate && !(rotation_deg >= 0.0 && rotation_deg <= 180.0)) {
        throw ConfigError("augment: rotation_deg must lie in [0, 180]");
    }
    if (scale && !(scale_min > 0.0 && scale_min <= scale_max)) throw ConfigError("augment: need 0 < scale_min <= scale_max");
    if (brightness && !(brightness_max >= 0.0)) throw ConfigError("augment: brightness_max must be >= 0");
    if (contrast && !(contrast_max >= 0.0 && contrast_max < 1.0)) {
        throw ConfigError("augment: contrast_max must lie in [0, 1)");
    }
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

Tensor augment(const Tensor& image, const AugmentConfig& config, std::mt19937_64& rng) {
    if (image.rank() != 3) throw DimensionError("augment expects (c, h, w), got " + shape_string(image.shape()));
    if (config.is_identity()) return image;

    const std::size_t ch = image.dim(0), h = image.dim(1), w = image.dim(2);
    const double cx = (static_cast<double>(w) - 1.0) / 2.0, cy = (static_cast<double>(h) - 1.0) / 2.0;

    // Inverse map: source = centre + offset + zoom * R(-angle) * (out - centre)
    double zoom = 1.0, ox = 0.0, oy = 0.0, angle = 0.0;
    const bool geometric = config.crop || config.shift || config.rotate || config.scale;
    if (config.crop) {
        const double frac = uniform(rng, config.crop_min, config.crop_max);
        zoom *= frac;
        ox += uniform(rng, -0.5, 0.5) * (1.0 - frac) * static_cast<double>(w);
        oy += uniform(rng, -0.5, 0.5) * (1.0 - frac) * static_cast<double>(h);
    }
    if (config.shift) {
        ox -= uniform(rng, -config.shift_max, config.shift_max) * static_cast<double>(w);
        oy -= uniform(rng, -config.shift_max, config.shift_max) * static_cast<double>(h);
    }
    if (config.rotate) angle = uniform(rng, -config.rotation_deg, config.rotation_deg) * std::numbers::pi / 180.0;
    if (config.scale) zoom /= uniform(rng, config.scale_min, config.scale_max);

    Tensor out = image;
    if (geometric) {
        const double ca = std::cos(angle), sa = std::sin(angle);
        const std::size_t plane = h * w;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                const double sx = cx + ox + zoom * (ca * dx + sa * dy);
                const double sy = cy + oy + zoom * (-sa * dx + ca * dy);
                const double fx = std::floor(sx), fy = std::floor(sy);
                const double tx = sx - fx, ty = sy - fy;
                const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* src = image.raw() + c * plane;
                    auto at = [&](long yy, long xx) {
                        if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) return 0.0;
                        return src[yy * static_cast<long>(w) + xx];
                    };
                    const double v = (1 - ty) * ((1 - tx) * at(y0, x0) + tx * at(y0, x0 + 1)) +
                                     ty * ((1 - tx) * at(y0 + 1, x0) + tx * at(y0 + 1, x0 + 1));
                    out[c * plane + y * w + x] = v;
                }
            }
        }
    }

    if (config.brightness || config.contrast) {
        const double b = config.brightness ? uniform(rng, -config.brightness_max, config.brightness_max) : 0.0;
        const double k = config.contrast ? 1.0 + uniform(rng, -config.contrast_max, config.contrast_max) : 1.0;
        double m = 0.0;
        for (double v : out.data()) m += v;
        m /= static_cast<double>(out.size());
        for (auto& v : out.data()) v = std::clamp((v - m) * k + m + b, 0.0, 1.0);
    }
    return out;
}

Dataset augment_dataset(const Dataset& images, const AugmentConfig& config, std::uint64_t seed, std::size_t epoch) {
    if (images.kind != DataKind::image) throw DataError("augmentation needs image data");
    const Shape s = images.samples.shape();
    const std::size_t stride = images.samples.size() / s[0];
    Dataset out = images;
    for (std::size_t i = 0; i < s[0]; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(i)};
        std::mt19937_64 rng(seq);
        Tensor img({s[1], s[2], s[3]},
                   std::vector<double>(images.samples.raw() + i * stride, images.samples.raw() + (i + 1) * stride));
        const Tensor t = augment(img, config, rng);
        std::memcpy(out.samples.raw() + i * stride, t.raw(), stride * sizeof(double));
    }
    return out;
}

}  // namespace neuromix
