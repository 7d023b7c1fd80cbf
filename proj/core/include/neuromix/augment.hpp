#pragma once

#include <cstdint>
#include <random>

#include "neuromix/data.hpp"
#include "neuromix/tensor.hpp"

namespace neuromix {

// Random image transformation T. Geometric parts are composed into one
// inverse affine map and resampled bilinearly (zeros outside the image);
// photometric parts act on intensities and clip to [0, 1]. Disabled parts
// draw no random numbers.
struct AugmentConfig {
    bool crop = true;
    double crop_min = 0.8;  // fraction of the side kept, then resized back
    double crop_max = 1.0;
    bool shift = true;
    double shift_max = 0.1;  // fraction of the side
    bool rotate = true;
    double rotation_deg = 15.0;
    bool scale = true;
    double scale_min = 0.9;
    double scale_max = 1.1;
    bool brightness = true;
    double brightness_max = 0.2;  // additive
    bool contrast = true;
    double contrast_max = 0.2;  // relative, around the image mean

    static AugmentConfig identity();
    bool is_identity() const;
    void validate() const;
};

// image: (c, h, w) -> same shape.
Tensor augment(const Tensor& image, const AugmentConfig& config, std::mt19937_64& rng);

// One independent transform per image, seeded by (seed, epoch) and the
// image index so results do not depend on processing order.
Dataset augment_dataset(const Dataset& images, const AugmentConfig& config, std::uint64_t seed, std::size_t epoch);

}  // namespace neuromix
