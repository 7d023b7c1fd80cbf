#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "neuromix/tensor.hpp"

namespace neuromix {

enum class DataKind { vector, image };

// N samples of identical shape stored contiguously as (N, sample_shape...).
// Labels are carried for evaluation only and never reach training.
struct Dataset {
    DataKind kind = DataKind::vector;
    Tensor samples;
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return samples.empty() ? 0 : samples.dim(0); }
    Shape sample_shape() const;
    std::size_t num_classes() const;

    // Rows `indices` stacked into a batch (n, sample_shape...).
    Tensor gather(std::span<const std::size_t> indices) const;
    // The first `count` samples (or all, when count >= size()).
    Dataset head(std::size_t count) const;
};

// Numeric CSV. A first line with any non-numeric cell is a header; a header
// whose last column is named "label" marks integer labels.
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Dataset& data);

// IDX3 images (magic 0x00000803) scaled to [0,1], shape (N, 1, H, W), with
// optional IDX1 labels (magic 0x00000801).
Dataset load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels = {});
void write_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels,
               const Dataset& data);

// Single image (1|3, H, W) -> (2, H, W): channel 0 is the horizontal
// gradient (Gx), channel 1 the vertical gradient (Gy). RGB is converted to
// luma first. Borders replicate edge pixels, so constant images map to zero.
Tensor sobel_preprocess(const Tensor& image);
Tensor rgb_to_gray(const Tensor& image);
Dataset sobel_dataset(const Dataset& images);

// K isotropic unit-variance Gaussian blobs in 2-D whose centres are
// pairwise at least separation * sigma apart; labels are balanced.
Dataset make_blobs(std::size_t clusters, std::size_t points_per_cluster, double separation, std::uint64_t seed,
                   double sigma = 1.0);

// Shuffled index batches for one epoch. The shuffle depends only on
// (seed, epoch). With drop_last, a trailing short batch is discarded.
std::vector<std::vector<std::size_t>> make_batches(std::size_t dataset_size, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch, bool drop_last = true);

// In-order batches covering every index once (evaluation).
std::vector<std::vector<std::size_t>> sequential_batches(std::size_t dataset_size, std::size_t batch_size);

}  // namespace neuromix
