#include "neuromix/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "neuromix/error.hpp"

namespace neuromix {

Shape Dataset::sample_shape() const {
    if (samples.empty()) return {};
    return Shape(samples.shape().begin() + 1, samples.shape().end());
}

std::size_t Dataset::num_classes() const {
    if (!labels || labels->empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels->begin(), labels->end())) + 1;
}

Tensor Dataset::gather(std::span<const std::size_t> indices) const {
    if (indices.empty()) throw DimensionError("gather: empty index list");
    const std::size_t stride = samples.size() / size();
    Shape shape = samples.shape();
    shape[0] = indices.size();
    Tensor out(shape);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        if (indices[b] >= size()) throw DimensionError("gather: index out of range");
        std::memcpy(out.raw() + b * stride, samples.raw() + indices[b] * stride, stride * sizeof(double));
    }
    return out;
}

Dataset Dataset::head(std::size_t count) const {
    if (count >= size()) return *this;
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    Dataset out;
    out.kind = kind;
    out.samples = gather(idx);
    if (labels) out.labels = std::vector<int>(labels->begin(), labels->begin() + static_cast<long>(count));
    return out;
}

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file " + path.string());

    std::vector<double> values;
    std::vector<int> labels;
    bool has_label = false;
    bool header_seen = false;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        std::vector<double> parsed(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) numeric = numeric && parse_double(cells[c], parsed[c]);

        if (!numeric && rows == 0 && !header_seen) {
            header_seen = true;
            width = cells.size();
            std::string last = cells.back();
            std::transform(last.begin(), last.end(), last.begin(), [](unsigned char c) { return std::tolower(c); });
            has_label = last == "label";
            if (has_label && width < 2) throw ParseError("CSV needs at least one feature column", line_no);
            continue;
        }
        if (!numeric) throw ParseError("non-numeric cell in CSV " + path.string(), line_no);
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(cells.size()),
                             line_no);
        }
        const std::size_t features = has_label ? width - 1 : width;
        values.insert(values.end(), parsed.begin(), parsed.begin() + static_cast<long>(features));
        if (has_label) {
            const double l = parsed.back();
            if (l < 0 || l != std::floor(l)) throw ParseError("labels must be non-negative integers", line_no);
            labels.push_back(static_cast<int>(l));
        }
        ++rows;
    }
    if (rows == 0) throw DataError("CSV file " + path.string() + " has no data rows");
    const std::size_t features = has_label ? width - 1 : width;
    Dataset ds;
    ds.kind = DataKind::vector;
    ds.samples = Tensor({rows, features}, std::move(values));
    if (has_label) ds.labels = std::move(labels);
    return ds;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
    if (data.samples.rank() != 2) throw DimensionError("write_csv expects vector samples");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write CSV file " + path.string());
    const std::size_t d = data.samples.dim(1);
    for (std::size_t c = 0; c < d; ++c) {
        if (c) out << ',';
        out << (d == 2 ? (c == 0 ? "x" : "y") : "x" + std::to_string(c + 1));
    }
    if (data.labels) out << ",label";
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            if (c) out << ',';
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, data.samples.at(i, c));
            out.write(buf, ptr - buf);
        }
        if (data.labels) out << ',' << (*data.labels)[i];
        out << '\n';
    }
    if (!out) throw DataError("failed writing CSV file " + path.string());
}

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open IDX file " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset) {
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels) {
    const auto img = read_all(images);
    if (img.size() < 16) throw DataError("IDX image file " + images.string() + " is truncated or empty");
    if (read_be32(img, 0) != 0x00000803) throw DataError("bad IDX3 magic in " + images.string());
    const std::size_t n = read_be32(img, 4), h = read_be32(img, 8), w = read_be32(img, 12);
    if (n == 0 || h == 0 || w == 0) throw DataError("IDX image file " + images.string() + " has a zero dimension");
    if (img.size() != 16 + n * h * w) {
        throw DataError("IDX image payload size mismatch in " + images.string() + ": expected " +
                        std::to_string(n * h * w) + " bytes, found " + std::to_string(img.size() - 16));
    }
    Dataset ds;
    ds.kind = DataKind::image;
    ds.samples = Tensor({n, 1, h, w});
    for (std::size_t i = 0; i < n * h * w; ++i) ds.samples[i] = img[16 + i] / 255.0;

    if (labels) {
        const auto lab = read_all(*labels);
        if (lab.size() < 8) throw DataError("IDX label file " + labels->string() + " is truncated or empty");
        if (read_be32(lab, 0) != 0x00000801) throw DataError("bad IDX1 magic in " + labels->string());
        const std::size_t m = read_be32(lab, 4);
        if (m != n) {
            throw DataError("label count " + std::to_string(m) + " does not match image count " + std::to_string(n));
        }
        if (lab.size() != 8 + m) throw DataError("IDX label payload size mismatch in " + labels->string());
        ds.labels = std::vector<int>(lab.begin() + 8, lab.end());
    }
    return ds;
}

void write_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels,
               const Dataset& data) {
    const Shape s = data.samples.shape();
    if (s.size() != 4 || s[1] != 1) throw DimensionError("write_idx expects (N, 1, H, W) samples");
    std::ofstream out(images, std::ios::binary);
    if (!out) throw DataError("cannot write " + images.string());
    write_be32(out, 0x00000803);
    write_be32(out, static_cast<std::uint32_t>(s[0]));
    write_be32(out, static_cast<std::uint32_t>(s[2]));
    write_be32(out, static_cast<std::uint32_t>(s[3]));
    for (double v : data.samples.data()) {
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    if (labels) {
        if (!data.labels) throw DataError("write_idx: dataset has no labels");
        std::ofstream lo(*labels, std::ios::binary);
        if (!lo) throw DataError("cannot write " + labels->string());
        write_be32(lo, 0x00000801);
        write_be32(lo, static_cast<std::uint32_t>(data.labels->size()));
        for (int l : *data.labels) lo.put(static_cast<char>(l));
    }
}

Tensor rgb_to_gray(const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3) throw DimensionError("rgb_to_gray expects (3, H, W)");
    const std::size_t hw = image.dim(1) * image.dim(2);
    Tensor gray({1, image.dim(1), image.dim(2)});
    for (std::size_t p = 0; p < hw; ++p) {
        gray[p] = 0.299 * image[p] + 0.587 * image[hw + p] + 0.114 * image[2 * hw + p];
    }
    return gray;
}

Tensor sobel_preprocess(const Tensor& image) {
    if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
        throw DimensionError("sobel_preprocess expects (1, H, W) or (3, H, W), got " + shape_string(image.shape()));
    }
    const Tensor gray = image.dim(0) == 3 ? rgb_to_gray(image) : image;
    const long h = static_cast<long>(gray.dim(1)), w = static_cast<long>(gray.dim(2));
    auto px = [&](long y, long x) {
        y = std::clamp(y, 0L, h - 1);
        x = std::clamp(x, 0L, w - 1);
        return gray[static_cast<std::size_t>(y * w + x)];
    };
    Tensor out({2, gray.dim(1), gray.dim(2)});
    const std::size_t plane = gray.dim(1) * gray.dim(2);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            const double gx = (px(y - 1, x + 1) - px(y - 1, x - 1)) + 2.0 * (px(y, x + 1) - px(y, x - 1)) +
                              (px(y + 1, x + 1) - px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) - px(y - 1, x - 1)) + 2.0 * (px(y + 1, x) - px(y - 1, x)) +
                              (px(y + 1, x + 1) - px(y - 1, x + 1));
            out[static_cast<std::size_t>(y * w + x)] = gx;
            out[plane + static_cast<std::size_t>(y * w + x)] = gy;
        }
    }
    return out;
}

Dataset sobel_dataset(const Dataset& images) {
    if (images.kind != DataKind::image) throw DataError("Sobel preprocessing needs image data");
    const Shape s = images.samples.shape();
    const std::size_t n = s[0], in_stride = s[1] * s[2] * s[3], out_stride = 2 * s[2] * s[3];
    Dataset out;
    out.kind = DataKind::image;
    out.labels = images.labels;
    out.samples = Tensor({n, 2, s[2], s[3]});
    for (std::size_t i = 0; i < n; ++i) {
        Tensor img({s[1], s[2], s[3]},
                   std::vector<double>(images.samples.raw() + i * in_stride, images.samples.raw() + (i + 1) * in_stride));
        const Tensor e = sobel_preprocess(img);
        std::memcpy(out.samples.raw() + i * out_stride, e.raw(), out_stride * sizeof(double));
    }
    return out;
}

Dataset make_blobs(std::size_t clusters, std::size_t points_per_cluster, double separation, std::uint64_t seed,
                   double sigma) {
    if (clusters < 2) throw ConfigError("make_blobs needs at least 2 clusters");
    if (points_per_cluster == 0) throw ConfigError("make_blobs needs at least one point per cluster");
    if (!(sigma > 0.0) || !(separation >= 0.0)) throw ConfigError("make_blobs: sigma must be > 0, separation >= 0");

    std::mt19937_64 rng(seed);
    const double min_dist = separation * sigma;
    double half_width = std::max(1.0, min_dist * std::sqrt(static_cast<double>(clusters)));
    std::vector<std::pair<double, double>> centers;
    std::size_t attempts = 0;
    while (centers.size() < clusters) {
        std::uniform_real_distribution<double> u(-half_width, half_width);
        const double cx = u(rng), cy = u(rng);
        const bool far = std::all_of(centers.begin(), centers.end(), [&](const auto& c) {
            return std::hypot(c.first - cx, c.second - cy) >= min_dist;
        });
        if (far) {
            centers.emplace_back(cx, cy);
        } else if (++attempts % 1000 == 0) {
            half_width *= 1.25;
        }
    }

    std::normal_distribution<double> noise(0.0, sigma);
    const std::size_t n = clusters * points_per_cluster;
    Dataset ds;
    ds.kind = DataKind::vector;
    ds.samples = Tensor({n, 2});
    ds.labels = std::vector<int>(n);
    for (std::size_t k = 0; k < clusters; ++k) {
        for (std::size_t p = 0; p < points_per_cluster; ++p) {
            const std::size_t i = k * points_per_cluster + p;
            ds.samples.at(i, 0) = centers[k].first + noise(rng);
            ds.samples.at(i, 1) = centers[k].second + noise(rng);
            (*ds.labels)[i] = static_cast<int>(k);
        }
    }
    return ds;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t dataset_size, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch, bool drop_last) {
    if (batch_size < 2) throw ConfigError("batch size must be >= 2");
    if (batch_size > dataset_size) {
        throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds dataset size " +
                          std::to_string(dataset_size));
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> order(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i) order[i] = i;
    // Fisher-Yates with explicit arithmetic so the order does not depend on
    // the standard library's shuffle.
    for (std::size_t i = dataset_size; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t first = 0; first < dataset_size; first += batch_size) {
        const std::size_t count = std::min(batch_size, dataset_size - first);
        if (count < batch_size && drop_last) break;
        batches.emplace_back(order.begin() + static_cast<long>(first),
                             order.begin() + static_cast<long>(first + count));
    }
    return batches;
}

std::vector<std::vector<std::size_t>> sequential_batches(std::size_t dataset_size, std::size_t batch_size) {
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t first = 0; first < dataset_size; first += batch_size) {
        std::vector<std::size_t> b;
        for (std::size_t i = first; i < std::min(dataset_size, first + batch_size); ++i) b.push_back(i);
        batches.push_back(std::move(b));
    }
    return batches;
}

}  // namespace neuromix
