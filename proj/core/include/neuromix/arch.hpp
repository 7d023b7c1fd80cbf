#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "neuromix/tensor.hpp"

namespace neuromix {

// One token of an architecture string: C<n> (3x3 conv, n filters),
// M (2x2 max-pool), F<n> (dense, n outputs).
struct ArchToken {
    enum class Kind { conv, pool, dense };

    Kind kind;
    std::size_t units = 0;  // filters or outputs; 0 for pool

    friend bool operator==(const ArchToken&, const ArchToken&) = default;
};

struct ArchSpec {
    std::vector<ArchToken> tokens;
    Shape input_shape;                // per-sample: (d) or (c, h, w)
    std::vector<Shape> output_shapes;  // per-sample shape after each token

    std::size_t clusters() const { return tokens.back().units; }
    std::string render() const;
};

inline constexpr std::size_t kConvKernel = 3;
inline constexpr std::size_t kPoolWindow = 2;

// Parses whitespace (or '-' / ',') separated tokens and infers shapes.
// Throws ParseError carrying the 1-based index of the offending token.
ArchSpec parse_arch(std::string_view spec, const Shape& input_shape);

}  // namespace neuromix
