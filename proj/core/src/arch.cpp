#include "neuromix/arch.hpp"

#include <cctype>
#include <charconv>

#include "neuromix/error.hpp"

namespace neuromix {

namespace {

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '-' || ch == ',') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::size_t parse_units(const std::string& tok, std::size_t position) {
    std::size_t value = 0;
    const char* first = tok.data() + 1;
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (first == last || ec != std::errc() || ptr != last || value == 0) {
        throw ParseError("invalid layer width in token '" + tok + "'", position);
    }
    return value;
}

}  // namespace

std::string ArchSpec::render() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        switch (t.kind) {
            case ArchToken::Kind::conv: out += "C" + std::to_string(t.units); break;
            case ArchToken::Kind::pool: out += "M"; break;
            case ArchToken::Kind::dense: out += "F" + std::to_string(t.units); break;
        }
    }
    return out;
}

ArchSpec parse_arch(std::string_view spec, const Shape& input_shape) {
    if (input_shape.size() != 1 && input_shape.size() != 3) {
        throw ParseError("input shape must be (d) or (c, h, w), got " + shape_string(input_shape), 0);
    }
    for (auto d : input_shape) {
        if (d == 0) throw ParseError("input shape has a zero dimension", 0);
    }
    const auto raw = split_tokens(spec);
    if (raw.empty()) throw ParseError("empty architecture string", 0);

    ArchSpec arch;
    arch.input_shape = input_shape;
    Shape shape = input_shape;
    bool flattened = input_shape.size() == 1;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::string& tok = raw[i];
        const std::size_t pos = i + 1;
        const char head = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
        if (head == 'C') {
            if (flattened) throw ParseError("convolution '" + tok + "' after flatten", pos);
            const std::size_t units = parse_units(tok, pos);
            arch.tokens.push_back({ArchToken::Kind::conv, units});
            shape = {units, shape[1], shape[2]};
        } else if (head == 'M') {
            if (tok.size() != 1) throw ParseError("unknown token '" + tok + "'", pos);
            if (flattened) throw ParseError("max-pool after flatten", pos);
            arch.tokens.push_back({ArchToken::Kind::pool, 0});
            shape = {shape[0], (shape[1] + kPoolWindow - 1) / kPoolWindow, (shape[2] + kPoolWindow - 1) / kPoolWindow};
        } else if (head == 'F') {
            const std::size_t units = parse_units(tok, pos);
            arch.tokens.push_back({ArchToken::Kind::dense, units});
            flattened = true;
            shape = {units};
        } else {
            throw ParseError("unknown token '" + tok + "'", pos);
        }
        arch.output_shapes.push_back(shape);
    }
    if (arch.tokens.back().kind != ArchToken::Kind::dense) {
        throw ParseError("architecture must end with a dense F<K> layer", raw.size());
    }
    return arch;
}

}  // namespace neuromix
