#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include "dkgraph/error.hpp"

namespace dkgraph {

/// Vertex label. Internal vertices V_i (i >= 1) carry the degree sequence,
/// stars S_j (j >= 0) are labelled leaves, overflow vertices Vinf_i (i >= 1)
/// stand for draws from the remainder mass of a probability vector.
struct VertexId {
    enum class Kind : std::uint8_t { internal = 0, star = 1, overflow = 2 };

    Kind kind = Kind::internal;
    std::uint32_t index = 0;

    static constexpr VertexId internal(std::uint32_t i) { return {Kind::internal, i}; }
    static constexpr VertexId star(std::uint32_t j) { return {Kind::star, j}; }
    static constexpr VertexId overflow(std::uint32_t i) { return {Kind::overflow, i}; }

    constexpr bool is_internal() const { return kind == Kind::internal; }
    constexpr bool is_star() const { return kind == Kind::star; }
    constexpr bool is_overflow() const { return kind == Kind::overflow; }

    friend constexpr auto operator<=>(const VertexId&, const VertexId&) = default;

    std::string str() const {
        switch (kind) {
        case Kind::internal: return "V" + std::to_string(index);
        case Kind::star: return "S" + std::to_string(index);
        case Kind::overflow: return "Vinf" + std::to_string(index);
        }
        return "?";
    }

    /// Parses "V3", "S0", "Vinf2".
    static VertexId parse(std::string_view text) {
        Kind kind;
        std::string_view digits;
        if (text.starts_with("Vinf")) {
            kind = Kind::overflow;
            digits = text.substr(4);
        } else if (text.starts_with("V")) {
            kind = Kind::internal;
            digits = text.substr(1);
        } else if (text.starts_with("S")) {
            kind = Kind::star;
            digits = text.substr(1);
        } else {
            fail(ErrorCode::ParseError, "bad vertex label '" + std::string(text) + "'");
        }
        std::uint32_t value = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
            fail(ErrorCode::ParseError, "bad vertex label '" + std::string(text) + "'");
        }
        return {kind, value};
    }
};

inline std::ostream& operator<<(std::ostream& os, const VertexId& v) { return os << v.str(); }

} // namespace dkgraph

template <>
struct std::hash<dkgraph::VertexId> {
    std::size_t operator()(const dkgraph::VertexId& v) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(v.kind) << 32) | v.index);
    }
};
