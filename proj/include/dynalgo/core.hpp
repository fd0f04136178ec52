#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace dynalgo {

using Vertex = std::uint32_t;

constexpr Vertex kNoVertex = static_cast<Vertex>(-1);

// Undirected edge in canonical order (lo < hi, no self-loops).
struct Edge {
    Vertex lo = 0;
    Vertex hi = 0;

    friend bool operator==(const Edge& a, const Edge& b) = default;
    friend auto operator<=>(const Edge& a, const Edge& b) = default;

    Vertex other(Vertex v) const { return v == lo ? hi : lo; }
    std::uint64_t key() const { return (std::uint64_t(lo) << 32) | hi; }
};

inline Edge canonical(Vertex u, Vertex v) {
    if (u == v) throw std::invalid_argument("self-loop edge (" + std::to_string(u) + ")");
    return u < v ? Edge{u, v} : Edge{v, u};
}

struct EdgeHash {
    std::size_t operator()(const Edge& e) const {
        std::uint64_t x = e.key();
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return static_cast<std::size_t>(x ^ (x >> 31));
    }
};

enum class OpKind : std::uint8_t { Insert, Delete };

struct UpdateOp {
    OpKind kind = OpKind::Insert;
    Edge edge;

    friend bool operator==(const UpdateOp&, const UpdateOp&) = default;
};

inline UpdateOp insert_op(Vertex u, Vertex v) { return {OpKind::Insert, canonical(u, v)}; }
inline UpdateOp delete_op(Vertex u, Vertex v) { return {OpKind::Delete, canonical(u, v)}; }

inline std::uint32_t ceil_log2(std::uint64_t n) {
    std::uint32_t r = 0;
    std::uint64_t p = 1;
    while (p < n) { p <<= 1; ++r; }
    return r;
}

inline std::uint32_t floor_log2(std::uint64_t n) {
    std::uint32_t r = 0;
    while (n >>= 1) ++r;
    return r;
}

// floor(log4(n)); top level of the matching hierarchy.
inline std::uint32_t floor_log4(std::uint64_t n) { return floor_log2(n) / 2; }

}  // namespace dynalgo

template <>
struct std::hash<dynalgo::Edge> {
    std::size_t operator()(const dynalgo::Edge& e) const { return dynalgo::EdgeHash{}(e); }
};
