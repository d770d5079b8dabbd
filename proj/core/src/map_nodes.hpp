#pragma once

// Internal node representation of the map DSL, shared by the evaluator,
// the parser and the amplification constructors. Not installed.

#include "twistlab/maps.hpp"

namespace twistlab {

enum class NodeKind { Zero, Linear, KaltonPeck, EnfloDelta, Scale, Sum, PreLinear, PostLinear };

struct HomMap::Node {
    NodeKind kind;
    NormedSpace domain, codomain;
    Mat matrix;     // Linear / PreLinear / PostLinear
    double c = 1.0; // Scale
    NodePtr a, b;
};

namespace detail {

inline HomMap::NodePtr make_map_node(NodeKind kind, NormedSpace dom, NormedSpace cod,
                                     Mat matrix = {}, double c = 1.0, HomMap::NodePtr a = nullptr,
                                     HomMap::NodePtr b = nullptr) {
    auto n = std::make_shared<HomMap::Node>();
    n->kind = kind;
    n->domain = std::move(dom);
    n->codomain = std::move(cod);
    n->matrix = std::move(matrix);
    n->c = c;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

} // namespace detail

} // namespace twistlab
