#pragma once

#include <functional>
#include <vector>

#include "dkgraph/dkgraph.hpp"

namespace fixtures {

using namespace dkgraph;

inline VertexId V(std::uint32_t i) { return VertexId::internal(i); }
inline VertexId S(std::uint32_t j) { return VertexId::star(j); }

/// D = (1,2,1,3,3,0 x 7), kept in the given (unsorted) labelling.
inline DegreeSequence example_sequence() {
    return DegreeSequence::validate({1, 2, 1, 3, 3, 0, 0, 0, 0, 0, 0, 0}, SequenceKind::tree, 0, SortPolicy::keep);
}

inline std::vector<VertexId> example_tuple() {
    return {V(4), V(5), V(2), V(5), V(3), V(4), V(5), V(4), V(1), V(2)};
}

inline LabeledTree example_tree() {
    const auto tuple = example_tuple();
    return stick_break_tree(example_sequence(), tuple);
}

/// Worked-example tree with (S1,S2), (S3,S4) glued.
inline Multigraph example_graph() { return glue_leaves(example_tree(), canonical_pairs(2)); }

inline Multigraph double_edge_fixture() {
    Multigraph g;
    g.add_edge(V(1), V(2), 2);
    return g;
}

inline ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ParseError;
}

template <class T>
std::vector<long long> as_ll(std::initializer_list<T> v) {
    return {v.begin(), v.end()};
}

} // namespace fixtures
