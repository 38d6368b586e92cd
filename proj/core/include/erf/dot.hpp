#pragma once

#include <span>
#include <string>
#include <string_view>

#include "erf/cart.hpp"

namespace erforest {

// Graphviz digraph of one tree. Split nodes read "name < threshold"; leaves
// show the class-1 probability and the node weight. Edges are labelled
// yes/no for the left/right branch.
std::string to_dot(const TreeModel& tree, std::span<const std::string> column_names,
                   std::string_view graph_name = "tree");

}  // namespace erforest
