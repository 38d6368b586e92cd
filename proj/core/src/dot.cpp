#include "erf/dot.hpp"

#include <cstdio>
#include <stdexcept>

#include "erf/dataset.hpp"

namespace erforest {

namespace {

std::string dot_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_dot(const TreeModel& tree, std::span<const std::string> column_names,
                   std::string_view graph_name) {
  std::string out = "digraph " + dot_string(graph_name) + " {\n";
  out += "  node [shape=box, fontname=\"Helvetica\"];\n";
  tree.traverse([&](int idx, int) {
    const auto& n = tree.nodes[static_cast<std::size_t>(idx)];
    std::string label;
    if (n.is_leaf()) {
      label = "p1 = " + fixed(n.p1, 3) + "\nweight = " + format_number(n.weight);
    } else {
      const auto f = static_cast<std::size_t>(n.feature);
      const std::string name = f < column_names.size() ? column_names[f] : "x" + std::to_string(f);
      label = name + " < " + format_number(n.threshold);
    }
    out += "  n" + std::to_string(idx) + " [label=" + dot_string(label);
    if (n.is_leaf()) out += ", style=rounded";
    out += "];\n";
    if (!n.is_leaf()) {
      out += "  n" + std::to_string(idx) + " -> n" + std::to_string(n.left) + " [label=\"yes\"];\n";
      out += "  n" + std::to_string(idx) + " -> n" + std::to_string(n.right) + " [label=\"no\"];\n";
    }
  });
  out += "}\n";
  return out;
}

}  // namespace erforest
