#ifndef GMBP_GRAPH_HPP_
#define GMBP_GRAPH_HPP_

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gmbp/gaussmix.hpp"
#include "gmbp/image.hpp"

namespace gmbp {

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

inline VarId pixel_id(int x, int y, int width) {
  return static_cast<VarId>(y) * width + x;
}

// A 2x2 window holding at least one unknown pixel. `window` lists the four
// pixel ids in row-major order, which is also ascending id order.
struct Clique {
  int id = 0;
  PixelCoord top_left;
  std::array<VarId, 4> window{};
  VarSet vars;                                    // unknown pixels
  std::vector<std::pair<VarId, double>> observed;  // known pixels and intensities
};

struct CliqueEdge {
  int a = 0;  // a < b
  int b = 0;
  VarSet separator;
};

struct CliqueGraph {
  int width = 0;
  int height = 0;
  std::vector<Clique> cliques;
  std::vector<CliqueEdge> edges;              // sorted by (a, b)
  std::vector<std::vector<int>> adjacency;    // ascending neighbor ids

  std::size_t unknown_count() const;
  const CliqueEdge* find_edge(int i, int j) const;
  const VarSet& separator(int i, int j) const;
};

// Cliques for every 2x2 window containing an unknown pixel, connected
// whenever they share an unknown pixel. Unknown pixels on the outermost
// row or column are rejected (UncoverableMask).
CliqueGraph build_graph(const GrayImage& image, const InpaintMask& mask);

// Connects every pair of cliques with a non-empty intersection.
CliqueGraph connect_cliques(int width, int height, std::vector<Clique> cliques);
// Uses exactly the given (unordered) edges; separators are recomputed.
CliqueGraph with_edges(int width, int height, std::vector<Clique> cliques,
                       const std::vector<std::pair<int, int>>& edges);

bool is_forest(const CliqueGraph& graph);

// A maximum-weight spanning forest (weights = separator sizes) of the graph,
// returned only if it has the running-intersection property: for every
// variable, the cliques containing it form a connected subtree.
std::optional<CliqueGraph> junction_tree(const CliqueGraph& graph);

// True when exact two-pass propagation applies (a junction tree exists).
bool detect_tree(const CliqueGraph& graph);

enum class ScheduleKind { Auto, TwoPass, Loopy };
const char* to_string(ScheduleKind kind);

struct DirectedEdge {
  int from = 0;
  int to = 0;
  friend auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::Loopy;  // resolved, never Auto
  CliqueGraph graph;                        // graph the messages travel on
  std::vector<std::vector<DirectedEdge>> passes;

  std::size_t size() const;
};

// two_pass: leaves-to-root then root-to-leaves per connected component,
// root = lowest clique id. loopy: `iterations` passes, each over all
// directed edges in ascending (from, to) order.
Schedule make_schedule(const CliqueGraph& graph, ScheduleKind kind, int iterations = 1);

// Edge list with separators, one per line.
std::string dump_graph(const CliqueGraph& graph);

}  // namespace gmbp

#endif  // GMBP_GRAPH_HPP_
