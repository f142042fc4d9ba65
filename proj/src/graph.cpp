#include "gmbp/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "gmbp/error.hpp"

namespace gmbp {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

void finalize(CliqueGraph& g, std::vector<std::pair<int, int>> pairs) {
  for (auto& [a, b] : pairs) {
    if (a == b) throw Error(ErrorKind::InvalidArgument, "self edge");
    if (a > b) std::swap(a, b);
    const int count = static_cast<int>(g.cliques.size());
    if (a < 0 || b >= count) throw Error(ErrorKind::InvalidArgument, "edge references unknown clique");
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  g.edges.clear();
  g.adjacency.assign(g.cliques.size(), {});
  for (auto [a, b] : pairs) {
    VarSet sep = set_intersection(g.cliques[a].vars, g.cliques[b].vars);
    if (sep.empty()) {
      throw Error(ErrorKind::InvalidArgument, "edge between cliques with no shared unknowns");
    }
    g.edges.push_back({a, b, std::move(sep)});
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  }
  for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
}

void check_ids(const std::vector<Clique>& cliques) {
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    if (cliques[i].id != static_cast<int>(i)) {
      throw Error(ErrorKind::InvalidArgument, "clique ids must be 0..n-1 in order");
    }
  }
}

}  // namespace

std::size_t CliqueGraph::unknown_count() const {
  std::set<VarId> ids;
  for (const auto& c : cliques) ids.insert(c.vars.begin(), c.vars.end());
  return ids.size();
}

const CliqueEdge* CliqueGraph::find_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{i, j},
                             [](const CliqueEdge& e, const std::pair<int, int>& key) {
                               return std::pair{e.a, e.b} < key;
                             });
  if (it == edges.end() || it->a != i || it->b != j) return nullptr;
  return &*it;
}

const VarSet& CliqueGraph::separator(int i, int j) const {
  const CliqueEdge* e = find_edge(i, j);
  if (!e) {
    throw Error(ErrorKind::InvalidArgument,
                "no edge " + std::to_string(i) + "-" + std::to_string(j));
  }
  return e->separator;
}

CliqueGraph build_graph(const GrayImage& image, const InpaintMask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorKind::DimensionMismatch, "mask and image sizes differ");
  }
  const int w = image.width();
  const int h = image.height();
  std::vector<PixelCoord> border;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) && (x == 0 || y == 0 || x == w - 1 || y == h - 1)) border.push_back({x, y});
    }
  }
  if (!border.empty()) {
    std::ostringstream msg;
    msg << border.size() << " unknown pixel(s) on the image border:";
    for (std::size_t i = 0; i < border.size() && i < 20; ++i) {
      msg << " (" << border[i].x << "," << border[i].y << ")";
    }
    if (border.size() > 20) msg << " ...";
    throw Error(ErrorKind::UncoverableMask, msg.str());
  }

  std::vector<Clique> cliques;
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      Clique c;
      c.top_left = {x, y};
      std::vector<VarId> unknown;
      int k = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const VarId id = pixel_id(x + dx, y + dy, w);
          c.window[k++] = id;
          if (mask(x + dx, y + dy)) {
            unknown.push_back(id);
          } else {
            c.observed.emplace_back(id, image(x + dx, y + dy));
          }
        }
      }
      if (unknown.empty()) continue;
      c.id = static_cast<int>(cliques.size());
      c.vars = VarSet(std::move(unknown));
      cliques.push_back(std::move(c));
    }
  }
  return connect_cliques(w, h, std::move(cliques));
}

CliqueGraph connect_cliques(int width, int height, std::vector<Clique> cliques) {
  check_ids(cliques);
  std::map<VarId, std::vector<int>> owners;
  for (const auto& c : cliques) {
    for (VarId v : c.vars) owners[v].push_back(c.id);
  }
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [v, ids] : owners) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) pairs.emplace_back(ids[i], ids[j]);
    }
  }
  CliqueGraph g;
  g.width = width;
  g.height = height;
  g.cliques = std::move(cliques);
  finalize(g, std::move(pairs));
  return g;
}

CliqueGraph with_edges(int width, int height, std::vector<Clique> cliques,
                       const std::vector<std::pair<int, int>>& edges) {
  check_ids(cliques);
  CliqueGraph g;
  g.width = width;
  g.height = height;
  g.cliques = std::move(cliques);
  finalize(g, edges);
  return g;
}

bool is_forest(const CliqueGraph& graph) {
  DisjointSets sets(graph.cliques.size());
  for (const auto& e : graph.edges) {
    if (!sets.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) return false;
  }
  return true;
}

std::optional<CliqueGraph> junction_tree(const CliqueGraph& graph) {
  std::vector<std::size_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return graph.edges[i].separator.size() > graph.edges[j].separator.size();
  });
  DisjointSets sets(graph.cliques.size());
  std::vector<std::pair<int, int>> kept;
  for (std::size_t i : order) {
    const auto& e = graph.edges[i];
    if (sets.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) {
      kept.emplace_back(e.a, e.b);
    }
  }
  CliqueGraph tree = with_edges(graph.width, graph.height, graph.cliques, kept);

  std::map<VarId, std::size_t> holders, links;
  for (const auto& c : tree.cliques) {
    for (VarId v : c.vars) ++holders[v];
  }
  for (const auto& e : tree.edges) {
    for (VarId v : e.separator) ++links[v];
  }
  for (const auto& [v, count] : holders) {
    if (links[v] + 1 != count) return std::nullopt;
  }
  return tree;
}

bool detect_tree(const CliqueGraph& graph) { return junction_tree(graph).has_value(); }

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Auto: return "auto";
    case ScheduleKind::TwoPass: return "two_pass";
    case ScheduleKind::Loopy: return "loopy";
  }
  return "unknown";
}

std::size_t Schedule::size() const {
  std::size_t n = 0;
  for (const auto& p : passes) n += p.size();
  return n;
}

Schedule make_schedule(const CliqueGraph& graph, ScheduleKind kind, int iterations) {
  if (iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 1");
  std::optional<CliqueGraph> tree;
  if (kind != ScheduleKind::Loopy) tree = junction_tree(graph);
  if (kind == ScheduleKind::TwoPass && !tree) {
    throw Error(ErrorKind::CyclicGraph, "two_pass schedule requested but no junction tree exists");
  }

  Schedule schedule;
  if (tree) {
    schedule.kind = ScheduleKind::TwoPass;
    schedule.graph = std::move(*tree);
    const auto& g = schedule.graph;
    std::vector<DirectedEdge> upward, downward;
    std::vector<bool> visited(g.cliques.size(), false);
    for (std::size_t root = 0; root < g.cliques.size(); ++root) {
      if (visited[root]) continue;
      // Iterative DFS: pre-order gives the downward pass, post-order the upward one.
      struct Frame {
        int node;
        int parent;
        std::size_t next;
      };
      std::vector<Frame> stack{{static_cast<int>(root), -1, 0}};
      visited[root] = true;
      while (!stack.empty()) {
        Frame& top = stack.back();
        const auto& adj = g.adjacency[top.node];
        if (top.next < adj.size()) {
          const int child = adj[top.next++];
          if (child == top.parent) continue;
          visited[child] = true;
          downward.push_back({top.node, child});
          stack.push_back({child, top.node, 0});
        } else {
          if (top.parent >= 0) upward.push_back({top.node, top.parent});
          stack.pop_back();
        }
      }
    }
    schedule.passes = {std::move(upward), std::move(downward)};
  } else {
    schedule.kind = ScheduleKind::Loopy;
    schedule.graph = graph;
    std::vector<DirectedEdge> sweep;
    sweep.reserve(graph.edges.size() * 2);
    for (std::size_t i = 0; i < graph.cliques.size(); ++i) {
      for (int j : graph.adjacency[i]) sweep.push_back({static_cast<int>(i), j});
    }
    schedule.passes.assign(static_cast<std::size_t>(iterations), sweep);
  }
  return schedule;
}

std::string dump_graph(const CliqueGraph& graph) {
  std::ostringstream out;
  out << "# cliques " << graph.cliques.size() << " edges " << graph.edges.size() << '\n';
  for (const auto& c : graph.cliques) {
    out << "clique " << c.id << " at " << c.top_left.x << ',' << c.top_left.y << " unknown "
        << to_string(c.vars) << '\n';
  }
  for (const auto& e : graph.edges) {
    out << "edge " << e.a << ' ' << e.b << " separator " << to_string(e.separator) << '\n';
  }
  return out.str();
}

}  // namespace gmbp
