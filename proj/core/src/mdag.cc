// Copyright 2026 The floss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "floss/mdag.h"

#include <algorithm>
#include <deque>
#include <utility>

#include "absl/container/flat_hash_map.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

bool Contains(const std::vector<int>& set, int v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

absl::Status CheckDisjoint(const MDag& g, const std::vector<int>& a,
                           const std::vector<int>& b,
                           const std::vector<int>& c) {
  std::vector<int> owner(g.num_vertices(), -1);
  const std::vector<int>* sets[] = {&a, &b, &c};
  for (int s = 0; s < 3; ++s) {
    for (int v : *sets[s]) {
      if (owner[v] != -1 && owner[v] != s) {
        return absl::InvalidArgumentError(
            absl::StrCat("vertex '", g.vertex(v).name,
                         "' appears in more than one query set"));
      }
      owner[v] = s;
    }
  }
  return absl::OkStatus();
}

void CollectPaths(const MDag& g, int current, int target,
                  std::vector<bool>& on_path, Path& partial,
                  std::vector<Path>& out) {
  if (current == target) {
    out.push_back(partial);
    return;
  }
  for (int next = 0; next < g.num_vertices(); ++next) {
    if (on_path[next]) continue;
    EdgeDirection dir;
    if (g.HasEdge(current, next)) {
      dir = EdgeDirection::kForward;
    } else if (g.HasEdge(next, current)) {
      dir = EdgeDirection::kBackward;
    } else {
      continue;
    }
    on_path[next] = true;
    partial.vertices.push_back(next);
    partial.edges.push_back(dir);
    CollectPaths(g, next, target, on_path, partial, out);
    partial.vertices.pop_back();
    partial.edges.pop_back();
    on_path[next] = false;
  }
}

absl::StatusOr<std::vector<Path>> EnumeratePathsIndices(const MDag& g, int a,
                                                        int b) {
  if (g.num_vertices() > MDag::kMaxEnumerationVertices) {
    return absl::OutOfRangeError(absl::StrCat(
        "path enumeration is limited to ", MDag::kMaxEnumerationVertices,
        " vertices; graph has ", g.num_vertices()));
  }
  if (a == b) {
    return absl::InvalidArgumentError("path endpoints must differ");
  }
  std::vector<Path> out;
  std::vector<bool> on_path(g.num_vertices(), false);
  Path partial;
  partial.vertices.push_back(a);
  on_path[a] = true;
  CollectPaths(g, a, b, on_path, partial, out);
  return out;
}

}  // namespace

absl::string_view VisibilityName(Visibility v) {
  switch (v) {
    case Visibility::kObserved:
      return "observed";
    case Visibility::kMissing:
      return "missing";
    case Visibility::kHidden:
      return "hidden";
  }
  return "unknown";
}

absl::string_view MissingnessClassName(MissingnessClass c) {
  switch (c) {
    case MissingnessClass::kMcar:
      return "MCAR";
    case MissingnessClass::kMar:
      return "MAR";
    case MissingnessClass::kMnar:
      return "MNAR";
  }
  return "unknown";
}

absl::StatusOr<MDag> MDag::Build(std::vector<VariableNode> vertices,
                                 std::vector<EdgeSpec> edges) {
  MDag g;
  absl::flat_hash_map<std::string, int> index;
  for (size_t i = 0; i < vertices.size(); ++i) {
    const std::string& name = vertices[i].name;
    if (name.empty()) return absl::InvalidArgumentError("empty vertex name");
    if (!index.emplace(name, static_cast<int>(i)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate vertex name '", name, "'"));
    }
  }
  for (const VariableNode& v : vertices) {
    if (v.visibility == Visibility::kMissing) {
      if (!v.indicator.has_value()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "missing variable '", v.name, "' has no missingness indicator"));
      }
      auto it = index.find(*v.indicator);
      if (it == index.end()) {
        return absl::InvalidArgumentError(
            absl::StrCat("indicator '", *v.indicator, "' of '", v.name,
                         "' is not a vertex"));
      }
      if (vertices[it->second].visibility != Visibility::kObserved) {
        return absl::InvalidArgumentError(
            absl::StrCat("indicator '", *v.indicator, "' of '", v.name,
                         "' must be fully observed"));
      }
    } else if (v.indicator.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("only missing variables take an indicator ('", v.name,
                       "' is ", VisibilityName(v.visibility), ")"));
    }
  }

  const int n = static_cast<int>(vertices.size());
  g.parents_.assign(n, {});
  g.children_.assign(n, {});
  std::vector<std::vector<bool>> adjacent(n, std::vector<bool>(n, false));
  for (const EdgeSpec& e : edges) {
    auto p = index.find(e.parent);
    auto c = index.find(e.child);
    if (p == index.end() || c == index.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "edge ", e.parent, " -> ", e.child, " names an unknown vertex '",
          p == index.end() ? e.parent : e.child, "'"));
    }
    if (p->second == c->second) {
      return absl::InvalidArgumentError(
          absl::StrCat("self-loop on '", e.parent, "'"));
    }
    if (adjacent[p->second][c->second]) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate edge ", e.parent, " -> ", e.child));
    }
    adjacent[p->second][c->second] = true;
    g.parents_[c->second].push_back(p->second);
    g.children_[p->second].push_back(c->second);
  }
  for (int v = 0; v < n; ++v) {
    std::sort(g.parents_[v].begin(), g.parents_[v].end());
    std::sort(g.children_[v].begin(), g.children_[v].end());
  }

  // Kahn's algorithm; anything left over sits on a directed cycle.
  std::vector<int> in_degree(n);
  std::deque<int> ready;
  for (int v = 0; v < n; ++v) {
    in_degree[v] = static_cast<int>(g.parents_[v].size());
    if (in_degree[v] == 0) ready.push_back(v);
  }
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    g.topo_order_.push_back(v);
    for (int c : g.children_[v]) {
      if (--in_degree[c] == 0) ready.push_back(c);
    }
  }
  if (static_cast<int>(g.topo_order_.size()) != n) {
    std::vector<std::string> stuck;
    for (int v = 0; v < n; ++v) {
      if (in_degree[v] > 0) stuck.push_back(vertices[v].name);
    }
    return absl::InvalidArgumentError(absl::StrCat(
        "graph has a directed cycle through {", absl::StrJoin(stuck, ", "),
        "}"));
  }

  // Reflexive transitive closure, filled in reverse topological order.
  g.closure_.assign(n, std::vector<bool>(n, false));
  for (auto it = g.topo_order_.rbegin(); it != g.topo_order_.rend(); ++it) {
    int v = *it;
    g.closure_[v][v] = true;
    for (int c : g.children_[v]) {
      for (int d = 0; d < n; ++d) {
        if (g.closure_[c][d]) g.closure_[v][d] = true;
      }
    }
  }

  g.vertices_ = std::move(vertices);
  g.edges_ = std::move(edges);
  return g;
}

absl::StatusOr<MDag> BuildMDag(std::vector<VariableNode> vertices,
                               std::vector<EdgeSpec> edges) {
  return MDag::Build(std::move(vertices), std::move(edges));
}

absl::StatusOr<int> MDag::IndexOf(absl::string_view name) const {
  for (int i = 0; i < num_vertices(); ++i) {
    if (vertices_[i].name == name) return i;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown vertex '", name, "'"));
}

absl::StatusOr<std::vector<int>> MDag::IndicesOf(
    const std::vector<std::string>& names) const {
  std::vector<int> out;
  out.reserve(names.size());
  for (const std::string& name : names) {
    FLOSS_ASSIGN_OR_RETURN(int id, IndexOf(name));
    if (!Contains(out, id)) out.push_back(id);
  }
  return out;
}

bool MDag::HasEdge(int from, int to) const {
  const std::vector<int>& c = children_[from];
  return std::binary_search(c.begin(), c.end(), to);
}

absl::StatusOr<std::vector<Path>> EnumeratePaths(const MDag& g,
                                                 absl::string_view a,
                                                 absl::string_view b) {
  FLOSS_ASSIGN_OR_RETURN(int ia, g.IndexOf(a));
  FLOSS_ASSIGN_OR_RETURN(int ib, g.IndexOf(b));
  return EnumeratePathsIndices(g, ia, ib);
}

bool IsPathOpen(const MDag& g, const Path& path,
                const std::vector<int>& conditioning) {
  for (size_t i = 1; i + 1 < path.vertices.size(); ++i) {
    const int v = path.vertices[i];
    const bool collider = path.edges[i - 1] == EdgeDirection::kForward &&
                          path.edges[i] == EdgeDirection::kBackward;
    if (collider) {
      bool activated = false;
      for (int c : conditioning) {
        if (g.IsDescendant(v, c)) {
          activated = true;
          break;
        }
      }
      if (!activated) return false;
    } else if (Contains(conditioning, v)) {
      return false;
    }
  }
  return true;
}

std::string FormatPath(const MDag& g, const Path& path) {
  std::string out;
  for (size_t i = 0; i < path.vertices.size(); ++i) {
    if (i > 0) {
      absl::StrAppend(&out, path.edges[i - 1] == EdgeDirection::kForward
                                ? " -> "
                                : " <- ");
    }
    absl::StrAppend(&out, g.vertex(path.vertices[i]).name);
  }
  return out;
}

bool DSeparatedIndices(const MDag& g, const std::vector<int>& a,
                       const std::vector<int>& b, const std::vector<int>& c) {
  const int n = g.num_vertices();
  std::vector<bool> in_c(n, false);
  for (int v : c) in_c[v] = true;
  // Vertices with a descendant in c; a collider there lets the ball through.
  std::vector<bool> ancestor_of_c(n, false);
  for (int v = 0; v < n; ++v) {
    for (int x : c) {
      if (g.IsDescendant(v, x)) {
        ancestor_of_c[v] = true;
        break;
      }
    }
  }
  std::vector<bool> in_b(n, false);
  for (int v : b) in_b[v] = true;

  // State: (vertex, arrived_from_child). Arriving from a child means the
  // trail is travelling "up" against the edge direction.
  std::vector<std::vector<bool>> visited(n, std::vector<bool>(2, false));
  std::vector<std::pair<int, bool>> stack;
  for (int v : a) stack.emplace_back(v, true);
  while (!stack.empty()) {
    auto [v, from_child] = stack.back();
    stack.pop_back();
    if (visited[v][from_child]) continue;
    visited[v][from_child] = true;
    if (!in_c[v] && in_b[v]) return false;
    if (from_child) {
      if (in_c[v]) continue;
      for (int p : g.parents(v)) stack.emplace_back(p, true);
      for (int ch : g.children(v)) stack.emplace_back(ch, false);
    } else {
      if (!in_c[v]) {
        for (int ch : g.children(v)) stack.emplace_back(ch, false);
      }
      if (ancestor_of_c[v]) {
        for (int p : g.parents(v)) stack.emplace_back(p, true);
      }
    }
  }
  return true;
}

absl::StatusOr<bool> DSeparated(const MDag& g,
                                const std::vector<std::string>& a,
                                const std::vector<std::string>& b,
                                const std::vector<std::string>& c) {
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> ia, g.IndicesOf(a));
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> ib, g.IndicesOf(b));
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> ic, g.IndicesOf(c));
  FLOSS_RETURN_IF_ERROR(CheckDisjoint(g, ia, ib, ic));
  return DSeparatedIndices(g, ia, ib, ic);
}

absl::StatusOr<std::optional<Path>> FindOpenPath(
    const MDag& g, const std::vector<std::string>& a,
    const std::vector<std::string>& b, const std::vector<std::string>& c) {
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> ia, g.IndicesOf(a));
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> ib, g.IndicesOf(b));
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> ic, g.IndicesOf(c));
  FLOSS_RETURN_IF_ERROR(CheckDisjoint(g, ia, ib, ic));
  for (int x : ia) {
    for (int y : ib) {
      FLOSS_ASSIGN_OR_RETURN(std::vector<Path> paths,
                             EnumeratePathsIndices(g, x, y));
      for (Path& p : paths) {
        // Paths that pass through another endpoint are covered from there.
        if (IsPathOpen(g, p, ic)) return std::optional<Path>(std::move(p));
      }
    }
  }
  return std::optional<Path>();
}

absl::StatusOr<MissingnessClass> ClassifyMissingness(
    const MDag& g, absl::string_view indicator, absl::string_view target,
    const std::vector<std::string>& observed) {
  FLOSS_ASSIGN_OR_RETURN(int r, g.IndexOf(indicator));
  FLOSS_ASSIGN_OR_RETURN(int t, g.IndexOf(target));
  FLOSS_ASSIGN_OR_RETURN(std::vector<int> obs, g.IndicesOf(observed));
  if (g.vertex(t).visibility != Visibility::kMissing) {
    return absl::InvalidArgumentError(absl::StrCat(
        "target '", target, "' is not marked missing (it is ",
        VisibilityName(g.vertex(t).visibility), ")"));
  }
  if (g.vertex(r).visibility != Visibility::kObserved) {
    return absl::InvalidArgumentError(
        absl::StrCat("indicator '", indicator, "' is not fully observed"));
  }
  for (int v : obs) {
    if (g.vertex(v).visibility != Visibility::kObserved) {
      return absl::InvalidArgumentError(absl::StrCat(
          "conditioning vertex '", g.vertex(v).name, "' is not fully observed"));
    }
  }
  FLOSS_RETURN_IF_ERROR(CheckDisjoint(g, {r}, {t}, obs));
  if (DSeparatedIndices(g, {r}, {t}, {})) return MissingnessClass::kMcar;
  if (DSeparatedIndices(g, {r}, {t}, obs)) return MissingnessClass::kMar;
  return MissingnessClass::kMnar;
}

absl::StatusOr<ShadowConditions> CheckShadowConditions(
    const MDag& g, absl::string_view z, absl::string_view r,
    absl::string_view s, const std::vector<std::string>& d_rest) {
  std::vector<std::string> given_r(d_rest.begin(), d_rest.end());
  given_r.emplace_back(r);
  std::vector<std::string> given_s(d_rest.begin(), d_rest.end());
  given_s.emplace_back(s);
  ShadowConditions out;
  FLOSS_ASSIGN_OR_RETURN(bool z_sep_s,
                         DSeparated(g, {std::string(z)}, {std::string(s)},
                                    given_r));
  FLOSS_ASSIGN_OR_RETURN(bool z_sep_r,
                         DSeparated(g, {std::string(z)}, {std::string(r)},
                                    given_s));
  out.relevance = !z_sep_s;
  out.exclusion = z_sep_r;
  return out;
}

}  // namespace floss
