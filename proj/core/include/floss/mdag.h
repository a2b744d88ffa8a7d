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

#ifndef FLOSS_MDAG_H_
#define FLOSS_MDAG_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace floss {

// How a variable looks from the central server's point of view.
enum class Visibility {
  kObserved,  // always recorded
  kMissing,   // recorded only when its missingness indicator is 1
  kHidden,    // never recorded
};

absl::string_view VisibilityName(Visibility v);

struct VariableNode {
  std::string name;
  Visibility visibility = Visibility::kObserved;
  // Required for kMissing variables: the fully observed vertex whose value
  // says whether this variable was recorded.
  std::optional<std::string> indicator;
};

struct EdgeSpec {
  std::string parent;
  std::string child;
  // Marks an edge whose child is a deterministic function of its parents
  // (e.g. a gradient computed from features and labels). Carried for display
  // only; it has no effect on separation queries.
  bool deterministic = false;
};

enum class MissingnessClass { kMcar, kMar, kMnar };

absl::string_view MissingnessClassName(MissingnessClass c);

// One step along a path: the edge between vertices[i] and vertices[i + 1]
// either points forward (vertices[i] -> vertices[i + 1]) or backward.
enum class EdgeDirection { kForward, kBackward };

struct Path {
  std::vector<int> vertices;
  std::vector<EdgeDirection> edges;  // size() == vertices.size() - 1
};

// Missing-data DAG. Immutable after construction, so concurrent queries from
// multiple threads are safe.
class MDag {
 public:
  // Paths are only enumerated on graphs up to this many vertices; the number
  // of simple paths grows factorially beyond that.
  static constexpr int kMaxEnumerationVertices = 12;

  // Validates the vertex and edge lists and checks acyclicity with a
  // topological sort.
  static absl::StatusOr<MDag> Build(std::vector<VariableNode> vertices,
                                    std::vector<EdgeSpec> edges);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<VariableNode>& vertices() const { return vertices_; }
  const std::vector<EdgeSpec>& edges() const { return edges_; }
  const VariableNode& vertex(int id) const { return vertices_[id]; }

  absl::StatusOr<int> IndexOf(absl::string_view name) const;
  absl::StatusOr<std::vector<int>> IndicesOf(
      const std::vector<std::string>& names) const;

  const std::vector<int>& parents(int v) const { return parents_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }
  bool HasEdge(int from, int to) const;
  // True if `descendant` is reachable from `v` by a directed path of length
  // >= 0 (every vertex is its own descendant).
  bool IsDescendant(int v, int descendant) const {
    return closure_[v][descendant];
  }
  const std::vector<int>& topological_order() const { return topo_order_; }

 private:
  MDag() = default;

  std::vector<VariableNode> vertices_;
  std::vector<EdgeSpec> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<bool>> closure_;
  std::vector<int> topo_order_;
};

// Convenience wrapper matching the textual graph description.
absl::StatusOr<MDag> BuildMDag(std::vector<VariableNode> vertices,
                               std::vector<EdgeSpec> edges);

// Every simple path between `a` and `b` in the skeleton of `g`. Fails with
// kOutOfRange above MDag::kMaxEnumerationVertices vertices.
absl::StatusOr<std::vector<Path>> EnumeratePaths(const MDag& g,
                                                 absl::string_view a,
                                                 absl::string_view b);

// A path is open given `conditioning` when every collider on it is in the set
// or has a descendant there, and no non-collider is in the set.
bool IsPathOpen(const MDag& g, const Path& path,
                const std::vector<int>& conditioning);

// Renders a path as e.g. "R <- D -> X -> G".
std::string FormatPath(const MDag& g, const Path& path);

// d-separation of `a` and `b` given `c` via reachability ("Bayes ball"),
// linear in the size of the graph. The sets must be pairwise disjoint.
absl::StatusOr<bool> DSeparated(const MDag& g,
                                const std::vector<std::string>& a,
                                const std::vector<std::string>& b,
                                const std::vector<std::string>& c);

// Index-based variant used on hot paths; no validation.
bool DSeparatedIndices(const MDag& g, const std::vector<int>& a,
                       const std::vector<int>& b, const std::vector<int>& c);

// First open path between the sets (by enumeration order), if any.
absl::StatusOr<std::optional<Path>> FindOpenPath(
    const MDag& g, const std::vector<std::string>& a,
    const std::vector<std::string>& b, const std::vector<std::string>& c);

// MCAR iff indicator and target are d-separated marginally; MAR iff they are
// d-separated given `observed`; MNAR otherwise. `target` must be a kMissing
// vertex, `indicator` and every member of `observed` fully observed.
absl::StatusOr<MissingnessClass> ClassifyMissingness(
    const MDag& g, absl::string_view indicator, absl::string_view target,
    const std::vector<std::string>& observed);

struct ShadowConditions {
  // z is NOT d-separated from s given {r} + d_rest.
  bool relevance = false;
  // z IS d-separated from r given {s} + d_rest.
  bool exclusion = false;
};

absl::StatusOr<ShadowConditions> CheckShadowConditions(
    const MDag& g, absl::string_view z, absl::string_view r,
    absl::string_view s, const std::vector<std::string>& d_rest);

}  // namespace floss

#endif  // FLOSS_MDAG_H_
