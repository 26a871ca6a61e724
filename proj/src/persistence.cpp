#include "topogap/persistence.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>

#include "topogap/error.hpp"

namespace topogap {

namespace {

using index_t = std::int64_t;

struct Edge {
  double diameter;
  index_t index;  // colex rank: C(a, 2) + b for a > b
  std::uint32_t a;
  std::uint32_t b;
};

struct Triangle {
  double diameter;
  index_t index;  // colex rank: C(x, 3) + C(y, 2) + z for x > y > z

  bool operator==(const Triangle& o) const { return index == o.index; }
};

// Filtration order inside one dimension: diameter, then colex rank.
template <typename S>
bool earlier(const S& lhs, const S& rhs) {
  return lhs.diameter < rhs.diameter || (lhs.diameter == rhs.diameter && lhs.index < rhs.index);
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (rank_[x] < rank_[y]) std::swap(x, y);
    parent_[y] = x;
    if (rank_[x] == rank_[y]) ++rank_[x];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

std::vector<Edge> sorted_edges(const FunctionalGraph& g) {
  const std::size_t n = g.size();
  std::vector<Edge> edges;
  edges.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::uint32_t a = 1; a < n; ++a)
    for (std::uint32_t b = 0; b < a; ++b)
      edges.push_back({g.dissimilarity(a, b), static_cast<index_t>(a) * (a - 1) / 2 + b, a, b});
  std::ranges::sort(edges, earlier<Edge>);
  return edges;
}

void sort_points(PersistenceDiagram& d) { std::ranges::sort(d.points); }

// Min-heap of coboundary entries with F2 cancellation of equal entries.
class WorkingColumn {
 public:
  void push(const Triangle& t) {
    heap_.push_back(t);
    std::ranges::push_heap(heap_, later);
  }

  // Earliest entry of odd multiplicity; left in the column.
  std::optional<Triangle> pivot() {
    while (!heap_.empty()) {
      Triangle top = pop();
      if (!heap_.empty() && heap_.front() == top) {
        pop();
        continue;
      }
      push(top);
      return top;
    }
    return std::nullopt;
  }

  void clear() { heap_.clear(); }

 private:
  static bool later(const Triangle& lhs, const Triangle& rhs) { return earlier(rhs, lhs); }

  Triangle pop() {
    std::ranges::pop_heap(heap_, later);
    Triangle t = heap_.back();
    heap_.pop_back();
    return t;
  }

  std::vector<Triangle> heap_;
};

class CoboundaryEnumerator {
 public:
  explicit CoboundaryEnumerator(const FunctionalGraph& g) : g_(g), n_(static_cast<std::uint32_t>(g.size())) {}

  template <typename Sink>
  void operator()(const Edge& e, Sink&& sink) const {
    for (std::uint32_t v = 0; v < n_; ++v) {
      if (v == e.a || v == e.b) continue;
      const double diam = std::max({e.diameter, g_.dissimilarity(v, e.a), g_.dissimilarity(v, e.b)});
      std::uint32_t x = v, y = e.a, z = e.b;  // e.a > e.b
      if (v < e.b) {
        x = e.a;
        y = e.b;
        z = v;
      } else if (v < e.a) {
        x = e.a;
        y = v;
        z = e.b;
      }
      sink(Triangle{diam, choose3(x) + choose2(y) + z});
    }
  }

 private:
  static index_t choose2(index_t k) { return k * (k - 1) / 2; }
  static index_t choose3(index_t k) { return k * (k - 1) * (k - 2) / 6; }

  const FunctionalGraph& g_;
  std::uint32_t n_;
};

}  // namespace

PersistenceDiagram persistence_dim0(const FunctionalGraph& g) {
  PersistenceDiagram diagram{0, {}, g.size()};
  UnionFind components(g.size());
  for (const Edge& e : sorted_edges(g))
    if (components.unite(e.a, e.b) && e.diameter > 0.0) diagram.points.push_back({0.0, e.diameter});
  sort_points(diagram);
  return diagram;
}

PersistenceDiagram persistence_dim1(const FunctionalGraph& g, std::size_t vertex_cap) {
  const std::size_t n = g.size();
  if (n > vertex_cap)
    throw Error(ErrorKind::TooManyVertices,
                std::to_string(n) + " vertices exceed the dimension-1 cap of " + std::to_string(vertex_cap));
  PersistenceDiagram diagram{1, {}, n};
  if (n < 4) return diagram;

  // Clearing: edges that merge components are H0 deaths and never carry an H1 cocycle.
  const std::vector<Edge> edges = sorted_edges(g);
  std::vector<std::uint32_t> columns;
  {
    UnionFind components(n);
    for (std::uint32_t k = 0; k < edges.size(); ++k)
      if (!components.unite(edges[k].a, edges[k].b)) columns.push_back(k);
  }
  std::ranges::reverse(columns);

  const CoboundaryEnumerator coboundary(g);
  std::unordered_map<index_t, std::uint32_t> pivot_owner;  // triangle -> slot in `reductions`
  pivot_owner.reserve(columns.size());
  std::vector<std::vector<std::uint32_t>> reductions;
  reductions.reserve(columns.size());

  WorkingColumn work;
  std::vector<std::uint32_t> summands;
  for (const std::uint32_t col : columns) {
    const Edge& e = edges[col];
    work.clear();
    summands.assign(1, col);
    coboundary(e, [&](const Triangle& t) { work.push(t); });

    std::optional<Triangle> pivot = work.pivot();
    while (pivot) {
      const auto owner = pivot_owner.find(pivot->index);
      if (owner == pivot_owner.end()) break;
      for (const std::uint32_t other : reductions[owner->second]) {
        summands.push_back(other);
        coboundary(edges[other], [&](const Triangle& t) { work.push(t); });
      }
      pivot = work.pivot();
    }
    if (!pivot) continue;

    if (pivot->diameter > e.diameter) diagram.points.push_back({e.diameter, pivot->diameter});

    // Keep the reduced column as an F2 sum of edges.
    std::ranges::sort(summands);
    std::vector<std::uint32_t> odd;
    for (std::size_t i = 0; i < summands.size();) {
      std::size_t j = i;
      while (j < summands.size() && summands[j] == summands[i]) ++j;
      if ((j - i) % 2 == 1) odd.push_back(summands[i]);
      i = j;
    }
    pivot_owner.emplace(pivot->index, static_cast<std::uint32_t>(reductions.size()));
    reductions.push_back(std::move(odd));
  }
  sort_points(diagram);
  return diagram;
}

PersistenceDiagram brute_force_persistence(const FunctionalGraph& g, int dimension) {
  const std::size_t n = g.size();
  if (n > kBruteForceVertexCap)
    throw Error(ErrorKind::TooManyVertices, std::to_string(n) + " vertices exceed the brute-force cap of 10");
  if (dimension != 0 && dimension != 1)
    throw Error(ErrorKind::InvalidArgument, "brute force supports dimensions 0 and 1");

  struct Simplex {
    std::vector<std::size_t> vertices;
    double diameter;
  };
  std::vector<Simplex> simplices;
  const std::size_t top = static_cast<std::size_t>(dimension) + 1;
  for (std::size_t k = 1; k <= std::min(top + 1, n); ++k) {
    // Lexicographic k-subsets of {0..n-1}.
    std::vector<std::size_t> combo(k);
    std::iota(combo.begin(), combo.end(), 0);
    while (true) {
      double diam = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) diam = std::max(diam, g.dissimilarity(combo[i], combo[j]));
      simplices.push_back({combo, diam});
      std::size_t i = k;
      while (i > 0 && combo[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  std::ranges::stable_sort(simplices, [](const Simplex& x, const Simplex& y) {
    if (x.diameter != y.diameter) return x.diameter < y.diameter;
    return x.vertices.size() < y.vertices.size();
  });

  const std::size_t m = simplices.size();
  auto find_simplex = [&](const std::vector<std::size_t>& verts) {
    for (std::size_t i = 0; i < m; ++i)
      if (simplices[i].vertices == verts) return i;
    return m;
  };

  // Dense F2 boundary matrix, one column of bits per simplex.
  std::vector<std::vector<bool>> columns(m, std::vector<bool>(m, false));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& verts = simplices[j].vertices;
    if (verts.size() < 2) continue;
    for (std::size_t drop = 0; drop < verts.size(); ++drop) {
      std::vector<std::size_t> face;
      for (std::size_t i = 0; i < verts.size(); ++i)
        if (i != drop) face.push_back(verts[i]);
      columns[j][find_simplex(face)] = true;
    }
  }

  auto low = [&](std::size_t j) -> std::ptrdiff_t {
    for (std::size_t i = m; i-- > 0;)
      if (columns[j][i]) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };

  PersistenceDiagram diagram{dimension, {}, n};
  std::vector<std::ptrdiff_t> low_owner(m, -1);
  for (std::size_t j = 0; j < m; ++j) {
    std::ptrdiff_t l = low(j);
    while (l >= 0 && low_owner[l] >= 0) {
      const auto& other = columns[low_owner[l]];
      for (std::size_t i = 0; i < m; ++i) columns[j][i] = columns[j][i] != other[i];
      l = low(j);
    }
    if (l < 0) continue;
    low_owner[l] = static_cast<std::ptrdiff_t>(j);
    const Simplex& born = simplices[l];
    if (born.vertices.size() == static_cast<std::size_t>(dimension) + 1 &&
        simplices[j].diameter > born.diameter)
      diagram.points.push_back({born.diameter, simplices[j].diameter});
  }
  sort_points(diagram);
  return diagram;
}

void write_diagram_csv(const std::filesystem::path& path, const PersistenceDiagram& d) {
  std::ostringstream text;
  text << "dimension,birth,death\n";
  char buf[64];
  for (const auto& p : d.points) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", d.dimension, p.birth, p.death);
    text << buf;
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text.str();
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

PersistenceDiagram read_diagram_csv(const std::filesystem::path& path, int dimension) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  PersistenceDiagram d{dimension, {}, 0};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.rfind("dimension", 0) == 0)) continue;
    int dim = 0;
    double birth = 0.0, death = 0.0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf%c", &dim, &birth, &death, &tail) != 3 || dim != dimension ||
        !(birth <= death))
      throw Error(ErrorKind::MalformedFile, path.string() + ":" + std::to_string(line_no) + ": bad row '" + line + "'");
    d.points.push_back({birth, death});
  }
  sort_points(d);
  return d;
}

}  // namespace topogap
