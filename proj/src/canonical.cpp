// Canonical form of small rooted marked graphs by color refinement and
// individualization. Leaves of the search tree are discrete ordered
// partitions; the canonical form is the lexicographically smallest leaf
// encoding. Sibling branches are pruned with automorphisms discovered from
// equal leaves.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "ips/graph.hpp"

namespace ips {

namespace {

using Token = std::vector<std::int64_t>;

std::int64_t discretize(double x, double grid) {
  if (std::isnan(x)) return std::numeric_limits<std::int64_t>::min();
  const double q = std::nearbyint(x / grid);
  if (q >= 9.0e18) return std::numeric_limits<std::int64_t>::max();
  if (q <= -9.0e18) return std::numeric_limits<std::int64_t>::min() + 1;
  return static_cast<std::int64_t>(q);
}

Token mark_token(const Mark& mark, double grid) {
  Token t;
  t.reserve(mark.size() + 1);
  t.push_back(static_cast<std::int64_t>(mark.size()));
  for (double x : mark) t.push_back(discretize(x, grid));
  return t;
}

/// Replaces each token by its rank among the distinct tokens (sorted by value).
std::vector<std::int64_t> rank_tokens(const std::vector<Token>& tokens, std::vector<Token>& distinct) {
  distinct = tokens;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::int64_t> ranks(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    ranks[i] = std::lower_bound(distinct.begin(), distinct.end(), tokens[i]) - distinct.begin();
  return ranks;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

class CanonicalSearch {
 public:
  CanonicalSearch(const MarkedGraph& g, std::vector<std::int64_t> vertex_rank,
                  std::vector<std::vector<std::int64_t>> edge_rank, std::vector<std::int64_t> initial)
      : g_(g), n_(g.size()), vrank_(std::move(vertex_rank)), erank_(std::move(edge_rank)),
        initial_(std::move(initial)) {}

  std::vector<VertexId> run() {
    std::vector<VertexId> prefix;
    search(initial_, prefix);
    return best_perm_;
  }

 private:
  using Colors = std::vector<std::int64_t>;

  /// Refines an ordered partition (color = start index of the vertex's cell)
  /// until equitable.
  void refine(Colors& colors) const {
    std::vector<std::pair<std::vector<std::int64_t>, VertexId>> sig(n_);
    std::size_t cells = count_cells(colors);
    while (true) {
      for (VertexId v = 0; v < n_; ++v) {
        auto& s = sig[v].first;
        s.clear();
        s.push_back(colors[v]);
        const auto nb = g_.neighbors(v);
        std::vector<std::pair<std::int64_t, std::int64_t>> adj;
        adj.reserve(nb.size());
        for (std::size_t i = 0; i < nb.size(); ++i) adj.emplace_back(colors[nb[i]], erank_[v][i]);
        std::sort(adj.begin(), adj.end());
        for (const auto& [c, e] : adj) {
          s.push_back(c);
          s.push_back(e);
        }
        sig[v].second = v;
      }
      std::sort(sig.begin(), sig.end());
      for (std::size_t i = 0; i < n_; ++i) {
        const bool same = i > 0 && sig[i].first == sig[i - 1].first;
        colors[sig[i].second] = same ? colors[sig[i - 1].second] : static_cast<std::int64_t>(i);
      }
      const std::size_t now = count_cells(colors);
      if (now == cells) return;
      cells = now;
    }
  }

  static std::size_t count_cells(const Colors& colors) {
    Colors c = colors;
    std::sort(c.begin(), c.end());
    return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
  }

  std::vector<std::int64_t> encode(const std::vector<VertexId>& perm, const std::vector<std::int64_t>& pos) const {
    std::vector<std::int64_t> code;
    for (VertexId v : perm) {
      code.push_back(vrank_[v]);
      const auto nb = g_.neighbors(v);
      code.push_back(static_cast<std::int64_t>(nb.size()));
      std::vector<std::pair<std::int64_t, std::int64_t>> adj;
      for (std::size_t i = 0; i < nb.size(); ++i) adj.emplace_back(pos[nb[i]], erank_[v][i]);
      std::sort(adj.begin(), adj.end());
      for (const auto& [p, e] : adj) {
        code.push_back(p);
        code.push_back(e);
      }
    }
    return code;
  }

  void leaf(const Colors& colors) {
    std::vector<VertexId> perm(n_);
    for (VertexId v = 0; v < n_; ++v) perm[static_cast<std::size_t>(colors[v])] = v;
    auto code = encode(perm, colors);
    if (first_perm_.empty()) {
      first_perm_ = perm;
      first_code_ = code;
      best_perm_ = perm;
      best_code_ = std::move(code);
      return;
    }
    if (code == first_code_) {
      record_automorphism(first_perm_, perm);
    } else if (code == best_code_) {
      record_automorphism(best_perm_, perm);
    } else if (code < best_code_) {
      best_code_ = std::move(code);
      best_perm_ = perm;
    }
  }

  void record_automorphism(const std::vector<VertexId>& from, const std::vector<VertexId>& to) {
    std::vector<VertexId> gamma(n_);
    for (std::size_t p = 0; p < n_; ++p) gamma[from[p]] = to[p];
    generators_.push_back(std::move(gamma));
  }

  void search(Colors colors, std::vector<VertexId>& prefix) {
    refine(colors);
    // Target cell: the non-singleton cell with the smallest start index.
    std::vector<std::size_t> size(n_, 0);
    for (auto c : colors) ++size[static_cast<std::size_t>(c)];
    std::int64_t target = -1;
    for (std::size_t c = 0; c < n_; ++c) {
      if (size[c] > 1) {
        target = static_cast<std::int64_t>(c);
        break;
      }
    }
    if (target < 0) {
      leaf(colors);
      return;
    }
    std::vector<VertexId> cell;
    for (VertexId v = 0; v < n_; ++v)
      if (colors[v] == target) cell.push_back(v);

    std::vector<VertexId> explored;
    for (VertexId v : cell) {
      if (!explored.empty() && in_explored_orbit(v, explored, prefix)) continue;
      Colors next = colors;
      for (VertexId u : cell)
        if (u != v) next[u] = target + 1;
      prefix.push_back(v);
      search(std::move(next), prefix);
      prefix.pop_back();
      explored.push_back(v);
    }
  }

  /// True if some stored automorphism fixing the prefix pointwise maps an
  /// explored sibling onto v (orbits of the generated subgroup).
  bool in_explored_orbit(VertexId v, const std::vector<VertexId>& explored,
                         const std::vector<VertexId>& prefix) const {
    UnionFind uf(n_);
    bool any = false;
    for (const auto& gamma : generators_) {
      bool fixes = true;
      for (VertexId p : prefix) {
        if (gamma[p] != p) {
          fixes = false;
          break;
        }
      }
      if (!fixes) continue;
      any = true;
      for (VertexId x = 0; x < n_; ++x) uf.unite(x, gamma[x]);
    }
    if (!any) return false;
    const auto rv = uf.find(v);
    return std::any_of(explored.begin(), explored.end(), [&](VertexId e) { return uf.find(e) == rv; });
  }

  const MarkedGraph& g_;
  std::size_t n_;
  std::vector<std::int64_t> vrank_;
  std::vector<std::vector<std::int64_t>> erank_;
  Colors initial_;
  std::vector<VertexId> first_perm_, best_perm_;
  std::vector<std::int64_t> first_code_, best_code_;
  std::vector<std::vector<VertexId>> generators_;
};

void put_i64(std::string& out, std::int64_t x) {
  auto u = static_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

void put_token(std::string& out, const Token& t) {
  put_i64(out, static_cast<std::int64_t>(t.size()));
  for (auto x : t) put_i64(out, x);
}

}  // namespace

std::string BallSignature::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

BallSignature canonical_signature(const MarkedGraph& ball, const MarkDiscretizer& disc,
                                  std::span<const std::vector<std::int64_t>> extra_tokens) {
  const VertexId root = ball.require_root();
  const std::size_t n = ball.size();
  if (n > disc.vertex_cap)
    throw Error(ErrorCode::TooLarge, std::to_string(n) + " vertices exceed cap " + std::to_string(disc.vertex_cap));
  if (!extra_tokens.empty() && extra_tokens.size() != n)
    throw Error(ErrorCode::InvalidArgument, "extra_tokens must have one entry per vertex");

  std::vector<Token> vtokens(n);
  for (VertexId v = 0; v < n; ++v) {
    Token t{v == root ? 1 : 0, ball.state(v)};
    const auto m = mark_token(ball.vertex_mark(v), disc.grid);
    t.insert(t.end(), m.begin(), m.end());
    if (!extra_tokens.empty()) {
      t.push_back(static_cast<std::int64_t>(extra_tokens[v].size()));
      t.insert(t.end(), extra_tokens[v].begin(), extra_tokens[v].end());
    }
    vtokens[v] = std::move(t);
  }
  std::vector<Token> etokens;
  for (VertexId v = 0; v < n; ++v)
    for (std::size_t i = 0; i < ball.degree(v); ++i) etokens.push_back(mark_token(ball.edge_mark_at(v, i), disc.grid));

  std::vector<Token> vdistinct, edistinct;
  const auto vrank = rank_tokens(vtokens, vdistinct);
  const auto eflat = rank_tokens(etokens, edistinct);
  std::vector<std::vector<std::int64_t>> erank(n);
  std::size_t k = 0;
  for (VertexId v = 0; v < n; ++v)
    for (std::size_t i = 0; i < ball.degree(v); ++i) erank[v].push_back(eflat[k++]);

  // Distances from the root seed the initial partition.
  std::vector<std::int64_t> dist(n, static_cast<std::int64_t>(n));
  std::deque<VertexId> queue{root};
  dist[root] = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (VertexId u : ball.neighbors(v)) {
      if (dist[u] == static_cast<std::int64_t>(n)) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  std::vector<std::tuple<std::int64_t, std::int64_t, std::size_t, VertexId>> seed(n);
  for (VertexId v = 0; v < n; ++v) seed[v] = {dist[v], vrank[v], ball.degree(v), v};
  std::sort(seed.begin(), seed.end());
  std::vector<std::int64_t> colors(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool same = i > 0 && std::get<0>(seed[i]) == std::get<0>(seed[i - 1]) &&
                      std::get<1>(seed[i]) == std::get<1>(seed[i - 1]) &&
                      std::get<2>(seed[i]) == std::get<2>(seed[i - 1]);
    colors[std::get<3>(seed[i])] = same ? colors[std::get<3>(seed[i - 1])] : static_cast<std::int64_t>(i);
  }

  CanonicalSearch search(ball, vrank, erank, colors);
  const auto perm = search.run();
  std::vector<std::int64_t> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[perm[p]] = static_cast<std::int64_t>(p);

  BallSignature sig;
  put_i64(sig.bytes, static_cast<std::int64_t>(n));
  for (VertexId v : perm) {
    put_token(sig.bytes, vtokens[v]);
    const auto nb = ball.neighbors(v);
    std::vector<std::pair<std::int64_t, std::int64_t>> adj;
    for (std::size_t i = 0; i < nb.size(); ++i) adj.emplace_back(pos[nb[i]], erank[v][i]);
    std::sort(adj.begin(), adj.end());
    put_i64(sig.bytes, static_cast<std::int64_t>(adj.size()));
    for (const auto& [p, e] : adj) {
      put_i64(sig.bytes, p);
      put_token(sig.bytes, edistinct[static_cast<std::size_t>(e)]);
    }
  }
  return sig;
}

}  // namespace ips
