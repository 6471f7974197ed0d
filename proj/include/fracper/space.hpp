#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "ksum.hpp"
#include "parallel.hpp"
#include "point_set.hpp"

namespace fracper {

enum class metric_mode { matrix, graph };

struct graph_edge {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double len = 0.0;
};

/// Structural constants of a finite metric measure space. All exponent pairs
/// are least-violation fits over deterministic evaluation grids; the doubling
/// constant is an exact maximum over centers and critical radii.
struct structural_constants {
    double c_mu = 1.0;        // doubling: mu(B(x,2r)) <= c_mu * mu(B(x,r))
    double q_d = 0.0;         // relative lower mass bound exponent (fitted)
    double c_lower = 1.0;     // constant paired with q_d
    double q_d_doubling = 0.0;   // log2(c_mu), the iterated-doubling exponent
    double c_lower_doubling = 1.0; // c_mu^2, the iterated-doubling constant
    double s = 0.0;           // reverse-doubling exponent
    double c_s = 1.0;         // constant paired with s
    double c0 = 0.0;          // lower Ahlfors: mu(B(x,r)) >= c0 * r^q_ahlfors
    double q_ahlfors = 0.0;
    double c_a = 0.0;         // annular decay: mu(thin shell) <= c_a * eps^beta * mu(ball)
    double beta = 0.0;
    bool has_annular_decay = false; // graph-mode spaces only
};

struct space_options {
    std::size_t dense_cache_limit = 20000; // graph mode: dense all-pairs cache up to this size
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::size_t splitmix_below(std::uint64_t& state, std::size_t bound) {
    return static_cast<std::size_t>(splitmix64(state) % bound);
}

// Sorted distances from one point plus exclusive prefix masses; answers
// mu(B(p, r)) = mass{ d < r } and mass{ d <= r } by binary search.
struct row_prefix {
    std::vector<double> dist;   // sorted ascending, includes the 0 self-entry
    std::vector<double> prefix; // prefix[k] = sum of weights of the k closest entries

    void build(const double* row, const std::vector<double>& w, std::size_t n) {
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (row[a] != row[b]) return row[a] < row[b];
            return a < b;
        });
        dist.resize(n);
        prefix.resize(n + 1);
        prefix[0] = 0.0;
        ksum acc;
        for (std::size_t k = 0; k < n; ++k) {
            dist[k] = row[order[k]];
            acc.add(w[order[k]]);
            prefix[k + 1] = acc.get();
        }
    }

    double mass_lt(double r) const {
        const auto it = std::lower_bound(dist.begin(), dist.end(), r);
        return prefix[static_cast<std::size_t>(it - dist.begin())];
    }

    double mass_le(double r) const {
        const auto it = std::upper_bound(dist.begin(), dist.end(), r);
        return prefix[static_cast<std::size_t>(it - dist.begin())];
    }
};

} // namespace detail

/// A finite metric measure space: n points with strictly positive weights and
/// a metric given either by an explicit symmetric matrix or by shortest-path
/// distances of a connected weighted graph (geodesic mode). Immutable after
/// construction; all queries are safe to call concurrently.
class mm_space {
  public:
    static mm_space from_matrix(std::vector<double> dist, std::vector<double> weights,
                                std::vector<std::vector<double>> coords = {}) {
        mm_space s;
        s.mode_ = metric_mode::matrix;
        s.n_ = weights.size();
        s.weights_ = std::move(weights);
        s.coords_ = std::move(coords);
        if (s.n_ == 0) throw std::invalid_argument("space must have at least one point");
        if (dist.size() != s.n_ * s.n_)
            throw std::invalid_argument("distance matrix size does not match point count");
        s.dense_ = std::make_shared<std::vector<double>>(std::move(dist));
        s.validate_common();
        s.validate_matrix();
        s.finish_setup();
        return s;
    }

    static mm_space from_graph(std::size_t n, std::vector<graph_edge> edges,
                               std::vector<double> weights,
                               std::vector<std::vector<double>> coords = {},
                               space_options opt = {}) {
        mm_space s;
        s.mode_ = metric_mode::graph;
        s.n_ = n;
        s.weights_ = std::move(weights);
        s.coords_ = std::move(coords);
        s.edges_ = std::move(edges);
        s.opt_ = opt;
        if (s.n_ == 0) throw std::invalid_argument("space must have at least one point");
        if (s.weights_.size() != s.n_)
            throw std::invalid_argument("weight count does not match point count");
        s.validate_common();
        s.build_adjacency();
        if (s.n_ <= s.opt_.dense_cache_limit) {
            s.dense_ = std::make_shared<std::vector<double>>();
            s.compute_apsp(*s.dense_);
        } else {
            s.lru_ = std::make_shared<lru_rows>();
        }
        s.finish_setup();
        return s;
    }

    std::size_t n() const { return n_; }
    metric_mode mode() const { return mode_; }
    bool geodesic() const { return mode_ == metric_mode::graph; }
    double weight(std::uint32_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    double total_mass() const { return total_mass_; }
    double diameter() const { return diameter_; }
    double min_positive_distance() const { return min_pos_dist_; }
    const std::vector<graph_edge>& edges() const { return edges_; }
    bool has_coords() const { return !coords_.empty(); }
    const std::vector<std::vector<double>>& coords() const { return coords_; }

    double distance(std::uint32_t i, std::uint32_t j) const {
        if (i >= n_ || j >= n_) throw std::out_of_range("point index out of range");
        if (dense_) return (*dense_)[static_cast<std::size_t>(i) * n_ + j];
        return lru_row(i)->at(j);
    }

    bool has_dense_distances() const { return static_cast<bool>(dense_); }

    std::span<const double> dense_row(std::uint32_t i) const {
        return {dense_->data() + static_cast<std::size_t>(i) * n_, n_};
    }

    void copy_distance_row(std::uint32_t i, double* out) const {
        if (i >= n_) throw std::out_of_range("point index out of range");
        if (dense_) {
            const double* r = dense_->data() + static_cast<std::size_t>(i) * n_;
            std::copy(r, r + n_, out);
        } else {
            auto row = lru_row(i);
            std::copy(row->begin(), row->end(), out);
        }
    }

    /// Open ball { y : d(center, y) < r }. Always contains the center.
    point_set ball(std::uint32_t center, double r) const {
        require_positive_radius(r);
        if (center >= n_) throw std::out_of_range("point index out of range");
        std::vector<std::uint32_t> members;
        if (dense_) {
            const double* row = dense_->data() + static_cast<std::size_t>(center) * n_;
            for (std::uint32_t j = 0; j < n_; ++j)
                if (row[j] < r) members.push_back(j);
        } else {
            auto row = lru_row(center);
            for (std::uint32_t j = 0; j < n_; ++j)
                if ((*row)[j] < r) members.push_back(j);
        }
        return make_set(members);
    }

    double ball_measure(std::uint32_t center, double r) const {
        require_positive_radius(r);
        if (center >= n_) throw std::out_of_range("point index out of range");
        ksum acc;
        if (dense_) {
            const double* row = dense_->data() + static_cast<std::size_t>(center) * n_;
            for (std::uint32_t j = 0; j < n_; ++j)
                if (row[j] < r) acc.add(weights_[j]);
        } else {
            auto row = lru_row(center);
            for (std::uint32_t j = 0; j < n_; ++j)
                if ((*row)[j] < r) acc.add(weights_[j]);
        }
        return acc.get();
    }

    point_set make_set(std::vector<std::uint32_t> members) const {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        std::vector<std::uint64_t> bits((n_ + 63) / 64, 0);
        ksum mass;
        for (std::uint32_t i : members) {
            if (i >= n_) throw std::out_of_range("set member out of range");
            bits[i >> 6] |= 1ull << (i & 63);
            mass.add(weights_[i]);
        }
        return point_set(n_, std::move(bits), std::move(members), mass.get());
    }

    template <class Pred>
    point_set make_set_if(Pred&& pred) const {
        std::vector<std::uint32_t> members;
        for (std::uint32_t i = 0; i < n_; ++i)
            if (pred(i)) members.push_back(i);
        return make_set(std::move(members));
    }

    point_set full_set() const {
        return make_set_if([](std::uint32_t) { return true; });
    }

    point_set complement(const point_set& a) const {
        return make_set_if([&](std::uint32_t i) { return !a.contains(i); });
    }

    point_set set_intersect(const point_set& a, const point_set& b) const {
        return make_set_if([&](std::uint32_t i) { return a.contains(i) && b.contains(i); });
    }

    point_set set_union(const point_set& a, const point_set& b) const {
        return make_set_if([&](std::uint32_t i) { return a.contains(i) || b.contains(i); });
    }

    point_set set_minus(const point_set& a, const point_set& b) const {
        return make_set_if([&](std::uint32_t i) { return a.contains(i) && !b.contains(i); });
    }

    double recompute_mass(const point_set& a) const {
        ksum acc;
        for (std::uint32_t i : a.members()) acc.add(weights_[i]);
        return acc.get();
    }

    /// Strictly increasing sequence of all distinct positive pairwise
    /// distances. Ball contents are constant between consecutive entries, so
    /// suprema and infima over radii are evaluated on this grid.
    const std::vector<double>& critical_radii() const {
        std::call_once(lazy_->crit_once, [&] {
            std::vector<double> vals;
            vals.reserve(std::min<std::size_t>(n_ * 8, 1u << 20));
            std::vector<double> row(n_);
            for (std::uint32_t i = 0; i < n_; ++i) {
                copy_distance_row(i, row.data());
                for (std::uint32_t j = i + 1; j < n_; ++j) vals.push_back(row[j]);
            }
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            lazy_->crit = std::move(vals);
        });
        return lazy_->crit;
    }

    /// mu(B(x, d(x,y))) for every ordered pair, flattened row-major. Built on
    /// first use; requires the dense distance cache.
    const std::vector<double>& ball_measure_table() const {
        if (!dense_)
            throw std::invalid_argument("ball measure table requires the dense distance cache");
        std::call_once(lazy_->mball_once, [&] {
            lazy_->mball.assign(n_ * n_, 0.0);
            parallel_for(n_, [&](std::size_t i) { fill_mball_row(static_cast<std::uint32_t>(i)); });
        });
        return lazy_->mball;
    }

    /// Index of each pairwise distance in critical_radii(). Used to fold
    /// repeated pow() evaluations into per-distance lookup tables.
    const std::vector<std::uint32_t>& distance_rank_table() const {
        if (!dense_)
            throw std::invalid_argument("distance rank table requires the dense distance cache");
        std::call_once(lazy_->rank_once, [&] {
            const auto& crit = critical_radii();
            lazy_->rank.assign(n_ * n_, 0);
            parallel_for(n_, [&](std::size_t i) {
                const double* row = dense_->data() + i * n_;
                std::uint32_t* out = lazy_->rank.data() + i * n_;
                for (std::uint32_t j = 0; j < n_; ++j) {
                    if (row[j] <= 0.0) { out[j] = 0; continue; }
                    const auto it = std::lower_bound(crit.begin(), crit.end(), row[j]);
                    out[j] = static_cast<std::uint32_t>(it - crit.begin());
                }
            });
        });
        return lazy_->rank;
    }

    structural_constants estimate_constants() const {
        std::call_once(lazy_->const_once, [&] {
            lazy_->constants = estimate_constants_impl(std::numeric_limits<double>::quiet_NaN());
        });
        return lazy_->constants;
    }

    structural_constants estimate_constants(double q_ahlfors) const {
        return estimate_constants_impl(q_ahlfors);
    }

  private:
    struct lru_rows {
        mutable std::mutex mu;
        mutable std::list<std::uint32_t> order;
        mutable std::unordered_map<std::uint32_t,
                                   std::pair<std::shared_ptr<std::vector<double>>,
                                             std::list<std::uint32_t>::iterator>>
            map;
        std::size_t capacity = 64;
    };

    std::size_t n_ = 0;
    metric_mode mode_ = metric_mode::matrix;
    std::vector<double> weights_;
    std::vector<std::vector<double>> coords_;
    std::vector<graph_edge> edges_;
    space_options opt_;
    std::shared_ptr<std::vector<double>> dense_;
    std::shared_ptr<lru_rows> lru_;
    std::vector<std::uint32_t> adj_head_;
    std::vector<std::pair<std::uint32_t, double>> adj_;
    bool uniform_edge_len_ = false;
    double uniform_len_ = 0.0;
    double total_mass_ = 0.0;
    double diameter_ = 0.0;
    double min_pos_dist_ = 0.0;

    struct lazy_state {
        std::once_flag crit_once, mball_once, rank_once, const_once;
        std::vector<double> crit;
        std::vector<double> mball;
        std::vector<std::uint32_t> rank;
        structural_constants constants;
    };
    std::shared_ptr<lazy_state> lazy_ = std::make_shared<lazy_state>();

    static void require_positive_radius(double r) {
        if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    }

    void validate_common() {
        if (weights_.size() != n_)
            throw std::invalid_argument("weight count does not match point count");
        for (std::size_t i = 0; i < n_; ++i)
            if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
                throw std::invalid_argument("weights must be strictly positive (index " +
                                            std::to_string(i) + ")");
        if (!coords_.empty() && coords_.size() != n_)
            throw std::invalid_argument("coordinate count does not match point count");
    }

    void validate_matrix() {
        const auto& d = *dense_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (d[i * n_ + i] != 0.0)
                throw std::invalid_argument("distance matrix diagonal must be zero (index " +
                                            std::to_string(i) + ")");
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double dij = d[i * n_ + j];
                const double dji = d[j * n_ + i];
                if (dij != dji)
                    throw std::invalid_argument("distance matrix is asymmetric at (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
                if (!(dij > 0.0) || !std::isfinite(dij))
                    throw std::invalid_argument(
                        "off-diagonal distances must be positive and finite at (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
        check_triangle();
    }

    void check_triangle() const {
        const auto& d = *dense_;
        const auto at = [&](std::size_t i, std::size_t j) { return d[i * n_ + j]; };
        const auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
            const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                                 (at(i, j) + at(j, k));
            if (at(i, k) > at(i, j) + at(j, k) + slack)
                throw std::invalid_argument("triangle inequality fails for points (" +
                                            std::to_string(i) + "," + std::to_string(j) + "," +
                                            std::to_string(k) + ")");
        };
        if (n_ <= 500) {
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    for (std::size_t k = 0; k < n_; ++k)
                        if (i != j && j != k && i != k) check(i, j, k);
        } else {
            std::uint64_t st = 0x7261646969ull; // fixed sampling seed
            for (int t = 0; t < 500000; ++t) {
                const std::size_t i = detail::splitmix_below(st, n_);
                const std::size_t j = detail::splitmix_below(st, n_);
                const std::size_t k = detail::splitmix_below(st, n_);
                if (i != j && j != k && i != k) check(i, j, k);
            }
        }
    }

    void build_adjacency() {
        std::vector<std::uint32_t> deg(n_, 0);
        for (const auto& e : edges_) {
            if (e.a >= n_ || e.b >= n_)
                throw std::invalid_argument("edge endpoint out of range");
            if (e.a == e.b) throw std::invalid_argument("self-loop edges are not allowed");
            if (!(e.len > 0.0) || !std::isfinite(e.len))
                throw std::invalid_argument("edge lengths must be positive and finite");
            ++deg[e.a];
            ++deg[e.b];
        }
        adj_head_.assign(n_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i) adj_head_[i + 1] = adj_head_[i] + deg[i];
        adj_.resize(adj_head_[n_]);
        std::vector<std::uint32_t> cur(adj_head_.begin(), adj_head_.end() - 1);
        for (const auto& e : edges_) {
            adj_[cur[e.a]++] = {e.b, e.len};
            adj_[cur[e.b]++] = {e.a, e.len};
        }
        uniform_edge_len_ = !edges_.empty();
        uniform_len_ = edges_.empty() ? 0.0 : edges_[0].len;
        for (const auto& e : edges_)
            if (e.len != uniform_len_) { uniform_edge_len_ = false; break; }
        // connectivity
        if (n_ > 1) {
            std::vector<char> seen(n_, 0);
            std::vector<std::uint32_t> stack{0};
            seen[0] = 1;
            std::size_t reached = 1;
            while (!stack.empty()) {
                const std::uint32_t v = stack.back();
                stack.pop_back();
                for (std::uint32_t k = adj_head_[v]; k < adj_head_[v + 1]; ++k) {
                    const std::uint32_t w = adj_[k].first;
                    if (!seen[w]) { seen[w] = 1; ++reached; stack.push_back(w); }
                }
            }
            if (reached != n_)
                throw std::invalid_argument("graph-mode space must be connected");
        }
    }

    void shortest_paths_from(std::uint32_t src, std::vector<double>& out) const {
        out.assign(n_, std::numeric_limits<double>::infinity());
        if (uniform_edge_len_) {
            // uniform edge lengths: breadth-first hop counts, one rounding per entry
            std::vector<std::int32_t> hops(n_, -1);
            std::vector<std::uint32_t> frontier{src}, next;
            hops[src] = 0;
            std::int32_t level = 0;
            while (!frontier.empty()) {
                ++level;
                next.clear();
                for (std::uint32_t v : frontier)
                    for (std::uint32_t k = adj_head_[v]; k < adj_head_[v + 1]; ++k) {
                        const std::uint32_t w = adj_[k].first;
                        if (hops[w] < 0) { hops[w] = level; next.push_back(w); }
                    }
                frontier.swap(next);
            }
            for (std::uint32_t j = 0; j < n_; ++j) out[j] = hops[j] * uniform_len_;
            return;
        }
        using item = std::pair<double, std::uint32_t>;
        std::priority_queue<item, std::vector<item>, std::greater<>> pq;
        out[src] = 0.0;
        pq.push({0.0, src});
        while (!pq.empty()) {
            const auto [d, v] = pq.top();
            pq.pop();
            if (d > out[v]) continue;
            for (std::uint32_t k = adj_head_[v]; k < adj_head_[v + 1]; ++k) {
                const auto [w, len] = adj_[k];
                const double nd = d + len;
                if (nd < out[w]) { out[w] = nd; pq.push({nd, w}); }
            }
        }
    }

    void compute_apsp(std::vector<double>& dense) const {
        dense.assign(n_ * n_, 0.0);
        parallel_for(n_, [&](std::size_t i) {
            std::vector<double> row;
            shortest_paths_from(static_cast<std::uint32_t>(i), row);
            std::copy(row.begin(), row.end(), dense.begin() + i * n_);
        });
        if (!uniform_edge_len_) {
            // heap orders may differ between directions; keep the metric exactly symmetric
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double m = std::min(dense[i * n_ + j], dense[j * n_ + i]);
                    dense[i * n_ + j] = m;
                    dense[j * n_ + i] = m;
                }
        }
    }

    // Above the dense-cache limit, rows come from single-source runs; on
    // graphs with mixed edge lengths opposite directions can differ in the
    // last ulp (the dense path symmetrizes, a per-row cache cannot).
    std::shared_ptr<const std::vector<double>> lru_row(std::uint32_t i) const {
        std::lock_guard<std::mutex> lock(lru_->mu);
        auto it = lru_->map.find(i);
        if (it != lru_->map.end()) {
            lru_->order.splice(lru_->order.begin(), lru_->order, it->second.second);
            return it->second.first;
        }
        auto row = std::make_shared<std::vector<double>>();
        shortest_paths_from(i, *row);
        lru_->order.push_front(i);
        lru_->map.emplace(i, std::make_pair(row, lru_->order.begin()));
        if (lru_->map.size() > lru_->capacity) {
            lru_->map.erase(lru_->order.back());
            lru_->order.pop_back();
        }
        return row;
    }

    void finish_setup() {
        ksum tm;
        for (double w : weights_) tm.add(w);
        total_mass_ = tm.get();
        double diam = 0.0;
        double minpos = std::numeric_limits<double>::infinity();
        if (dense_) {
            const auto& d = *dense_;
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    diam = std::max(diam, d[i * n_ + j]);
                    minpos = std::min(minpos, d[i * n_ + j]);
                }
        } else {
            // shortest paths are edge sums, so the minimum pairwise distance is
            // realised on an edge; the diameter needs a per-source pass
            for (const auto& e : edges_) minpos = std::min(minpos, e.len);
            std::vector<double> best(n_, 0.0);
            parallel_for(n_, [&](std::size_t i) {
                std::vector<double> row;
                shortest_paths_from(static_cast<std::uint32_t>(i), row);
                best[i] = *std::max_element(row.begin(), row.end());
            });
            diam = *std::max_element(best.begin(), best.end());
        }
        diameter_ = diam;
        min_pos_dist_ = (n_ > 1) ? minpos : 0.0;
        if (mode_ == metric_mode::graph && dense_) check_triangle();
    }

    void fill_mball_row(std::uint32_t i) const {
        const double* row = dense_->data() + static_cast<std::size_t>(i) * n_;
        std::vector<std::uint32_t> order(n_);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (row[a] != row[b]) return row[a] < row[b];
            return a < b;
        });
        double* out = lazy_->mball.data() + static_cast<std::size_t>(i) * n_;
        ksum acc;
        std::size_t k = 0;
        while (k < n_) {
            std::size_t g = k;
            const double dk = row[order[k]];
            while (g < n_ && row[order[g]] == dk) ++g;
            const double below = acc.get(); // mass strictly inside radius dk
            for (std::size_t t = k; t < g; ++t) out[order[t]] = below;
            for (std::size_t t = k; t < g; ++t) acc.add(weights_[order[t]]);
            k = g;
        }
    }

    structural_constants estimate_constants_impl(double q_user) const;
};

// ---------------------------------------------------------------------------
// structural constant estimation
// ---------------------------------------------------------------------------

inline structural_constants mm_space::estimate_constants_impl(double q_user) const {
    if (n_ < 2)
        throw precondition_error("structural constants need at least two points",
                                 "space has a single point");

    structural_constants out;
    const auto& crit = critical_radii();
    const double diam = diameter_;

    const bool full_centers = n_ <= 4500;
    std::vector<std::uint32_t> centers;
    if (full_centers) {
        centers.resize(n_);
        std::iota(centers.begin(), centers.end(), 0u);
    } else {
        std::uint64_t st = 0xC0FFEEull;
        for (int t = 0; t < 512; ++t)
            centers.push_back(static_cast<std::uint32_t>(detail::splitmix_below(st, n_)));
        std::sort(centers.begin(), centers.end());
        centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    }

    const auto subsample = [](const std::vector<double>& v, std::size_t cap) {
        if (v.size() <= cap) return v;
        std::vector<double> out;
        out.reserve(cap);
        for (std::size_t k = 0; k < cap; ++k)
            out.push_back(v[(k * (v.size() - 1)) / (cap - 1)]);
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };

    // per-center accumulators, merged afterwards in index order
    struct center_stats {
        double c_mu = 1.0;
        double c0_min = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, double>> annulus_pts; // (ln eps, ln ratio)
    };
    std::vector<center_stats> stats(centers.size());

    parallel_for(centers.size(), [&](std::size_t ci) {
        const std::uint32_t x = centers[ci];
        std::vector<double> row(n_);
        copy_distance_row(x, row.data());
        detail::row_prefix rp;
        rp.build(row.data(), weights_, n_);
        center_stats& cs = stats[ci];

        // doubling constant: exact max over critical radii <= diameter
        for (double r : crit) {
            if (r > diam) break;
            cs.c_mu = std::max(cs.c_mu, rp.mass_lt(2.0 * r) / rp.mass_lt(r));
        }

        // annular decay samples (geodesic mode)
        if (mode_ == metric_mode::graph) {
            for (double r : subsample(crit, 32)) {
                const double ball = rp.mass_lt(r);
                for (int e = 0; e <= 12; ++e) {
                    const double eps = std::ldexp(1.0, -e); // 2^-e
                    const double inner = rp.mass_le((1.0 - eps) * r);
                    const double ratio = (ball - inner) / ball;
                    if (ratio > 0.0)
                        cs.annulus_pts.emplace_back(std::log(eps), std::log(ratio));
                }
            }
        }
    });

    double c_mu = 1.0;
    std::vector<std::pair<double, double>> ann_pts;
    for (const auto& cs : stats) {
        c_mu = std::max(c_mu, cs.c_mu);
        ann_pts.insert(ann_pts.end(), cs.annulus_pts.begin(), cs.annulus_pts.end());
    }
    out.c_mu = c_mu;
    out.q_d_doubling = std::log2(std::max(c_mu, 1.0 + 1e-12));
    out.c_lower_doubling = c_mu * c_mu;

    // exponent fits run over a fixed pool of points so each prefix structure
    // is built once; the pool and radii are deterministic subsamples
    std::vector<std::uint32_t> pool;
    if (n_ <= 128) {
        pool.resize(n_);
        std::iota(pool.begin(), pool.end(), 0u);
    } else {
        std::uint64_t st = 0xF17ull;
        while (pool.size() < 96) pool.push_back(static_cast<std::uint32_t>(detail::splitmix_below(st, n_)));
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    }
    std::vector<detail::row_prefix> pool_rp(pool.size());
    std::vector<std::vector<double>> pool_rows(pool.size());
    parallel_for(pool.size(), [&](std::size_t k) {
        pool_rows[k].resize(n_);
        copy_distance_row(pool[k], pool_rows[k].data());
        pool_rp[k].build(pool_rows[k].data(), weights_, n_);
    });
    const std::vector<double> radii_R = subsample(crit, 48);
    const std::vector<double> radii_r = subsample(crit, 16);
    std::vector<std::pair<double, double>> lower_pts, upper_pts; // (u = ln r/R, v = ln mass ratio)
    for (std::size_t xi = 0; xi < pool.size(); ++xi) {
        const auto& xrow = pool_rows[xi];
        for (double R : radii_R) {
            const double massR = pool_rp[xi].mass_lt(R);
            std::size_t taken = 0;
            for (std::size_t yi = 0; yi < pool.size() && taken < 16; ++yi) {
                if (xrow[pool[yi]] >= R) continue; // y must lie in B(x, R)
                ++taken;
                for (double r : radii_r) {
                    if (r > R) break;
                    const double u = std::log(r / R);
                    const double v = std::log(pool_rp[yi].mass_lt(r) / massR);
                    lower_pts.emplace_back(u, v);
                    upper_pts.emplace_back(u, v);
                }
            }
        }
    }

    const double cap = 10.0 * c_mu * c_mu;
    // smallest exponent whose least constant stays below the iterated-doubling cap
    {
        double best_q = 0.0, best_c = 1.0;
        for (double q = 0.05; q <= 12.0 + 1e-9; q += 0.05) {
            double worst = 0.0;
            for (const auto& [u, v] : lower_pts) worst = std::max(worst, q * u - v);
            const double c = std::exp(worst);
            best_q = q;
            best_c = std::max(c, 1.0);
            if (c <= cap) break;
        }
        out.q_d = best_q;
        out.c_lower = best_c;
    }
    // largest reverse-doubling exponent under the same cap
    {
        double best_s = 0.05, best_c = 1.0;
        for (double s = 0.05; s <= 12.0 + 1e-9; s += 0.05) {
            double worst = 0.0;
            for (const auto& [u, v] : upper_pts) worst = std::max(worst, v - s * u);
            const double c = std::exp(worst);
            if (c <= cap) {
                best_s = s;
                best_c = std::max(c, 1.0);
            } else {
                break;
            }
        }
        out.s = best_s;
        out.c_s = best_c;
    }

    // lower Ahlfors regularity at the requested exponent (fitted q_d when unset)
    const double Q = std::isnan(q_user) ? out.q_d : q_user;
    out.q_ahlfors = Q;
    {
        double c0 = std::numeric_limits<double>::infinity();
        parallel_for(centers.size(), [&](std::size_t ci) {
            const std::uint32_t x = centers[ci];
            std::vector<double> row(n_);
            copy_distance_row(x, row.data());
            detail::row_prefix rp;
            rp.build(row.data(), weights_, n_);
            double local = std::numeric_limits<double>::infinity();
            for (double r : crit)
                if (r <= 2.0 * diam) local = std::min(local, rp.mass_lt(r) / std::pow(r, Q));
            local = std::min(local, total_mass_ / std::pow(2.0 * diam, Q));
            stats[ci].c0_min = local;
        });
        for (const auto& cs : stats) c0 = std::min(c0, cs.c0_min);
        out.c0 = c0;
    }

    // annular decay: choose beta minimising the implied boundary scale
    if (mode_ == metric_mode::graph && !ann_pts.empty()) {
        double best_beta = 0.0, best_ca = 0.0, best_score = std::numeric_limits<double>::infinity();
        for (double beta = 0.05; beta <= 1.0 + 1e-9; beta += 0.05) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& [le, lr] : ann_pts) worst = std::max(worst, lr - beta * le);
            const double ca = std::max(std::exp(worst), 1.0);
            if (ca > 10.0 * c_mu) continue;
            const double score = std::log2(32.0 * std::pow(8.0 * ca, 1.0 / beta));
            if (score < best_score) {
                best_score = score;
                best_beta = beta;
                best_ca = ca;
            }
        }
        if (best_beta == 0.0) {
            // cap never satisfied; fall back to the least-constant fit at beta = 0.05
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& [le, lr] : ann_pts) worst = std::max(worst, lr - 0.05 * le);
            best_beta = 0.05;
            best_ca = std::max(std::exp(worst), 1.0);
        }
        out.beta = best_beta;
        out.c_a = best_ca;
        out.has_annular_decay = true;
    }

    return out;
}

} // namespace fracper
