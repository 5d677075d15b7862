#include "qexp/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qexp/hash.hpp"

namespace qexp {

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::mt19937_64& rng)
{
    const std::size_t n = points.rows();
    Matrix centroids(k, points.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    auto place = [&](std::size_t c, std::size_t p) {
        auto src = points.row(p);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_l2(points.row(i), src));
        }
    };

    place(0, uniform_index(rng, n));
    for (std::size_t c = 1; c < k; ++c) {
        double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = unit_uniform(rng) * total;
            double run = 0.0;
            pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) {
                    continue;
                }
                run += d2[i];
                pick = i;
                if (run > target) {
                    break;
                }
            }
        } else {
            pick = uniform_index(rng, n);
        }
        place(c, pick);
    }
    return centroids;
}

struct Assignment {
    std::vector<std::size_t> labels;
    std::vector<double> dist;
};

Assignment assign(const Matrix& points, const Matrix& centroids)
{
    Assignment a;
    a.labels.resize(points.rows());
    a.dist.resize(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            double d = squared_l2(points.row(i), centroids.row(c));
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        a.labels[i] = best_c;
        a.dist[i] = best;
    }
    return a;
}

void fix_empty_clusters(const Matrix& points, Matrix& centroids, Assignment& a)
{
    const std::size_t k = centroids.rows();
    std::vector<std::size_t> sizes(k, 0);
    for (auto l : a.labels) {
        ++sizes[l];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) {
            continue;
        }
        std::size_t far = points.rows();
        for (std::size_t i = 0; i < points.rows(); ++i) {
            if (sizes[a.labels[i]] < 2) {
                continue;
            }
            if (far == points.rows() || a.dist[i] > a.dist[far]) {
                far = i;
            }
        }
        if (far == points.rows()) {
            break;
        }
        --sizes[a.labels[far]];
        ++sizes[c];
        a.labels[far] = c;
        a.dist[far] = 0.0;
        auto src = points.row(far);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ClusterModel kmeans_once(const Matrix& points, const KMeansOptions& options, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    ClusterModel model;
    model.k = options.k;
    model.seed = seed;
    model.centroids = kmeanspp_init(points, options.k, rng);

    for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
        auto a = assign(points, model.centroids);
        fix_empty_clusters(points, model.centroids, a);
        model.inertia_history.push_back(total(a.dist));
        model.iterations = iter + 1;

        Matrix next(options.k, points.cols());
        std::vector<std::size_t> counts(options.k, 0);
        for (std::size_t i = 0; i < points.rows(); ++i) {
            auto dst = next.row(a.labels[i]);
            auto src = points.row(i);
            for (std::size_t j = 0; j < src.size(); ++j) {
                dst[j] += src[j];
            }
            ++counts[a.labels[i]];
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < options.k; ++c) {
            auto row = next.row(c);
            if (counts[c] == 0) {
                auto old = model.centroids.row(c);
                std::copy(old.begin(), old.end(), row.begin());
                continue;
            }
            for (double& x : row) {
                x /= static_cast<double>(counts[c]);
            }
            movement = std::max(movement, std::sqrt(squared_l2(row, model.centroids.row(c))));
        }
        model.centroids = std::move(next);
        if (movement < options.tol) {
            break;
        }
    }

    auto a = assign(points, model.centroids);
    fix_empty_clusters(points, model.centroids, a);
    model.assignments = std::move(a.labels);
    model.inertia = total(a.dist);
    model.inertia_history.push_back(model.inertia);
    return model;
}

Selection medoids(std::span<const ExemplarPair> pool, const Matrix& points, const ClusterModel& model,
                  std::span<const std::size_t> pool_index)
{
    Selection sel;
    sel.assignments = model.assignments;
    for (std::size_t c = 0; c < model.k; ++c) {
        std::size_t best = points.rows();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.rows(); ++i) {
            if (model.assignments[i] != c) {
                continue;
            }
            double d = squared_l2(points.row(i), model.centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best == points.rows()) {
            continue;
        }
        sel.indices.push_back(pool_index[best]);
        sel.exemplars.push_back(pool[pool_index[best]]);
    }
    return sel;
}

Matrix unit_rows(std::span<const Embedding> embeddings, std::span<const std::size_t> which)
{
    std::vector<Embedding> rows;
    rows.reserve(which.size());
    for (auto i : which) {
        rows.push_back(embeddings[i].normalized());
    }
    return Matrix::from_rows(rows);
}

Selection whole_pool(std::span<const ExemplarPair> pool, std::span<const std::size_t> which)
{
    Selection sel;
    for (auto i : which) {
        sel.indices.push_back(i);
        sel.exemplars.push_back(pool[i]);
    }
    return sel;
}

Selection select_subset(std::span<const ExemplarPair> pool, std::span<const Embedding> embeddings,
                        std::vector<std::size_t> which, const KMeansOptions& options)
{
    if (pool.empty()) {
        throw ValidationError("cannot select exemplars from an empty pool");
    }
    if (pool.size() != embeddings.size()) {
        throw ValidationError("pool and embeddings are not aligned");
    }
    if (options.k == 0) {
        throw ValidationError("k must be >= 1");
    }
    if (which.size() <= options.k) {
        std::sort(which.begin(), which.end());
        return whole_pool(pool, which);
    }
    auto points = unit_rows(embeddings, which);
    auto model = kmeans(points, options);
    return medoids(pool, points, model, which);
}

}  // namespace

ClusterModel kmeans(const Matrix& points, const KMeansOptions& options)
{
    if (options.k == 0) {
        throw ValidationError("k-means needs k >= 1");
    }
    if (points.rows() < options.k) {
        throw ValidationError("k-means got " + std::to_string(points.rows()) + " points for k="
                              + std::to_string(options.k) + "; shrink k to at most the number of points");
    }
    ClusterModel best;
    std::size_t runs = std::max<std::size_t>(1, options.restarts);
    for (std::size_t r = 0; r < runs; ++r) {
        std::uint64_t seed = r == 0 ? options.seed : splitmix64(options.seed + r);
        auto model = kmeans_once(points, options, seed);
        if (r == 0 || model.inertia < best.inertia) {
            best = std::move(model);
        }
    }
    return best;
}

Selection select_exemplars(std::span<const ExemplarPair> pool, std::span<const Embedding> embeddings,
                           const KMeansOptions& options)
{
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), 0);
    return select_subset(pool, embeddings, std::move(all), options);
}

Selection select_exemplars_for_query(std::span<const ExemplarPair> pool, std::span<const Embedding> embeddings,
                                     const Embedding& query, std::size_t neighborhood,
                                     const KMeansOptions& options)
{
    if (pool.size() != embeddings.size()) {
        throw ValidationError("pool and embeddings are not aligned");
    }
    auto q = query.normalized();
    std::vector<std::pair<double, std::size_t>> sims;
    sims.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (embeddings[i].dim() != q.dim()) {
            throw ValidationError("query embedding dimension does not match the pool");
        }
        sims.emplace_back(-dot(q.values(), embeddings[i].normalized().values()), i);
    }
    std::size_t keep = std::min(std::max(neighborhood, options.k), sims.size());
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(keep), sims.end());
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < keep; ++i) {
        which.push_back(sims[i].second);
    }
    // Cluster in pool order so ties resolve by pool index.
    std::sort(which.begin(), which.end());
    return select_subset(pool, embeddings, std::move(which), options);
}

Selection select_random(std::span<const ExemplarPair> pool, std::size_t k, std::uint64_t seed)
{
    if (pool.empty()) {
        throw ValidationError("cannot select exemplars from an empty pool");
    }
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::size_t keep = std::min(k, pool.size());
    for (std::size_t i = 0; i < keep; ++i) {
        std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    return whole_pool(pool, idx);
}

}  // namespace qexp
