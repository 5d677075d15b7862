#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qexp/corpus_io.hpp"
#include "qexp/embedding.hpp"

namespace qexp {

struct KMeansOptions {
    std::size_t k = 4;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
    double tol = 1e-4;
    /// Independent k-means++ starts; the lowest final inertia wins.
    std::size_t restarts = 1;
};

struct ClusterModel {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    Matrix centroids;
    std::vector<std::size_t> assignments;
    double inertia = 0.0;
    /// Inertia after every assignment step, ending with the final one.
    std::vector<double> inertia_history;
    std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Assignment ties go to the lower
/// cluster id. A cluster left empty takes the point farthest from its own
/// centroid among clusters that can spare one. Throws ValidationError when
/// there are fewer points than clusters.
ClusterModel kmeans(const Matrix& points, const KMeansOptions& options);

struct Selection {
    /// Pool indices of the chosen exemplars, ordered by cluster id.
    std::vector<std::size_t> indices;
    std::vector<ExemplarPair> exemplars;
    /// Empty when the pool was returned whole.
    std::vector<std::size_t> assignments;
};

/// Normalizes the embeddings, clusters them into k groups and returns each
/// cluster's medoid: the member nearest its centroid in L2, ties to the lower
/// pool index. Pools smaller than k come back whole, in order.
Selection select_exemplars(std::span<const ExemplarPair> pool, std::span<const Embedding> embeddings,
                           const KMeansOptions& options);

/// Query-conditioned variant: clusters only the `neighborhood` pool members
/// closest (by cosine) to the query embedding.
Selection select_exemplars_for_query(std::span<const ExemplarPair> pool, std::span<const Embedding> embeddings,
                                     const Embedding& query, std::size_t neighborhood,
                                     const KMeansOptions& options);

/// Uniform sample of min(k, |pool|) distinct indices, returned sorted. Used
/// as a baseline in tests.
Selection select_random(std::span<const ExemplarPair> pool, std::size_t k, std::uint64_t seed);

}  // namespace qexp
