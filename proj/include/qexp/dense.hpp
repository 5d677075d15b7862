#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qexp/corpus_io.hpp"
#include "qexp/embedding.hpp"

namespace qexp {

/// Exact flat inner-product index over unit-normalized rows.
class DenseIndex {
  public:
    static constexpr int kFormatVersion = 1;

    /// Rows are normalized on the way in. Throws ValidationError on
    /// mismatched dimensions, zero vectors, or misaligned ids.
    static DenseIndex build(std::vector<std::string> doc_ids, std::span<const Embedding> rows);

    void save(const std::filesystem::path& file) const;
    static DenseIndex load(const std::filesystem::path& file);

    std::size_t size() const noexcept { return m_doc_ids.size(); }
    std::size_t dim() const noexcept { return m_matrix.cols(); }
    std::span<const double> row(std::size_t i) const noexcept { return m_matrix.row(i); }
    const std::vector<std::string>& doc_ids() const noexcept { return m_doc_ids; }

  private:
    std::vector<std::string> m_doc_ids;
    Matrix m_matrix;
};

/// Top-k rows by cosine similarity to `query` (normalized internally); ties
/// by ascending doc_id. Throws ValidationError on a dimension mismatch.
std::vector<RunRow> dense_retrieve(const DenseIndex& index, const Embedding& query, std::size_t k);

}  // namespace qexp
