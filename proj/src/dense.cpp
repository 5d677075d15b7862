#include "qexp/dense.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "qexp/index.hpp"

namespace qexp {

using nlohmann::json;

DenseIndex DenseIndex::build(std::vector<std::string> doc_ids, std::span<const Embedding> rows)
{
    if (doc_ids.size() != rows.size()) {
        throw ValidationError("dense index: " + std::to_string(doc_ids.size()) + " ids for "
                              + std::to_string(rows.size()) + " vectors");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& id : doc_ids) {
        if (!seen.insert(id).second) {
            throw ValidationError("dense index: duplicate doc_id " + id);
        }
    }
    std::vector<Embedding> unit;
    unit.reserve(rows.size());
    for (const auto& r : rows) {
        // Already-unit rows are kept bit-for-bit so save/load is exact.
        unit.push_back(std::abs(r.norm() - 1.0) <= 1e-12 ? r : r.normalized());
    }
    DenseIndex idx;
    idx.m_doc_ids = std::move(doc_ids);
    idx.m_matrix = Matrix::from_rows(unit);
    return idx;
}

void DenseIndex::save(const std::filesystem::path& file) const
{
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << json{{"format", "qexp-dense-index"}, {"version", kFormatVersion}, {"dim", dim()}, {"size", size()}}.dump()
        << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
        auto r = row(i);
        out << json{{"id", m_doc_ids[i]}, {"vector", std::vector<double>(r.begin(), r.end())}}.dump() << '\n';
    }
    if (!out) {
        throw Error("failed writing dense index " + file.string());
    }
}

DenseIndex DenseIndex::load(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    std::string line;
    if (!in || !std::getline(in, line)) {
        throw Error("cannot read dense index " + file.string());
    }
    auto header = json::parse(line);
    if (header.value("format", "") != "qexp-dense-index" || header.value("version", 0) != kFormatVersion) {
        throw Error(file.string() + " is not a supported dense index");
    }
    std::vector<std::string> ids;
    std::vector<Embedding> rows;
    while (std::getline(in, line)) {
        auto obj = json::parse(line);
        ids.push_back(obj.at("id").get<std::string>());
        rows.emplace_back(obj.at("vector").get<std::vector<double>>());
    }
    if (ids.size() != header.at("size").get<std::size_t>()) {
        throw Error("dense index " + file.string() + " is truncated");
    }
    return build(std::move(ids), rows);
}

std::vector<RunRow> dense_retrieve(const DenseIndex& index, const Embedding& query, std::size_t k)
{
    if (k == 0) {
        throw ValidationError("dense_retrieve needs k >= 1");
    }
    if (query.dim() != index.dim()) {
        throw ValidationError("query dimension " + std::to_string(query.dim()) + " != index dimension "
                              + std::to_string(index.dim()));
    }
    auto q = query.normalized();
    std::vector<ScoredDoc> scored;
    scored.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        scored.push_back({static_cast<std::uint32_t>(i), dot(q.values(), index.row(i))});
    }
    return rank_top_k(std::move(scored), k, index.doc_ids());
}

}  // namespace qexp
