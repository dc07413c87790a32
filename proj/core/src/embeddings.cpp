#include "chemclip/embeddings.hpp"

#include <cmath>
#include <fstream>

#include "chemclip/csv.hpp"
#include "chemclip/error.hpp"
#include "chemclip/log.hpp"
#include "chemclip/training.hpp"

namespace chemclip {

EmbeddingTable embed_records(const ChemClipModel& model, std::span<const ActivityRecord> records) {
  std::vector<ActivityRecord> organic, inorganic;
  std::vector<std::size_t> organic_pos, inorganic_pos;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].domain == Domain::kOrganic) {
      organic.push_back(records[i]);
      organic_pos.push_back(i);
    } else {
      inorganic.push_back(records[i]);
      inorganic_pos.push_back(i);
    }
  }
  EmbeddingTable table;
  table.meta.resize(records.size());
  table.values = Matrix(records.size(), model.embed_dim());
  for (std::size_t i = 0; i < records.size(); ++i) {
    table.meta[i] = {records[i].record_id, records[i].compound_id, records[i].cell_line, records[i].domain,
                     records[i].active};
  }

  auto run = [&](const std::vector<ActivityRecord>& recs, const std::vector<std::size_t>& pos, Domain domain) {
    if (recs.empty()) return;
    const FeatureTable features = build_feature_table(recs, domain);
    const Matrix emb = domain == Domain::kOrganic ? embed_organic(model, features.features)
                                                  : embed_inorganic(model, features.features);
    for (std::size_t k = 0; k < recs.size(); ++k) {
      const auto src = emb.row(features.row_of.at(recs[k].compound_id));
      std::copy(src.begin(), src.end(), table.values.row(pos[k]).begin());
    }
  };
  run(organic, organic_pos, Domain::kOrganic);
  run(inorganic, inorganic_pos, Domain::kInorganic);
  return table;
}

void write_embeddings_csv(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  std::vector<std::string> header = {"record_id", "compound_id", "cell_line", "domain", "active"};
  for (std::size_t c = 0; c < table.width(); ++c) header.push_back("e" + std::to_string(c));
  csv::write_row(out, header);
  for (std::size_t r = 0; r < table.meta.size(); ++r) {
    const auto& m = table.meta[r];
    std::vector<std::string> row = {m.record_id, m.compound_id, m.cell_line, std::string(domain_name(m.domain)),
                                    m.active ? "1" : "0"};
    for (double v : table.values.row(r)) row.push_back(csv::format_double(v));
    csv::write_row(out, row);
  }
}

EmbeddingTable import_external_embeddings(const std::filesystem::path& path) {
  const csv::Table csv_table = csv::Table::read(path);
  const std::size_t c_rec = csv_table.column("record_id"), c_cmp = csv_table.column("compound_id"),
                    c_cell = csv_table.column("cell_line"), c_dom = csv_table.column("domain"),
                    c_act = csv_table.column("active");
  std::vector<std::size_t> value_cols;
  for (std::size_t w = 0;; ++w) {
    const auto col = csv_table.find_column("e" + std::to_string(w));
    if (!col) break;
    value_cols.push_back(*col);
  }
  if (value_cols.empty()) throw Error(ErrorCode::kMissingColumn, path.string() + ": no embedding columns e0..");

  EmbeddingTable table;
  table.values = Matrix(csv_table.size(), value_cols.size());
  std::size_t renormalised = 0;
  for (std::size_t r = 0; r < csv_table.size(); ++r) {
    const auto& row = csv_table.row(r);
    EmbeddingMeta m;
    m.record_id = row[c_rec];
    m.compound_id = row[c_cmp];
    m.cell_line = row[c_cell];
    try {
      m.domain = parse_domain(row[c_dom]);
    } catch (const Error&) {
      throw RowError(ErrorCode::kMalformedRow, csv_table.line(r), "bad domain '" + row[c_dom] + "'");
    }
    if (row[c_act] != "0" && row[c_act] != "1") {
      throw RowError(ErrorCode::kMalformedRow, csv_table.line(r), "active must be 0 or 1");
    }
    m.active = row[c_act] == "1";
    auto dst = table.values.row(r);
    for (std::size_t c = 0; c < value_cols.size(); ++c) {
      const auto v = csv::to_double(row[value_cols[c]]);
      if (!v || !std::isfinite(*v)) {
        throw RowError(ErrorCode::kMalformedRow, csv_table.line(r),
                       "non-numeric embedding value in column e" + std::to_string(c));
      }
      dst[c] = *v;
    }
    const double norm = std::sqrt(squared_norm(dst));
    if (std::abs(norm - 1.0) > 1e-6) {
      ++renormalised;
      if (norm > 0.0) {
        for (double& v : dst) v /= norm;
      }
    }
    table.meta.push_back(std::move(m));
  }
  if (renormalised > 0) {
    log_warning(path.string() + ": renormalised " + std::to_string(renormalised) + " rows to unit length");
  }
  return table;
}

EmbeddingTable concat(const EmbeddingTable& a, const EmbeddingTable& b) {
  if (a.meta.empty()) return b;
  if (b.meta.empty()) return a;
  if (a.width() != b.width()) throw Error(ErrorCode::kDimensionMismatch, "embedding widths differ");
  EmbeddingTable out;
  out.meta = a.meta;
  out.meta.insert(out.meta.end(), b.meta.begin(), b.meta.end());
  out.values = vstack(std::vector<Matrix>{a.values, b.values});
  return out;
}

}  // namespace chemclip
