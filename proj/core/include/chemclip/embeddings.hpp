#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chemclip/dataset.hpp"
#include "chemclip/matrix.hpp"
#include "chemclip/model.hpp"

namespace chemclip {

struct EmbeddingMeta {
  std::string record_id;
  std::string compound_id;
  std::string cell_line;
  Domain domain = Domain::kOrganic;
  bool active = false;
};

struct EmbeddingTable {
  std::vector<EmbeddingMeta> meta;
  Matrix values;  // one row per meta entry

  std::size_t width() const { return values.cols(); }
};

// Unit-norm embeddings for each record (dropout off). Records of either
// domain may be mixed; output order follows the input.
EmbeddingTable embed_records(const ChemClipModel& model, std::span<const ActivityRecord> records);

// Header record_id,compound_id,cell_line,domain,active,e0,...,e{w-1}.
void write_embeddings_csv(const std::filesystem::path& path, const EmbeddingTable& table);

// Reads the same schema with any embedding width. Rows whose norm deviates
// from 1 by more than 1e-6 are renormalised and a warning is logged.
EmbeddingTable import_external_embeddings(const std::filesystem::path& path);

EmbeddingTable concat(const EmbeddingTable& a, const EmbeddingTable& b);

}  // namespace chemclip
