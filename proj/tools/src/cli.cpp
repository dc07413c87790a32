#include "chemclip_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "chemclip/checkpoint.hpp"
#include "chemclip/dataset.hpp"
#include "chemclip/embeddings.hpp"
#include "chemclip/error.hpp"
#include "chemclip/fingerprint.hpp"
#include "chemclip/log.hpp"
#include "chemclip/metrics.hpp"
#include "chemclip/projection.hpp"
#include "chemclip/smiles.hpp"
#include "chemclip/synth.hpp"

namespace chemclip::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidArgument, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::kInvalidArgument, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"data", "train", "classifier", "output"}, "config");
  RunConfig cfg;
  try {
    if (doc.contains("data")) {
      const json& d = doc["data"];
      reject_unknown(d, {"organic", "inorganic", "cell_map", "subsample_ratio", "split_seed"}, "data");
      cfg.data.organic = d.value("organic", cfg.data.organic);
      cfg.data.inorganic = d.value("inorganic", cfg.data.inorganic);
      cfg.data.cell_map = d.value("cell_map", cfg.data.cell_map);
      cfg.data.subsample_ratio = d.value("subsample_ratio", cfg.data.subsample_ratio);
      cfg.data.split_seed = d.value("split_seed", cfg.data.split_seed);
    }
    if (doc.contains("output")) {
      const json& o = doc["output"];
      reject_unknown(o, {"directory"}, "output");
      cfg.output_directory = o.value("directory", cfg.output_directory);
    }
  } catch (const json::type_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config has a mistyped value: ") + e.what());
  }
  // The section parsers report FormatError; a bad config file is a usage
  // problem here.
  try {
    if (doc.contains("train")) cfg.train = train_config_from_json(doc["train"].dump());
    if (doc.contains("classifier")) cfg.classifier = classifier_config_from_json(doc["classifier"].dump());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kFormatError) throw;
    const std::string what = e.what();
    throw Error(ErrorCode::kInvalidArgument, what.substr(what.find(": ") + 2));
  }
  if (!(cfg.data.subsample_ratio > 0.0)) throw Error(ErrorCode::kInvalidArgument, "data.subsample_ratio must be positive");
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  json doc;
  doc["data"] = {{"organic", cfg.data.organic},
                 {"inorganic", cfg.data.inorganic},
                 {"cell_map", cfg.data.cell_map},
                 {"subsample_ratio", cfg.data.subsample_ratio},
                 {"split_seed", cfg.data.split_seed}};
  doc["train"] = json::parse(train_config_to_json(cfg.train));
  doc["classifier"] = json::parse(classifier_config_to_json(cfg.classifier));
  doc["output"] = {{"directory", cfg.output_directory}};
  return doc.dump(2) + "\n";
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw Error(ErrorCode::kMissingInput, path.string() + " not found; " + hint);
}

// Options shared by every pipeline subcommand.
struct Common {
  std::string config_path;
  std::string run_dir;
};

struct Context {
  RunConfig config;
  fs::path dir;

  fs::path path(const std::string& name) const { return dir / name; }
};

Context open_context(const Common& common, bool write_resolved = true) {
  Context ctx;
  if (!common.config_path.empty()) ctx.config = run_config_from_json(read_file(common.config_path));
  if (!common.run_dir.empty()) ctx.config.output_directory = common.run_dir;
  ctx.config.train.validate();
  ctx.config.classifier.validate();
  ctx.dir = ctx.config.output_directory;
  if (write_resolved) write_file(ctx.path("resolved_config.json"), run_config_to_json(ctx.config));
  return ctx;
}

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "Run configuration JSON");
  cmd->add_option("--run", common.run_dir, "Run directory (overrides output.directory)");
}

constexpr const char* kOrganicRecords = "records_organic.csv";
constexpr const char* kInorganicRecords = "records_inorganic.csv";
constexpr const char* kSplitFile = "split.csv";
constexpr const char* kBestCheckpoint = "checkpoints/best.cclp";

struct Records {
  std::vector<ActivityRecord> organic;
  std::vector<ActivityRecord> inorganic;
};

Records load_ingested(const Context& ctx) {
  const auto hint = "run `chemclip ingest` first";
  require_file(ctx.path(kOrganicRecords), hint);
  require_file(ctx.path(kInorganicRecords), hint);
  return {read_records_csv(ctx.path(kOrganicRecords)), read_records_csv(ctx.path(kInorganicRecords))};
}

DatasetSplit make_split(const Context& ctx, const Records& records) {
  DatasetSplit split = domain_split(records.organic, records.inorganic, ctx.config.data.split_seed);
  write_split_csv(ctx.path(kSplitFile), split);
  log_info("split " + std::to_string(split.assignment.size()) + " compounds: train " +
           std::to_string(split.count(Split::kTrain)) + ", val " + std::to_string(split.count(Split::kVal)) +
           ", test " + std::to_string(split.count(Split::kTest)));
  return split;
}

DatasetSplit load_or_make_split(const Context& ctx, const Records& records) {
  if (fs::exists(ctx.path(kSplitFile))) return read_split_csv(ctx.path(kSplitFile));
  return make_split(ctx, records);
}

// Records of one split. Inactive organic compounds are subsampled in the
// training split only.
Records split_records(const Context& ctx, const Records& all, const DatasetSplit& split, Split which) {
  Records out{select_split(all.organic, split, which), select_split(all.inorganic, split, which)};
  if (which == Split::kTrain) {
    out.organic = subsample_inactives(out.organic, ctx.config.data.subsample_ratio, ctx.config.data.split_seed);
  }
  return out;
}

std::string format_fixed(double v, int digits = 3) {
  if (std::isnan(v)) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- subcommands -----------------------------------------------------------

struct SynthArgs {
  std::string out = "data";
  SynthConfig config;
};

int cmd_synth(const SynthArgs& args) {
  const SynthCorpus corpus = generate_synthetic(args.config);
  write_synthetic(args.out, corpus);
  log_info("wrote synthetic corpus to " + args.out);
  return kExitOk;
}

struct IngestArgs {
  Common common;
  std::string organic, inorganic, cell_map;
};

int cmd_ingest(IngestArgs args) {
  Context ctx = open_context(args.common, false);
  if (!args.organic.empty()) ctx.config.data.organic = args.organic;
  if (!args.inorganic.empty()) ctx.config.data.inorganic = args.inorganic;
  if (!args.cell_map.empty()) ctx.config.data.cell_map = args.cell_map;
  write_file(ctx.path("resolved_config.json"), run_config_to_json(ctx.config));
  for (const auto& p : {ctx.config.data.organic, ctx.config.data.inorganic, ctx.config.data.cell_map}) {
    require_file(p, "check the data section of the config");
  }
  const IngestResult result =
      ingest({ctx.config.data.organic, ctx.config.data.inorganic, ctx.config.data.cell_map});
  write_records_csv(ctx.path(kOrganicRecords), result.organic);
  write_records_csv(ctx.path(kInorganicRecords), result.inorganic);
  write_file(ctx.path("ingest_report.json"), result.report_json + "\n");
  log_info("ingested " + std::to_string(result.organic.size()) + " organic and " +
           std::to_string(result.inorganic.size()) + " inorganic records over " +
           std::to_string(result.shared_cell_lines.size()) + " shared cell lines");
  return kExitOk;
}

struct SplitArgs {
  Common common;
  std::optional<std::uint64_t> seed;
};

int cmd_split(const SplitArgs& args) {
  Context ctx = open_context(args.common, false);
  if (args.seed) ctx.config.data.split_seed = *args.seed;
  write_file(ctx.path("resolved_config.json"), run_config_to_json(ctx.config));
  make_split(ctx, load_ingested(ctx));
  return kExitOk;
}

struct TrainArgs {
  Common common;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

int cmd_train(const TrainArgs& args) {
  Context ctx = open_context(args.common, false);
  if (args.epochs) ctx.config.train.epochs = *args.epochs;
  if (args.seed) ctx.config.train.seed = *args.seed;
  ctx.config.train.validate();
  write_file(ctx.path("resolved_config.json"), run_config_to_json(ctx.config));

  const Records all = load_ingested(ctx);
  const DatasetSplit split = load_or_make_split(ctx, all);
  Records tr = split_records(ctx, all, split, Split::kTrain);
  Records va = split_records(ctx, all, split, Split::kVal);
  log_info("training on " + std::to_string(tr.inorganic.size()) + " inorganic / " +
           std::to_string(tr.organic.size()) + " organic records");
  const TrainingCorpus train_corpus(std::move(tr.inorganic), std::move(tr.organic));
  const TrainingCorpus val_corpus(std::move(va.inorganic), std::move(va.organic));

  TrainOptions options;
  options.checkpoint_dir = ctx.path("checkpoints");
  options.verbose = args.verbose;
  const TrainResult result = train(ctx.config.train, train_corpus, &val_corpus, options);

  json history = json::array();
  for (const auto& e : result.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", number_or_null(e.train_loss)},
                       {"train_info_nce", number_or_null(e.train_info_nce)},
                       {"train_triplet", number_or_null(e.train_triplet)},
                       {"val_loss", number_or_null(e.val_loss)},
                       {"val_info_nce", number_or_null(e.val_info_nce)},
                       {"val_triplet", number_or_null(e.val_triplet)},
                       {"batches", e.batches},
                       {"triplets", e.triplets}});
  }
  json summary = {{"best_epoch", result.best_epoch},
                  {"initial_train_loss", number_or_null(result.initial_train_loss)},
                  {"final_train_loss", number_or_null(result.final_train_loss)},
                  {"history", history}};
  write_file(ctx.path("train_history.json"), summary.dump(2) + "\n");
  log_info("training finished; best epoch " + std::to_string(result.best_epoch) + ", train loss " +
           format_fixed(result.initial_train_loss, 4) + " -> " + format_fixed(result.final_train_loss, 4));
  return kExitOk;
}

struct EmbedArgs {
  Common common;
  std::string checkpoint;
  std::string embeddings_dir;
};

fs::path embeddings_dir(const Context& ctx, const std::string& override_dir, const char* fallback) {
  return override_dir.empty() ? ctx.path(fallback) : fs::path(override_dir);
}

int cmd_embed(const EmbedArgs& args) {
  const Context ctx = open_context(args.common);
  const fs::path ckpt = args.checkpoint.empty() ? ctx.path(kBestCheckpoint) : fs::path(args.checkpoint);
  require_file(ckpt, "run `chemclip train` first");
  const Checkpoint loaded = load_checkpoint(ckpt);
  const Records all = load_ingested(ctx);
  require_file(ctx.path(kSplitFile), "run `chemclip split` or `chemclip train` first");
  const DatasetSplit split = read_split_csv(ctx.path(kSplitFile));
  const fs::path out_dir = embeddings_dir(ctx, args.embeddings_dir, "embeddings");
  fs::create_directories(out_dir);
  for (Split which : {Split::kTrain, Split::kVal, Split::kTest}) {
    const Records part = split_records(ctx, all, split, which);
    std::vector<ActivityRecord> records = part.inorganic;
    records.insert(records.end(), part.organic.begin(), part.organic.end());
    const EmbeddingTable table = embed_records(loaded.model, records);
    write_embeddings_csv(out_dir / (std::string(split_name(which)) + ".csv"), table);
  }
  log_info("wrote embeddings to " + out_dir.string());
  return kExitOk;
}

struct ImportArgs {
  Common common;
  std::string input;
  std::string split;
  std::string embeddings_dir;
};

int cmd_import(const ImportArgs& args) {
  const Context ctx = open_context(args.common);
  const Split which = parse_split(args.split);
  const EmbeddingTable table = import_external_embeddings(args.input);
  const fs::path out_dir = embeddings_dir(ctx, args.embeddings_dir, "external");
  fs::create_directories(out_dir);
  write_embeddings_csv(out_dir / (std::string(split_name(which)) + ".csv"), table);
  log_info("imported " + std::to_string(table.meta.size()) + " embeddings of width " + std::to_string(table.width()) +
           " into " + out_dir.string());
  return kExitOk;
}

EmbeddingTable load_embeddings(const fs::path& dir, Split which) {
  const fs::path path = dir / (std::string(split_name(which)) + ".csv");
  require_file(path, "run `chemclip embed` or `chemclip import-embeddings` first");
  return import_external_embeddings(path);
}

struct Labels {
  std::vector<Domain> domains;
  std::unique_ptr<bool[]> flags;  // std::vector<bool> cannot back a span
  std::span<const bool> active;
};

Labels labels_of(const EmbeddingTable& table) {
  Labels out;
  out.flags = std::make_unique<bool[]>(table.meta.size());
  for (std::size_t i = 0; i < table.meta.size(); ++i) {
    out.domains.push_back(table.meta[i].domain);
    out.flags[i] = table.meta[i].active;
  }
  out.active = {out.flags.get(), table.meta.size()};
  return out;
}

struct EvalAlignArgs {
  Common common;
  std::string embeddings_dir;
  std::string split = "test";
};

int cmd_eval_align(const EvalAlignArgs& args) {
  const Context ctx = open_context(args.common);
  const Split which = parse_split(args.split);
  const EmbeddingTable table = load_embeddings(embeddings_dir(ctx, args.embeddings_dir, "embeddings"), which);
  const Labels labels = labels_of(table);
  const AlignmentReport report = alignment_report(centroids(table.values, labels.domains, labels.active));
  const std::string stem = "alignment_" + std::string(split_name(which));
  write_file(ctx.path(stem + ".json"), report.to_json());
  write_file(ctx.path(stem + ".txt"), report.to_text());
  std::cout << report.to_text();
  return kExitOk;
}

struct DomainData {
  Matrix x;
  std::vector<int> y;
};

DomainData domain_rows(const EmbeddingTable& table, Domain domain) {
  std::vector<std::size_t> rows;
  DomainData out;
  for (std::size_t i = 0; i < table.meta.size(); ++i) {
    if (table.meta[i].domain != domain) continue;
    rows.push_back(i);
    out.y.push_back(table.meta[i].active ? 1 : 0);
  }
  out.x = gather_rows(table.values, rows);
  return out;
}

std::uint64_t matrix_hash(const Matrix& m) {
  const auto values = m.values();
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(values.data()), values.size() * sizeof(double)});
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct TrainClfArgs {
  Common common;
  std::string embeddings_dir;
};

int cmd_train_clf(const TrainClfArgs& args) {
  const Context ctx = open_context(args.common);
  const fs::path dir = embeddings_dir(ctx, args.embeddings_dir, "embeddings");
  const EmbeddingTable train_table = load_embeddings(dir, Split::kTrain);
  const EmbeddingTable val_table = load_embeddings(dir, Split::kVal);
  json summary = json::object();
  for (Domain domain : {Domain::kOrganic, Domain::kInorganic}) {
    const DomainData tr = domain_rows(train_table, domain);
    const DomainData va = domain_rows(val_table, domain);
    const std::uint64_t before = matrix_hash(tr.x) ^ matrix_hash(va.x);
    const ClassifierModel model = train_classifier(tr.x, tr.y, va.x, va.y, ctx.config.classifier);
    const std::uint64_t after = matrix_hash(tr.x) ^ matrix_hash(va.x);
    if (before != after) throw Error(ErrorCode::kFormatError, "embeddings changed during classifier training");
    const std::string name(domain_name(domain));
    fs::create_directories(ctx.path("classifiers"));
    save_classifier(ctx.path("classifiers/" + name + ".cclp"), model, ctx.config.classifier);
    summary[name] = {{"train_records", tr.y.size()},
                     {"val_records", va.y.size()},
                     {"pos_weight", model.pos_weight},
                     {"threshold", model.threshold},
                     {"epochs_trained", model.epochs_trained},
                     {"best_epoch", model.best_epoch},
                     {"embedding_hash", hex(after)}};
    log_info(name + " classifier: " + std::to_string(model.epochs_trained) + " epochs, best " +
             std::to_string(model.best_epoch) + ", threshold " + format_fixed(model.threshold, 4));
  }
  summary["hidden_layers"] = ctx.config.classifier.hidden;
  write_file(ctx.path("classifier_training.json"), summary.dump(2) + "\n");
  return kExitOk;
}

struct EvalClfArgs {
  Common common;
  std::string embeddings_dir;
  std::string split = "test";
};

int cmd_eval_clf(const EvalClfArgs& args) {
  const Context ctx = open_context(args.common);
  const Split which = parse_split(args.split);
  const EmbeddingTable table = load_embeddings(embeddings_dir(ctx, args.embeddings_dir, "embeddings"), which);
  json doc = json::object();
  std::ostringstream text;
  text << "domain      records  AUC     F1      Acc     Prec    Recall  threshold\n";
  for (Domain domain : {Domain::kOrganic, Domain::kInorganic}) {
    const std::string name(domain_name(domain));
    const fs::path path = ctx.path("classifiers/" + name + ".cclp");
    require_file(path, "run `chemclip train-clf` first");
    const ClassifierModel model = load_classifier(path);
    const DomainData data = domain_rows(table, domain);
    const ClassificationReport r = evaluate_classifier(model, data.x, data.y);
    doc[name] = {{"records", data.y.size()}, {"auc", number_or_null(r.auc)}, {"f1", r.f1},
                 {"accuracy", r.accuracy},   {"precision", r.precision},    {"recall", r.recall},
                 {"threshold", r.threshold}, {"tp", r.tp},                  {"fp", r.fp},
                 {"tn", r.tn},               {"fn", r.fn}};
    char line[160];
    std::snprintf(line, sizeof(line), "%-11s %-8zu %-7s %-7s %-7s %-7s %-7s %s\n", name.c_str(), data.y.size(),
                  format_fixed(r.auc).c_str(), format_fixed(r.f1).c_str(), format_fixed(r.accuracy).c_str(),
                  format_fixed(r.precision).c_str(), format_fixed(r.recall).c_str(),
                  format_fixed(r.threshold, 4).c_str());
    text << line;
  }
  const std::string stem = "classification_" + std::string(split_name(which));
  write_file(ctx.path(stem + ".json"), doc.dump(2) + "\n");
  write_file(ctx.path(stem + ".txt"), text.str());
  std::cout << text.str();
  return kExitOk;
}

struct ProjectArgs {
  Common common;
  std::string method = "tsne";
  std::string out;
  std::string coords;
  std::string embeddings_dir;
  std::string split = "test";
  TsneParams tsne;
};

int cmd_project(const ProjectArgs& args) {
  const Context ctx = open_context(args.common);
  const Split which = parse_split(args.split);
  const EmbeddingTable table = load_embeddings(embeddings_dir(ctx, args.embeddings_dir, "embeddings"), which);
  Projection2D proj;
  if (args.method == "pca") {
    proj = pca_2d(table.values);
  } else if (args.method == "tsne") {
    const TsneResult r = tsne_2d(table.values, args.tsne);
    log_info("t-SNE KL " + format_fixed(r.initial_kl, 4) + " -> " + format_fixed(r.final_kl, 4));
    proj = r.projection;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown projection method '" + args.method + "'");
  }
  const Labels labels = labels_of(table);
  write_file(args.out, render_scatter_svg(proj, labels.domains, labels.active));
  if (!args.coords.empty()) write_projection_csv(args.coords, proj, table);
  return kExitOk;
}

struct FpArgs {
  std::string smiles;
  int radius = 2;
  std::size_t bits = kFingerprintBits;
};

int cmd_fp(const FpArgs& args) {
  const MolGraph graph = parse_smiles(args.smiles);
  const Fingerprint fp = morgan_fingerprint(graph, args.radius, args.bits);
  std::cout << "n_distinct " << fp.n_distinct << "\n";
  for (std::size_t bit : fp.on_bits()) std::cout << bit << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Dual-encoder contrastive alignment of organic and inorganic anticancer compounds"};
  app.name(args.empty() ? "chemclip" : args[0]);
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with a planted structure-activity rule");
  c_synth->add_option("--out", synth.out, "Output directory")->capture_default_str();
  c_synth->add_option("--seed", synth.config.seed)->capture_default_str();
  c_synth->add_option("--n-organic", synth.config.n_organic)->capture_default_str();
  c_synth->add_option("--n-inorganic", synth.config.n_inorganic)->capture_default_str();
  c_synth->add_option("--cell-lines", synth.config.n_cell_lines)->capture_default_str();
  c_synth->add_option("--signal", synth.config.signal)->capture_default_str();
  c_synth->add_option("--noise", synth.config.label_noise)->capture_default_str();

  IngestArgs ingest_args;
  auto* c_ingest = app.add_subcommand("ingest", "Load, standardise and filter the raw CSV files");
  add_common(c_ingest, ingest_args.common);
  c_ingest->add_option("--organic", ingest_args.organic, "Organic activity CSV");
  c_ingest->add_option("--inorganic", ingest_args.inorganic, "Inorganic activity CSV");
  c_ingest->add_option("--cell-map", ingest_args.cell_map, "Cell-line name map CSV");

  SplitArgs split_args;
  auto* c_split = app.add_subcommand("split", "Compound-level 70/15/15 split");
  add_common(c_split, split_args.common);
  c_split->add_option("--seed", split_args.seed, "Overrides data.split_seed");

  TrainArgs train_args;
  auto* c_train = app.add_subcommand("train", "Train both projection heads");
  add_common(c_train, train_args.common);
  c_train->add_option("--epochs", train_args.epochs, "Overrides train.epochs");
  c_train->add_option("--seed", train_args.seed, "Overrides train.seed");
  c_train->add_flag("--verbose", train_args.verbose, "Log every epoch");

  EmbedArgs embed_args;
  auto* c_embed = app.add_subcommand("embed", "Embed every split with a trained checkpoint");
  add_common(c_embed, embed_args.common);
  c_embed->add_option("--checkpoint", embed_args.checkpoint, "Defaults to <run>/checkpoints/best.cclp");
  c_embed->add_option("--embeddings-dir", embed_args.embeddings_dir, "Defaults to <run>/embeddings");

  ImportArgs import_args;
  auto* c_import = app.add_subcommand("import-embeddings", "Import embeddings produced by another encoder");
  add_common(c_import, import_args.common);
  c_import->add_option("--in", import_args.input, "Embeddings CSV")->required();
  c_import->add_option("--split", import_args.split, "train, val or test")->required();
  c_import->add_option("--embeddings-dir", import_args.embeddings_dir, "Defaults to <run>/external");

  EvalAlignArgs align_args;
  auto* c_align = app.add_subcommand("eval-align", "Centroid alignment metrics");
  add_common(c_align, align_args.common);
  c_align->add_option("--embeddings-dir", align_args.embeddings_dir, "Defaults to <run>/embeddings");
  c_align->add_option("--split", align_args.split)->capture_default_str();

  TrainClfArgs train_clf_args;
  auto* c_train_clf = app.add_subcommand("train-clf", "Train activity classifiers on frozen embeddings");
  add_common(c_train_clf, train_clf_args.common);
  c_train_clf->add_option("--embeddings-dir", train_clf_args.embeddings_dir, "Defaults to <run>/embeddings");

  EvalClfArgs eval_clf_args;
  auto* c_eval_clf = app.add_subcommand("eval-clf", "Evaluate the activity classifiers");
  add_common(c_eval_clf, eval_clf_args.common);
  c_eval_clf->add_option("--embeddings-dir", eval_clf_args.embeddings_dir, "Defaults to <run>/embeddings");
  c_eval_clf->add_option("--split", eval_clf_args.split)->capture_default_str();

  ProjectArgs project_args;
  auto* c_project = app.add_subcommand("project", "2-D projection and scatter plot");
  add_common(c_project, project_args.common);
  c_project->add_option("--method", project_args.method, "tsne or pca")
      ->check(CLI::IsMember({"tsne", "pca"}))
      ->capture_default_str();
  c_project->add_option("--out", project_args.out, "SVG output path")->required();
  c_project->add_option("--coords", project_args.coords, "Coordinate CSV output path");
  c_project->add_option("--embeddings-dir", project_args.embeddings_dir, "Defaults to <run>/embeddings");
  c_project->add_option("--split", project_args.split)->capture_default_str();
  c_project->add_option("--perplexity", project_args.tsne.perplexity)->capture_default_str();
  c_project->add_option("--iterations", project_args.tsne.iterations)->capture_default_str();
  c_project->add_option("--seed", project_args.tsne.seed)->capture_default_str();

  FpArgs fp_args;
  auto* c_fp = app.add_subcommand("fp", "Print a Morgan fingerprint");
  c_fp->add_option("--smiles", fp_args.smiles)->required();
  c_fp->add_option("--radius", fp_args.radius)->capture_default_str();
  c_fp->add_option("--bits", fp_args.bits)->capture_default_str();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return kExitUsage;
  }
  set_log_level(quiet ? LogLevel::kWarning : LogLevel::kInfo);

  try {
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_ingest->parsed()) return cmd_ingest(ingest_args);
    if (c_split->parsed()) return cmd_split(split_args);
    if (c_train->parsed()) return cmd_train(train_args);
    if (c_embed->parsed()) return cmd_embed(embed_args);
    if (c_import->parsed()) return cmd_import(import_args);
    if (c_align->parsed()) return cmd_eval_align(align_args);
    if (c_train_clf->parsed()) return cmd_train_clf(train_clf_args);
    if (c_eval_clf->parsed()) return cmd_eval_clf(eval_clf_args);
    if (c_project->parsed()) return cmd_project(project_args);
    if (c_fp->parsed()) return cmd_fp(fp_args);
  } catch (const Error& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace chemclip::cli
