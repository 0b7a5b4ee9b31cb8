// Command-line front end: dataset generation, hashing, soft targets, toy
// alignment training, caption round trips, and metric evaluation.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radarfm/captions.hpp"
#include "radarfm/contrastive.hpp"
#include "radarfm/dataset.hpp"
#include "radarfm/matrix.hpp"
#include "radarfm/metrics.hpp"
#include "radarfm/scenario.hpp"
#include "radarfm/scene.hpp"
#include "radarfm/scene_hash.hpp"
#include "radarfm/soft_targets.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

radarfm::CaptionTemplateSet load_templates_or_builtin(const std::string& path) {
  if (path.empty()) return radarfm::CaptionTemplateSet::builtin();
  return radarfm::load_templates(path);
}

struct GenerateArgs {
  std::string out;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  radarfm::ScenarioConfig cfg;
  std::string kind = "mixed";
  std::string templates;
};

int run_generate(GenerateArgs& args) {
  args.cfg.seed = args.seed;
  if (args.kind != "mixed") {
    args.cfg.fixed_kind = radarfm::scenario_kind_from_string(args.kind);
  }
  const auto templates = load_templates_or_builtin(args.templates);
  fs::create_directories(args.out);
  const fs::path out(args.out);
  radarfm::generate_dataset(args.cfg, args.n, out / "scenes.jsonl", out / "stats.json",
                            templates);

  ordered_json manifest;
  manifest["command"] = "generate";
  manifest["n"] = args.n;
  manifest["seed"] = args.seed;
  manifest["kind"] = args.kind;
  manifest["min_vehicles"] = args.cfg.min_vehicles;
  manifest["max_vehicles"] = args.cfg.max_vehicles;
  manifest["min_walkers"] = args.cfg.min_walkers;
  manifest["max_walkers"] = args.cfg.max_walkers;
  manifest["sign_probability"] = args.cfg.sign_probability;
  manifest["mix"] = {{"highway", args.cfg.mix_highway},
                     {"urban", args.cfg.mix_urban},
                     {"intersection", args.cfg.mix_intersection}};
  manifest["captions_per_scene"] = args.cfg.captions_per_scene;
  manifest["templates"] = args.templates;
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "wrote " << (out / "scenes.jsonl").string() << " (" << args.n
            << " scenes)\n";
  return 0;
}

struct HashArgs {
  std::string in;
  std::string decode;
  bool thermometer = false;
};

int run_hash(const HashArgs& args) {
  if (!args.decode.empty()) {
    const radarfm::SceneHash h = radarfm::SceneHash::deserialize(args.decode);
    std::cout << radarfm::descriptor_to_json(radarfm::decode_hash(h), 4) << "\n";
    return 0;
  }
  const radarfm::SceneDescriptor d = radarfm::descriptor_from_json(read_file(args.in));
  const radarfm::HashLayout layout{args.thermometer ? radarfm::CountCoding::thermometer
                                                    : radarfm::CountCoding::binary};
  std::cout << radarfm::encode_hash(d, layout).serialize() << "\n";
  return 0;
}

int run_layout(bool thermometer) {
  const radarfm::HashLayout layout{thermometer ? radarfm::CountCoding::thermometer
                                               : radarfm::CountCoding::binary};
  std::cout << "layout " << layout.version_tag() << ", "
            << radarfm::HashLayout::total_bits() << " bits\n";
  std::printf("%-32s %7s %6s %9s\n", "field", "offset", "width", "capacity");
  for (const radarfm::FieldSpec& f : layout.field_table()) {
    std::printf("%-32s %7zu %6zu %9u\n", f.name.c_str(), f.offset, f.width, f.capacity);
  }
  return 0;
}

struct TargetsArgs {
  std::string in;
  std::string out_prefix;
  std::vector<double> sigmas;
  double lambda = 0.85;
};

radarfm::KernelConfig kernel_config_from(const std::vector<double>& sigmas,
                                         double lambda) {
  radarfm::KernelConfig cfg;
  cfg.lambda = lambda;
  if (!sigmas.empty()) {
    if (sigmas.size() != radarfm::kBinCount) {
      throw std::invalid_argument("--sigma needs exactly 4 values");
    }
    std::copy(sigmas.begin(), sigmas.end(), cfg.sigmas.begin());
  }
  cfg.validate();
  return cfg;
}

int run_targets(const TargetsArgs& args) {
  const auto records = radarfm::read_dataset(args.in);
  std::vector<radarfm::SceneHash> hashes;
  std::vector<std::int64_t> ids;
  for (const auto& r : records) {
    hashes.push_back(radarfm::SceneHash::deserialize(r.hash_hex));
    ids.push_back(r.scene_id);
  }
  const radarfm::KernelConfig cfg = kernel_config_from(args.sigmas, args.lambda);
  const auto targets = radarfm::soft_target_matrix(hashes, cfg, ids);

  double max_deviation = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < targets.size(); ++j) sum += targets.values.at(i, j);
    max_deviation = std::max(max_deviation, std::abs(sum - 1.0));
  }

  const fs::path prefix(args.out_prefix);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  radarfm::write_targets_csv(targets, args.out_prefix + ".csv");
  radarfm::write_matrix(targets.values, args.out_prefix + ".bin");
  ordered_json manifest;
  manifest["command"] = "targets";
  manifest["input"] = args.in;
  manifest["n"] = targets.size();
  manifest["sigmas"] = cfg.sigmas;
  manifest["lambda"] = cfg.lambda;
  write_file(args.out_prefix + ".manifest.json", manifest.dump(2) + "\n");

  std::printf("n=%zu max_row_sum_deviation=%.3e\n", targets.size(), max_deviation);
  return 0;
}

struct TrainArgs {
  std::string in;
  std::string out;
  std::size_t n = 160;
  radarfm::TrainerSettings trainer;
  std::vector<double> sigmas;
  double lambda = 0.85;
  double tau = 0.07;
};

int run_train(const TrainArgs& args) {
  const auto records = radarfm::read_dataset(args.in);
  if (records.size() < args.n) {
    throw std::runtime_error("dataset has " + std::to_string(records.size()) +
                             " scenes, need " + std::to_string(args.n));
  }
  std::vector<radarfm::SceneDescriptor> scenes;
  for (std::size_t i = 0; i < args.n; ++i) scenes.push_back(records[i].descriptor);

  const radarfm::KernelConfig kernel = kernel_config_from(args.sigmas, args.lambda);
  radarfm::LossConfig loss;
  loss.temperature = args.tau;
  const radarfm::TrainResult result =
      radarfm::toy_align(scenes, kernel, loss, args.trainer);

  fs::create_directories(args.out);
  const fs::path out(args.out);
  radarfm::write_matrix(result.embeddings.radar, out / "embeddings_radar.bin");
  radarfm::write_matrix(result.embeddings.text, out / "embeddings_text.bin");

  const radarfm::Matrix similarity = radarfm::cosine_similarity_matrix(result.embeddings);
  const double rank_corr = radarfm::mean_row_spearman(similarity, result.targets.values);

  ordered_json history;
  history["command"] = "train";
  history["input"] = args.in;
  history["n"] = args.n;
  history["dim"] = args.trainer.dim;
  history["seed"] = args.trainer.seed;
  history["iterations"] = args.trainer.iterations;
  history["step_size"] = args.trainer.step_size;
  history["tau"] = args.tau;
  history["lambda"] = kernel.lambda;
  history["sigmas"] = kernel.sigmas;
  history["final_loss"] = result.loss_history.back();
  history["mean_row_spearman"] = rank_corr;
  history["loss"] = result.loss_history;
  write_file(out / "history.json", history.dump(2) + "\n");

  std::printf("final_loss=%.6f mean_row_spearman=%.4f iterations=%d\n",
              result.loss_history.back(), rank_corr, args.trainer.iterations);
  return 0;
}

struct CaptionArgs {
  std::string in;
  std::uint64_t seed = 0;
  int count = 1;
  std::string templates;
};

int run_caption(const CaptionArgs& args) {
  const radarfm::SceneDescriptor d = radarfm::descriptor_from_json(read_file(args.in));
  const auto templates = load_templates_or_builtin(args.templates);
  for (int k = 0; k < args.count; ++k) {
    std::cout << radarfm::generate_caption(d, args.seed + static_cast<std::uint64_t>(k),
                                           templates)
                     .text
              << "\n";
  }
  return 0;
}

struct ParseArgs {
  std::string in;
  std::string text;
  std::string templates;
};

int run_parse(const ParseArgs& args) {
  const auto templates = load_templates_or_builtin(args.templates);

  // A .jsonl input is treated as caption records; anything else is one
  // caption of plain text.
  if (!args.in.empty() && fs::path(args.in).extension() == ".jsonl") {
    std::ifstream in(args.in);
    if (!in) throw std::runtime_error("cannot open " + args.in);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const std::exception& e) {
        throw std::runtime_error(args.in + ":" + std::to_string(line_number) + ": " +
                                 e.what());
      }
      const std::string caption = j.contains("caption")
                                      ? j.at("caption").get<std::string>()
                                      : j.at("captions").at(0).get<std::string>();
      const radarfm::ParseResult result = radarfm::parse_caption(caption, templates);
      ordered_json out;
      if (j.contains("scene_id")) out["scene_id"] = j.at("scene_id");
      out["descriptor"] =
          ordered_json::parse(radarfm::descriptor_to_json(result.descriptor));
      auto diagnostics = ordered_json::array();
      for (const auto& diag : result.diagnostics) diagnostics.push_back(diag.message);
      out["diagnostics"] = std::move(diagnostics);
      std::cout << out.dump() << "\n";
    }
    return 0;
  }

  const std::string text = args.text.empty() ? read_file(args.in) : args.text;
  const radarfm::ParseResult result = radarfm::parse_caption(text, templates);
  std::cout << radarfm::descriptor_to_json(result.descriptor, 4) << "\n";
  for (const auto& diag : result.diagnostics) {
    std::cerr << "diagnostic: " << diag.message;
    if (!diag.clause.empty()) std::cerr << " [" << diag.clause << "]";
    std::cerr << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string out;
  std::string templates;
  bool verify = false;
};

int run_eval(const EvalArgs& args) {
  const auto truth_records = radarfm::read_dataset(args.truth);
  const auto templates = load_templates_or_builtin(args.templates);

  // Predictions: JSONL with scene_id plus either a descriptor or caption(s).
  std::ifstream in(args.pred);
  if (!in) throw std::runtime_error("cannot open prediction file " + args.pred);
  std::map<std::int64_t, radarfm::SceneDescriptor> predictions;
  std::vector<std::size_t> bad_lines;
  std::string line;
  std::size_t line_number = 0;
  std::size_t parse_diagnostics = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto scene_id = j.at("scene_id").get<std::int64_t>();
      if (j.contains("descriptor")) {
        predictions[scene_id] = radarfm::descriptor_from_json(j.at("descriptor").dump());
        continue;
      }
      std::string caption;
      if (j.contains("caption")) {
        caption = j.at("caption").get<std::string>();
      } else if (j.contains("captions")) {
        caption = j.at("captions").at(0).get<std::string>();
      } else {
        throw std::runtime_error("record carries neither descriptor nor caption");
      }
      const radarfm::ParseResult parsed = radarfm::parse_caption(caption, templates);
      for (const auto& diag : parsed.diagnostics) {
        std::cerr << "scene " << scene_id << ": " << diag.message << "\n";
        ++parse_diagnostics;
      }
      predictions[scene_id] = parsed.descriptor;
    } catch (const std::exception& e) {
      std::cerr << args.pred << ":" << line_number << ": " << e.what() << "\n";
      bad_lines.push_back(line_number);
    }
  }
  if (!bad_lines.empty()) {
    std::cerr << "unparseable prediction lines:";
    for (std::size_t l : bad_lines) std::cerr << " " << l;
    std::cerr << "\n";
    return 1;
  }

  std::vector<radarfm::SceneDescriptor> preds, truths;
  std::size_t missing = 0;
  for (const auto& record : truth_records) {
    const auto found = predictions.find(record.scene_id);
    if (found == predictions.end()) {
      std::cerr << "scene " << record.scene_id << ": no prediction, excluded\n";
      ++missing;
      continue;
    }
    preds.push_back(found->second);
    truths.push_back(record.descriptor);
  }
  if (preds.empty()) throw std::runtime_error("no scenes left to score");

  const radarfm::MetricsReport report = radarfm::evaluate_descriptors(preds, truths);
  fs::create_directories(args.out);
  const fs::path out(args.out);
  radarfm::write_report_csv(report, out / "report.csv");
  write_file(out / "report.json", radarfm::report_summary_json(report) + "\n");

  ordered_json manifest;
  manifest["command"] = "eval";
  manifest["pred"] = args.pred;
  manifest["truth"] = args.truth;
  manifest["scored_scenes"] = preds.size();
  manifest["missing_predictions"] = missing;
  manifest["caption_diagnostics"] = parse_diagnostics;
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  if (args.verify && !radarfm::verify_report_means(report)) {
    std::cerr << "report means failed re-derivation\n";
    return 1;
  }
  for (int b = 0; b < radarfm::kBinCount; ++b) {
    std::printf("%s f1=%.4f (cells=%d)\n", radarfm::bin_name(b + 1).c_str(),
                report.per_bin[b].f1, report.per_bin[b].cells);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured radar scene descriptors, hashes, soft targets, and metrics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "generate a synthetic scene dataset");
  generate->add_option("--n", gen.n, "number of scenes")
      ->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "master seed");
  generate->add_option("--out", gen.out, "output directory")->required();
  generate->add_option("--min-vehicles", gen.cfg.min_vehicles)
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--max-vehicles", gen.cfg.max_vehicles)->check(CLI::Range(0, 31));
  generate->add_option("--min-walkers", gen.cfg.min_walkers)
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--max-walkers", gen.cfg.max_walkers)->check(CLI::Range(0, 31));
  generate->add_option("--captions", gen.cfg.captions_per_scene, "captions per scene")
      ->check(CLI::Range(0, 16));
  generate->add_option("--kind", gen.kind, "highway, urban, intersection, or mixed")
      ->check(CLI::IsMember({"highway", "urban", "intersection", "mixed"}));
  generate->add_option("--templates", gen.templates, "caption template JSON");

  HashArgs hash;
  auto* hash_cmd = app.add_subcommand("hash", "encode a descriptor or decode a hash");
  auto* hash_in = hash_cmd->add_option("--in", hash.in, "descriptor JSON file");
  hash_cmd->add_option("--decode", hash.decode, "tagged hex hash to decode")
      ->excludes(hash_in);
  hash_cmd->add_flag("--thermometer", hash.thermometer, "use the unary count coding");

  bool layout_thermometer = false;
  auto* layout_cmd = app.add_subcommand("layout", "print the hash bit layout table");
  layout_cmd->add_flag("--thermometer", layout_thermometer);

  TargetsArgs targets;
  auto* targets_cmd = app.add_subcommand("targets", "soft target matrix from a dataset");
  targets_cmd->add_option("--in", targets.in, "scenes JSONL")->required();
  targets_cmd->add_option("--out-prefix", targets.out_prefix, "output path prefix")
      ->required();
  targets_cmd->add_option("--sigma", targets.sigmas, "four kernel bandwidths")
      ->expected(4);
  targets_cmd->add_option("--lambda", targets.lambda, "distance decay in (0,1]");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "toy embedding alignment");
  train_cmd->add_option("--in", train.in, "scenes JSONL")->required();
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_option("--n", train.n, "batch size")->check(CLI::Range(2, 100000));
  train_cmd->add_option("--iters", train.trainer.iterations)
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--dim", train.trainer.dim)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.trainer.seed);
  train_cmd->add_option("--step", train.trainer.step_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--tau", train.tau)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lambda", train.lambda);
  train_cmd->add_option("--sigma", train.sigmas, "four kernel bandwidths")->expected(4);

  CaptionArgs caption;
  auto* caption_cmd = app.add_subcommand("caption", "caption a descriptor JSON");
  caption_cmd->add_option("--in", caption.in, "descriptor JSON file")->required();
  caption_cmd->add_option("--seed", caption.seed);
  caption_cmd->add_option("--count", caption.count)->check(CLI::Range(1, 64));
  caption_cmd->add_option("--templates", caption.templates);

  ParseArgs parse;
  auto* parse_cmd = app.add_subcommand("parse", "parse a caption into a descriptor");
  auto* parse_in = parse_cmd->add_option("--in", parse.in, "text file");
  parse_cmd->add_option("--text", parse.text, "caption text")->excludes(parse_in);
  parse_cmd->add_option("--templates", parse.templates);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  eval_cmd->add_option("--pred", eval.pred, "prediction JSONL")->required();
  eval_cmd->add_option("--truth", eval.truth, "ground-truth scenes JSONL")->required();
  eval_cmd->add_option("--out", eval.out, "output directory")->required();
  eval_cmd->add_option("--templates", eval.templates);
  eval_cmd->add_flag("--verify", eval.verify, "re-derive report means and fail on drift");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) return run_generate(gen);
    if (hash_cmd->parsed()) {
      if (hash.in.empty() && hash.decode.empty()) {
        std::cerr << "hash: pass --in or --decode\n";
        return 2;
      }
      return run_hash(hash);
    }
    if (layout_cmd->parsed()) return run_layout(layout_thermometer);
    if (targets_cmd->parsed()) return run_targets(targets);
    if (train_cmd->parsed()) return run_train(train);
    if (caption_cmd->parsed()) return run_caption(caption);
    if (parse_cmd->parsed()) {
      if (parse.in.empty() && parse.text.empty()) {
        std::cerr << "parse: pass --in or --text\n";
        return 2;
      }
      return run_parse(parse);
    }
    if (eval_cmd->parsed()) return run_eval(eval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
