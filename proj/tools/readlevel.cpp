// readlevel: ordinal readability prediction pipeline.
//
// Subcommands cover each pipeline stage, communicating through files so any
// stage can be re-run and inspected on its own: weights, scale, relabel,
// decode, fuse, aggregate, evaluate, train-toy, report.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "readlevel/readlevel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace readlevel;

namespace {

void write_sidecar_manifest(const fs::path& primary_output,
                            const std::string& subcommand, json config,
                            const std::vector<fs::path>& inputs,
                            const std::vector<fs::path>& outputs) {
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.config = std::move(config);
  manifest.inputs = inputs;
  manifest.outputs = outputs;
  write_manifest(primary_output.string() + ".manifest.json", manifest);
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

struct WeightsOpts {
  std::string gold;
  std::string scale = "barec";
  std::string out;
};

int run_weights(const WeightsOpts& opt) {
  const LevelScale scale = scale_by_name(opt.scale);
  const auto gold = load_gold(opt.gold, scale);
  std::map<int, std::int64_t> counts;
  for (const auto& rec : gold) ++counts[rec.level];
  const ClassWeights cw = compute_class_weights(counts);

  json weights = json::object();
  json jcounts = json::object();
  for (const auto& [level, w] : cw.weights) {
    weights[std::to_string(level)] = w;
    jcounts[std::to_string(level)] = cw.counts.at(level);
  }
  json out{{"n_samples", cw.n_samples},
           {"n_classes", cw.n_classes},
           {"counts", jcounts},
           {"weights", weights}};
  auto f = detail::open_output(opt.out);
  f << out.dump(2) << '\n';
  f.close();

  write_sidecar_manifest(opt.out, "weights",
                         {{"gold", opt.gold}, {"scale", opt.scale}},
                         {opt.gold}, {opt.out});
  std::cout << "wrote " << opt.out << " (" << cw.n_classes << " classes, "
            << cw.n_samples << " samples)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// scale
// ---------------------------------------------------------------------------

struct ScaleOpts {
  std::string in;
  std::string from = "samer";
  std::string to = "barec";
  std::string out;
  bool round = false;
};

int run_scale(const ScaleOpts& opt) {
  const LevelScale src = scale_by_name(opt.from);
  const LevelScale dst = scale_by_name(opt.to);

  auto in = detail::open_input(opt.in);
  auto out = detail::open_output(opt.out);
  std::string line;
  std::size_t lineno = 0;
  std::size_t rows = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_tsv(line);
    if (fields.size() != 2 && fields.size() != 3)
      throw ParseError(opt.in, lineno, "expected `id<TAB>[text<TAB>]label`");
    double value = 0.0;
    if (!detail::parse_double(fields.back(), value))
      throw ParseError(opt.in, lineno,
                       "non-numeric label '" + std::string(fields.back()) + "'");
    const double scaled = scale_label(value, src, dst);
    out << fields[0] << '\t';
    if (fields.size() == 3) out << fields[1] << '\t';
    if (opt.round)
      out << clamp_level(round_half_away(scaled), dst);
    else
      out << detail::format_double(scaled);
    out << '\n';
    ++rows;
  }
  out.close();

  write_sidecar_manifest(opt.out, "scale",
                         {{"in", opt.in},
                          {"from", opt.from},
                          {"to", opt.to},
                          {"round", opt.round}},
                         {opt.in}, {opt.out});
  std::cout << "scaled " << rows << " labels " << opt.from << " -> " << opt.to
            << " into " << opt.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// relabel
// ---------------------------------------------------------------------------

struct RelabelOpts {
  std::string source;
  std::string pred;
  std::string out;
  double margin = 0.5;
};

int run_relabel(const RelabelOpts& opt) {
  const auto source = load_gold(opt.source, samer_scale());
  std::map<std::string, int> pred_level;
  for (const auto& [id, level] : load_level_tsv(opt.pred))
    pred_level[id] = require_level(level, barec_scale());

  std::vector<std::string> uncovered;
  std::vector<GoldRecord> merged;
  std::vector<int> levels;
  for (const auto& rec : source) {
    auto it = pred_level.find(rec.sentence_id);
    if (it == pred_level.end()) {
      uncovered.push_back(rec.sentence_id);
      continue;
    }
    merged.push_back({rec.sentence_id, rec.text, it->second});
    levels.push_back(it->second);
  }
  if (!uncovered.empty()) {
    std::string msg = "predictions missing for " +
                      std::to_string(uncovered.size()) + " source ids:";
    for (std::size_t i = 0; i < std::min<std::size_t>(uncovered.size(), 10); ++i)
      msg += " " + uncovered[i];
    if (uncovered.size() > 10) msg += " ...";
    throw ValidationError(msg);
  }

  save_gold(opt.out, merged);
  const RoundtripReport report =
      verify_roundtrip(levels, barec_scale(), samer_scale(), opt.margin);

  write_sidecar_manifest(
      opt.out, "relabel",
      {{"source", opt.source},
       {"pred", opt.pred},
       {"margin", opt.margin},
       {"roundtrip",
        {{"n", report.n},
         {"max_deviation", report.max_deviation},
         {"margin", report.margin},
         {"pass", report.pass}}}},
      {opt.source, opt.pred}, {opt.out});
  std::cout << "relabeled " << merged.size() << " items into " << opt.out
            << "; roundtrip max deviation " << fmt4(report.max_deviation)
            << " (margin " << fmt4(report.margin) << ", "
            << (report.pass ? "pass" : "FAIL") << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// decode / fuse shared machinery
// ---------------------------------------------------------------------------

struct HeadSetOpts {
  std::vector<std::string> heads;
  std::string calibration;
  std::string gold;
  std::string emit_calibration;
};

std::vector<HeadOutput> load_head_files(const std::vector<std::string>& paths) {
  std::vector<HeadOutput> all;
  for (const auto& p : paths) {
    auto part = load_heads(p);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

// Calibration resolution order: explicit table file, else fit against gold
// labels, else fail if any regression head needs one.
CalibrationTable resolve_calibration(const std::vector<HeadOutput>& heads,
                                     const HeadSetOpts& opt) {
  CalibrationTable table;
  if (!opt.calibration.empty()) table = load_calibration(opt.calibration);

  std::set<std::string> regression_models;
  for (const auto& h : heads)
    if (h.kind == HeadKind::regression) regression_models.insert(h.model_id);

  bool fitted = false;
  if (!opt.gold.empty()) {
    std::map<std::string, int> gold_level;
    for (const auto& rec : load_gold(opt.gold, barec_scale()))
      gold_level[rec.sentence_id] = rec.level;
    std::map<std::string, std::vector<std::pair<double, int>>> samples;
    for (const auto& h : heads) {
      if (h.kind != HeadKind::regression) continue;
      if (table.contains(h.model_id)) continue;
      auto it = gold_level.find(h.sentence_id);
      if (it != gold_level.end())
        samples[h.model_id].emplace_back(h.score, it->second);
    }
    for (const auto& [model, pairs] : samples) {
      table.emplace(model, calibrate_regression(model, pairs));
      fitted = true;
    }
  }

  for (const auto& model : regression_models)
    if (!table.contains(model))
      throw ConfigError("no calibration for regression model '" + model +
                        "'; pass --calibration or --gold");
  if (fitted && !opt.emit_calibration.empty())
    save_calibration(opt.emit_calibration, table);
  return table;
}

std::vector<DecodedPrediction> decode_all(const std::vector<HeadOutput>& heads,
                                          const CalibrationTable& table) {
  std::vector<DecodedPrediction> decoded;
  decoded.reserve(heads.size());
  for (const auto& h : heads) decoded.push_back(decode(h, table));
  std::sort(decoded.begin(), decoded.end(),
            [](const DecodedPrediction& a, const DecodedPrediction& b) {
              return std::tie(a.sentence_id, a.model_id) <
                     std::tie(b.sentence_id, b.model_id);
            });
  return decoded;
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

struct DecodeOpts {
  HeadSetOpts heads;
  std::string out;
};

int run_decode(const DecodeOpts& opt) {
  const auto heads = load_head_files(opt.heads.heads);
  const auto table = resolve_calibration(heads, opt.heads);
  const auto decoded = decode_all(heads, table);
  save_decoded(opt.out, decoded);

  std::vector<fs::path> inputs(opt.heads.heads.begin(), opt.heads.heads.end());
  if (!opt.heads.calibration.empty()) inputs.push_back(opt.heads.calibration);
  if (!opt.heads.gold.empty()) inputs.push_back(opt.heads.gold);
  std::vector<fs::path> outputs{opt.out};
  if (!opt.heads.emit_calibration.empty() && fs::exists(opt.heads.emit_calibration))
    outputs.push_back(opt.heads.emit_calibration);
  write_sidecar_manifest(opt.out, "decode",
                         {{"heads", opt.heads.heads},
                          {"calibration", opt.heads.calibration},
                          {"gold", opt.heads.gold}},
                         inputs, outputs);
  std::cout << "decoded " << decoded.size() << " head outputs into " << opt.out
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fuse
// ---------------------------------------------------------------------------

struct FuseOpts {
  HeadSetOpts heads;
  std::string strategy = "weighted";
  bool use_raw = false;
  bool pair_rule = false;
  std::string out;
};

int run_fuse(const FuseOpts& opt) {
  const std::string strategy = opt.pair_rule ? "pair" : opt.strategy;
  if (strategy != "weighted" && strategy != "pair")
    throw ConfigError("unknown fusion strategy '" + strategy +
                      "' (expected weighted or pair)");

  const auto heads = load_head_files(opt.heads.heads);
  const auto table = resolve_calibration(heads, opt.heads);
  const auto decoded = decode_all(heads, table);

  std::set<std::string> models;
  for (const auto& d : decoded) models.insert(d.model_id);
  if (strategy == "pair" && models.size() != 2)
    throw ConfigError("pair strategy needs exactly 2 models, got " +
                      std::to_string(models.size()));

  std::map<std::string, std::vector<DecodedPrediction>> by_sentence;
  for (const auto& d : decoded) by_sentence[d.sentence_id].push_back(d);

  std::vector<FusedPrediction> fused;
  std::size_t partial = 0;
  for (auto& [id, group] : by_sentence) {
    if (group.size() < models.size()) ++partial;
    if (strategy == "weighted") {
      fused.push_back(fuse_weighted(std::move(group), opt.use_raw));
    } else {
      FusedPrediction f;
      f.sentence_id = id;
      if (group.size() == 2) {
        f.value = fuse_pair(group[0].level, group[1].level);
      } else {
        f.value = static_cast<double>(group[0].level);
      }
      for (const auto& d : group)
        f.contributors.push_back(
            {d.model_id, static_cast<double>(d.level), d.confidence});
      f.level = clamp_level(round_half_away(f.value), barec_scale());
      fused.push_back(std::move(f));
    }
  }
  if (partial > 0)
    std::cerr << "warning: " << partial
              << " sentences fused from a partial ensemble\n";

  save_fused(opt.out, fused);

  std::vector<fs::path> inputs(opt.heads.heads.begin(), opt.heads.heads.end());
  if (!opt.heads.calibration.empty()) inputs.push_back(opt.heads.calibration);
  if (!opt.heads.gold.empty()) inputs.push_back(opt.heads.gold);
  write_sidecar_manifest(opt.out, "fuse",
                         {{"heads", opt.heads.heads},
                          {"strategy", strategy},
                          {"use_raw", opt.use_raw}},
                         inputs, {opt.out});
  std::cout << "fused " << fused.size() << " sentences (" << models.size()
            << " models, " << strategy << ") into " << opt.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

struct AggregateOpts {
  std::string in;
  std::string strategy = "max";
  double theta = 0.5;
  std::string override_levels = "16,17";
  std::vector<std::string> per_model;
  std::string out;
  std::string skew_out;
  double skew_multiple = 3.0;
};

std::set<int> parse_override_levels(const std::string& spec) {
  std::set<int> levels;
  if (spec.empty() || spec == "none") return levels;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const auto piece = spec.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    int level = 0;
    if (!detail::parse_int(piece, level))
      throw ConfigError("bad override level '" + std::string(piece) + "'");
    levels.insert(require_level(level, barec_scale()));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return levels;
}

std::map<std::string, int> aggregate_rows(
    const std::vector<PredictionRow>& rows, const AggregationPolicy& policy) {
  std::map<std::string, std::vector<PredictionRow>> groups;
  for (const auto& row : rows) groups[doc_key(row.id)].push_back(row);
  std::map<std::string, int> docs;
  for (const auto& [doc, members] : groups) {
    if (policy.strategy == AggregationStrategy::max) {
      std::vector<int> levels;
      for (const auto& m : members) levels.push_back(m.level);
      docs[doc] = aggregate_max(levels);
    } else {
      std::vector<double> values;
      for (const auto& m : members)
        values.push_back(clamp_score(m.value, barec_scale()));
      docs[doc] = aggregate_mean(values, policy);
    }
  }
  return docs;
}

int run_aggregate(const AggregateOpts& opt) {
  AggregationPolicy policy;
  policy.strategy = aggregation_strategy_from_string(opt.strategy);
  policy.borderline_threshold = opt.theta;
  policy.override_levels = parse_override_levels(opt.override_levels);
  policy.validate();

  const auto rows = load_prediction_tsv(opt.in);
  auto docs = aggregate_rows(rows, policy);

  // Per-model document aggregates drive the override heuristic.
  if (!opt.per_model.empty() && !policy.override_levels.empty()) {
    std::vector<std::map<std::string, int>> model_docs;
    for (const auto& path : opt.per_model)
      model_docs.push_back(aggregate_rows(load_prediction_tsv(path), policy));
    for (auto& [doc, level] : docs) {
      std::vector<int> votes;
      for (const auto& md : model_docs) {
        auto it = md.find(doc);
        if (it != md.end()) votes.push_back(it->second);
      }
      level = apply_override(level, votes, policy);
    }
  }

  std::map<std::string, std::vector<int>> member_levels;
  for (const auto& row : rows) member_levels[doc_key(row.id)].push_back(row.level);
  std::vector<DocPrediction> doc_preds;
  for (const auto& [doc, level] : docs)
    doc_preds.push_back({doc, level, member_levels.at(doc)});

  auto out = detail::open_output(opt.out);
  for (const auto& d : doc_preds) out << d.doc_id << '\t' << d.level << '\n';
  out.close();

  const SkewReport skew = skew_report(doc_preds, opt.skew_multiple);
  std::vector<fs::path> outputs{opt.out};
  if (!opt.skew_out.empty()) {
    auto sf = detail::open_output(opt.skew_out);
    sf << to_json(skew).dump(2) << '\n';
    outputs.push_back(opt.skew_out);
  }

  std::vector<fs::path> inputs{opt.in};
  inputs.insert(inputs.end(), opt.per_model.begin(), opt.per_model.end());
  write_sidecar_manifest(opt.out, "aggregate",
                         {{"in", opt.in},
                          {"strategy", opt.strategy},
                          {"theta", opt.theta},
                          {"override", opt.override_levels},
                          {"per_model", opt.per_model},
                          {"skew_multiple", opt.skew_multiple}},
                         inputs, outputs);

  std::cout << "aggregated " << rows.size() << " sentences into "
            << doc_preds.size() << " documents (" << opt.strategy << ")\n";
  if (!skew.zero_coverage.empty()) {
    std::cout << "skew: no predictions for levels";
    for (int lv : skew.zero_coverage) std::cout << ' ' << lv;
    std::cout << '\n';
  }
  if (!skew.over_represented.empty()) {
    std::cout << "skew: over-represented levels";
    for (int lv : skew.over_represented) std::cout << ' ' << lv;
    std::cout << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
  std::string gold;
  std::string pred;
  std::string collapse_dir;
  std::string json_out;
  std::string scale = "barec";
};

CollapseMaps load_collapse_maps(const std::string& dir) {
  if (dir.empty()) return CollapseMaps{};
  return CollapseMaps{CollapseMap::load(fs::path(dir) / "collapse_7.tsv"),
                      CollapseMap::load(fs::path(dir) / "collapse_5.tsv"),
                      CollapseMap::load(fs::path(dir) / "collapse_3.tsv")};
}

int run_evaluate(const EvaluateOpts& opt) {
  const auto gold = load_gold(opt.gold, scale_by_name(opt.scale));
  std::map<std::string, int> pred_level;
  for (const auto& [id, level] : load_level_tsv(opt.pred))
    pred_level[id] = require_level(level, barec_scale());

  std::vector<EvalPair> pairs;
  std::vector<std::string> missing;
  for (const auto& rec : gold) {
    auto it = pred_level.find(rec.sentence_id);
    if (it == pred_level.end()) {
      missing.push_back(rec.sentence_id);
      continue;
    }
    pairs.push_back({rec.level, it->second});
  }
  if (!missing.empty()) {
    std::string msg =
        "predictions missing for " + std::to_string(missing.size()) + " ids:";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i)
      msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw ValidationError(msg);
  }
  if (pred_level.size() > pairs.size())
    std::cerr << "warning: " << pred_level.size() - pairs.size()
              << " predictions have no gold label and were ignored\n";

  const EvalReport report =
      full_report(pairs, load_collapse_maps(opt.collapse_dir));

  std::cout << "n         " << report.n << '\n'
            << "qwk       " << fmt4(report.qwk) << '\n'
            << "acc19     " << fmt4(report.acc19) << '\n'
            << "acc7      " << fmt4(report.acc7) << '\n'
            << "acc5      " << fmt4(report.acc5) << '\n'
            << "acc3      " << fmt4(report.acc3) << '\n'
            << "adj_acc   " << fmt4(report.adjacent_acc) << '\n'
            << "avg_dist  " << fmt4(report.avg_dist) << '\n';

  if (!opt.json_out.empty()) {
    auto f = detail::open_output(opt.json_out);
    f << to_json(report).dump(2) << '\n';
    f.close();
    std::vector<fs::path> inputs{opt.gold, opt.pred};
    write_sidecar_manifest(opt.json_out, "evaluate",
                           {{"gold", opt.gold},
                            {"pred", opt.pred},
                            {"collapse", opt.collapse_dir},
                            {"scale", opt.scale}},
                           inputs, {opt.json_out});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train-toy
// ---------------------------------------------------------------------------

struct TrainToyOpts {
  std::string out_dir;
  int n = 5000;
  int dim = 8;
  std::string profile = "two-peak";
  double noise_std = 0.3;
  std::uint64_t seed = 0;
  std::vector<std::string> heads{"ce", "mse", "coral"};
  TrainConfig config;
  double train_frac = 0.7;
  double dev_frac = 0.15;
};

ImbalanceProfile resolve_profile(const std::string& name) {
  if (name == "uniform") return ImbalanceProfile::uniform();
  if (name == "two-peak") return ImbalanceProfile::two_peak();
  auto in = detail::open_input(name);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(name, 0, e.what());
  }
  return ImbalanceProfile::from_json(j);
}

int run_train_toy(TrainToyOpts opt) {
  opt.config.seed = opt.seed;
  opt.config.validate();
  const ImbalanceProfile profile = resolve_profile(opt.profile);
  const auto dataset =
      generate_synthetic(opt.n, opt.dim, profile, opt.seed, opt.noise_std);
  const auto splits = split_dataset(dataset, opt.train_frac, opt.dev_frac);

  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);

  // Gold file for the held-out test split.
  std::vector<GoldRecord> gold_test;
  for (std::size_t i = 0; i < static_cast<std::size_t>(splits.test.n); ++i)
    gold_test.push_back({splits.test.ids[i], "", splits.test.labels[i]});
  const fs::path gold_path = dir / "gold_test.tsv";
  save_gold(gold_path, gold_test);

  CalibrationTable calibration;
  json results = json::object();
  std::vector<fs::path> outputs{gold_path};

  for (const auto& kind_name : opt.heads) {
    const LossKind kind = loss_kind_from_string(kind_name);
    const std::string model_id = "toy-" + kind_name;
    const TrainResult trained = train(kind, splits.train, splits.dev, opt.config);

    if (kind == LossKind::mse) {
      std::vector<std::pair<double, int>> dev_scores;
      for (std::size_t i = 0; i < static_cast<std::size_t>(splits.dev.n); ++i)
        dev_scores.emplace_back(
            trained.head.regression_score(splits.dev.feature_row(i)),
            splits.dev.labels[i]);
      calibration.emplace(model_id, calibrate_regression(model_id, dev_scores));
    }

    const auto emitted = emit_heads(trained.head, splits.test, model_id);
    const fs::path head_path = dir / ("heads_" + kind_name + ".jsonl");
    save_heads(head_path, emitted);
    outputs.push_back(head_path);

    // Test QWK of this head alone, decoded the same way the pipeline will.
    std::vector<EvalPair> pairs;
    for (std::size_t i = 0; i < emitted.size(); ++i) {
      const auto d = decode(emitted[i], calibration);
      pairs.push_back({splits.test.labels[i], d.level});
    }

    json curve = json::array();
    for (const auto& e : trained.curve)
      curve.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"dev_loss", e.dev_loss}});
    results[kind_name] = {{"model_id", model_id},
                          {"best_epoch", trained.best_epoch},
                          {"best_dev_loss", trained.best_dev_loss},
                          {"stopped_early", trained.stopped_early},
                          {"test_qwk", qwk(pairs)},
                          {"curve", curve}};
  }

  const fs::path cal_path = dir / "calibration.json";
  save_calibration(cal_path, calibration);
  outputs.push_back(cal_path);

  RunManifest manifest;
  manifest.subcommand = "train-toy";
  manifest.config = {{"n", opt.n},
                     {"dim", opt.dim},
                     {"profile", opt.profile},
                     {"noise_std", opt.noise_std},
                     {"seed", opt.seed},
                     {"heads", opt.heads},
                     {"train_frac", opt.train_frac},
                     {"dev_frac", opt.dev_frac},
                     {"train", to_json(opt.config)}};
  manifest.config["results"] = results;
  manifest.outputs = outputs;
  write_manifest(dir / "manifest.json", manifest);

  std::cout << "trained " << opt.heads.size() << " heads on " << opt.n
            << " synthetic items into " << opt.out_dir << '\n';
  for (const auto& [name, r] : results.items())
    std::cout << "  " << name << ": test qwk "
              << fmt4(r.at("test_qwk").get<double>()) << ", best epoch "
              << r.at("best_epoch").get<int>() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOpts {
  std::string in;
};

int run_report(const ReportOpts& opt) {
  auto in = detail::open_input(opt.in);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(opt.in, 0, e.what());
  }

  if (j.contains("qwk")) {
    const EvalReport r = eval_report_from_json(j);
    std::cout << "evaluation report (" << opt.in << ")\n"
              << "  n         " << r.n << '\n'
              << "  qwk       " << fmt4(r.qwk) << '\n'
              << "  acc19     " << fmt4(r.acc19) << '\n'
              << "  acc7      " << fmt4(r.acc7) << '\n'
              << "  acc5      " << fmt4(r.acc5) << '\n'
              << "  acc3      " << fmt4(r.acc3) << '\n'
              << "  adj_acc   " << fmt4(r.adjacent_acc) << '\n'
              << "  avg_dist  " << fmt4(r.avg_dist) << '\n'
              << "  gold coverage:";
    for (int lv = 1; lv <= kNumLevels; ++lv)
      if (r.gold_histogram[lv - 1] == 0) std::cout << ' ' << lv;
    std::cout << " <- levels with no gold\n  pred coverage:";
    for (int lv = 1; lv <= kNumLevels; ++lv)
      if (r.pred_histogram[lv - 1] == 0) std::cout << ' ' << lv;
    std::cout << " <- levels never predicted\n";
    return 0;
  }
  if (j.contains("counts") && j.contains("zero_coverage")) {
    std::cout << "skew report (" << opt.in << ")\n  total " << j.at("total")
              << "\n  level counts:\n";
    for (int lv = 1; lv <= kNumLevels; ++lv) {
      const auto key = std::to_string(lv);
      std::cout << "    " << (lv < 10 ? " " : "") << lv << ": "
                << j.at("counts").at(key).get<std::int64_t>() << '\n';
    }
    std::cout << "  zero coverage:";
    for (const auto& lv : j.at("zero_coverage")) std::cout << ' ' << lv;
    std::cout << "\n  over-represented:";
    for (const auto& lv : j.at("over_represented")) std::cout << ' ' << lv;
    std::cout << '\n';
    return 0;
  }
  throw ValidationError(opt.in + ": not an evaluation or skew report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordinal readability prediction pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "config file supplying defaults for any option");

  WeightsOpts weights_opts;
  auto* weights_cmd =
      app.add_subcommand("weights", "inverse-frequency class weights");
  weights_cmd->add_option("--gold", weights_opts.gold, "gold TSV")->required();
  weights_cmd->add_option("--scale", weights_opts.scale, "barec or samer");
  weights_cmd->add_option("--out", weights_opts.out, "weights JSON")->required();

  ScaleOpts scale_opts;
  auto* scale_cmd =
      app.add_subcommand("scale", "min-max label scaling between scales");
  scale_cmd->add_option("--in", scale_opts.in, "label TSV")->required();
  scale_cmd->add_option("--from", scale_opts.from, "source scale");
  scale_cmd->add_option("--to", scale_opts.to, "destination scale");
  scale_cmd->add_option("--out", scale_opts.out, "output TSV")->required();
  scale_cmd->add_flag("--round", scale_opts.round, "snap to integer levels");

  RelabelOpts relabel_opts;
  auto* relabel_cmd = app.add_subcommand(
      "relabel", "replace source-scale labels with scorer predictions");
  relabel_cmd->add_option("--source", relabel_opts.source, "source corpus TSV")
      ->required();
  relabel_cmd->add_option("--pred", relabel_opts.pred, "scorer prediction TSV")
      ->required();
  relabel_cmd->add_option("--out", relabel_opts.out, "merged TSV")->required();
  relabel_cmd->add_option("--margin", relabel_opts.margin,
                          "roundtrip pass margin");

  DecodeOpts decode_opts;
  auto* decode_cmd =
      app.add_subcommand("decode", "decode head outputs to predictions");
  decode_cmd->add_option("--heads", decode_opts.heads.heads, "head JSONL files")
      ->required();
  decode_cmd->add_option("--calibration", decode_opts.heads.calibration,
                         "calibration JSON");
  decode_cmd->add_option("--gold", decode_opts.heads.gold,
                         "gold TSV to fit missing calibrations");
  decode_cmd->add_option("--emit-calibration",
                         decode_opts.heads.emit_calibration,
                         "write fitted calibrations here");
  decode_cmd->add_option("--out", decode_opts.out, "decoded TSV")->required();

  FuseOpts fuse_opts;
  auto* fuse_cmd = app.add_subcommand("fuse", "ensemble per-model predictions");
  fuse_cmd->add_option("--heads", fuse_opts.heads.heads, "head JSONL files")
      ->required();
  fuse_cmd->add_option("--calibration", fuse_opts.heads.calibration,
                       "calibration JSON");
  fuse_cmd->add_option("--gold", fuse_opts.heads.gold,
                       "gold TSV to fit missing calibrations");
  fuse_cmd->add_option("--strategy", fuse_opts.strategy, "weighted or pair");
  fuse_cmd->add_flag("--use-raw", fuse_opts.use_raw,
                     "average raw scores instead of integer levels");
  fuse_cmd->add_flag("--pair-rule", fuse_opts.pair_rule,
                     "shorthand for --strategy pair");
  fuse_cmd->add_option("--out", fuse_opts.out, "fused TSV")->required();

  AggregateOpts agg_opts;
  auto* agg_cmd =
      app.add_subcommand("aggregate", "sentence to document aggregation");
  agg_cmd->add_option("--in", agg_opts.in, "fused TSV")->required();
  agg_cmd->add_option("--strategy", agg_opts.strategy,
                      "max, mean-ceil or mean-floor");
  agg_cmd->add_option("--theta", agg_opts.theta,
                      "borderline fractional-part cutoff");
  agg_cmd->add_option("--override", agg_opts.override_levels,
                      "override levels, e.g. 16,17 (none to disable)");
  agg_cmd->add_option("--per-model", agg_opts.per_model,
                      "per-model prediction TSVs for the override rule");
  agg_cmd->add_option("--out", agg_opts.out, "document TSV")->required();
  agg_cmd->add_option("--skew-out", agg_opts.skew_out, "skew report JSON");
  agg_cmd->add_option("--skew-multiple", agg_opts.skew_multiple,
                      "over-representation multiple");

  EvaluateOpts eval_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "ordinal metric suite");
  eval_cmd->add_option("--gold", eval_opts.gold, "gold TSV")->required();
  eval_cmd->add_option("--pred", eval_opts.pred, "prediction TSV")->required();
  eval_cmd->add_option("--collapse", eval_opts.collapse_dir,
                       "directory with collapse_{7,5,3}.tsv");
  eval_cmd->add_option("--json", eval_opts.json_out, "report JSON path");
  eval_cmd->add_option("--scale", eval_opts.scale, "gold scale");

  TrainToyOpts toy_opts;
  auto* toy_cmd = app.add_subcommand(
      "train-toy", "train linear heads on synthetic data and emit predictions");
  toy_cmd->add_option("--out-dir", toy_opts.out_dir, "output directory")
      ->required();
  toy_cmd->add_option("--n", toy_opts.n, "dataset size");
  toy_cmd->add_option("--dim", toy_opts.dim, "feature dimension");
  toy_cmd->add_option("--profile", toy_opts.profile,
                      "uniform, two-peak or a JSON file");
  toy_cmd->add_option("--noise-std", toy_opts.noise_std, "feature noise");
  toy_cmd->add_option("--seed", toy_opts.seed, "RNG seed");
  toy_cmd->add_option("--heads", toy_opts.heads, "head kinds to train")
      ->delimiter(',');
  toy_cmd->add_option("--epochs", toy_opts.config.epochs, "training epochs");
  toy_cmd->add_option("--batch-size", toy_opts.config.batch_size, "batch size");
  toy_cmd->add_option("--base-lr", toy_opts.config.base_learning_rate,
                      "base learning rate");
  toy_cmd->add_option("--lr-multiplier", toy_opts.config.lr_multiplier,
                      "toy-scale learning rate multiplier");
  toy_cmd->add_option("--patience", toy_opts.config.patience,
                      "early stopping patience");
  toy_cmd->add_option("--weight-decay", toy_opts.config.weight_decay,
                      "decoupled weight decay");
  toy_cmd->add_flag("--class-weights,!--no-class-weights",
                    toy_opts.config.use_class_weights,
                    "weight losses by inverse class frequency");
  toy_cmd->add_option("--train-frac", toy_opts.train_frac, "train fraction");
  toy_cmd->add_option("--dev-frac", toy_opts.dev_frac, "dev fraction");

  ReportOpts report_opts;
  auto* report_cmd =
      app.add_subcommand("report", "pretty-print a report JSON");
  report_cmd->add_option("--in", report_opts.in, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (weights_cmd->parsed()) return run_weights(weights_opts);
    if (scale_cmd->parsed()) return run_scale(scale_opts);
    if (relabel_cmd->parsed()) return run_relabel(relabel_opts);
    if (decode_cmd->parsed()) return run_decode(decode_opts);
    if (fuse_cmd->parsed()) return run_fuse(fuse_opts);
    if (agg_cmd->parsed()) return run_aggregate(agg_opts);
    if (eval_cmd->parsed()) return run_evaluate(eval_opts);
    if (toy_cmd->parsed()) return run_train_toy(toy_opts);
    if (report_cmd->parsed()) return run_report(report_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
