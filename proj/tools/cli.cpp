/*
 *  Copyright 2026 The poirec Authors. All Rights Reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */
#include "cli.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <optional>

#include "json.hpp"

#include "poirec/errors.hpp"
#include "poirec/experiments.hpp"
#include "poirec/format.hpp"
#include "poirec/pipeline.hpp"
#include "poirec/synthetic.hpp"

namespace poirec::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "poirec_out";

  std::string input;

  std::string user;
  double lat = 0.0;
  double lon = 0.0;
  std::int64_t time = 0;
  std::size_t k = 10;

  std::vector<std::size_t> ks;
  std::vector<int> hours;
  std::vector<std::size_t> dims;
  std::vector<double> fractions;

  SyntheticSpec synth;
};

PipelineConfig effective_config(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (o.seed) cfg.apply_seed(*o.seed);
  validate(cfg);
  return cfg;
}

fs::path out_path(const Options& o, const std::string& name) { return fs::path(o.out_dir) / name; }

std::vector<CheckIn> read_stage_csv(const Options& o, const std::string& name) {
  const auto path = out_path(o, name);
  if (!fs::exists(path)) throw DataError(path.string() + " not found; run the earlier stages first");
  return parse_checkins(path).records;
}

TrainedPipeline load_trained(const Options& o, const PipelineConfig& cfg, std::span<const CheckIn> train) {
  auto regions = RegionModel::load(out_path(o, "regions.json"));
  auto graph = KnowledgeGraph::load(out_path(o, "graph"));
  auto [transr, _] = TransRModel::load(out_path(o, "transr.bin"));
  auto homes = home_table(train, graph);
  auto pois = poi_coordinates(train, graph);
  auto candidates = load_candidates(out_path(o, "candidates.tsv"), graph);
  FactorTraining factors;
  factors.model = FactorModel::load(out_path(o, "factors.bin"));
  auto visited = visited_pois(train, graph);
  return {cfg,          std::move(regions), std::move(graph),      std::move(transr), {},
          std::move(homes), std::move(pois), std::move(candidates), std::move(factors), std::move(visited)};
}

SplitDataset load_split(const Options& o) {
  SplitDataset s;
  s.train = read_stage_csv(o, "train.csv");
  s.test = read_stage_csv(o, "test.csv");
  return s;
}

void ingest(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto parsed = parse_checkins(o.input, cfg.data.csv);
  const auto split = split_by_date(parsed.records, cfg.data.train_fraction);
  fs::create_directories(o.out_dir);
  write_checkins(out_path(o, "train.csv"), split.train);
  write_checkins(out_path(o, "test.csv"), split.test);
  nlohmann::json summary{{"records", parsed.records.size()},
                         {"rejected", parsed.rejected},
                         {"train", split.train.size()},
                         {"test", split.test.size()},
                         {"cutoff_timestamp", split.cutoff_timestamp}};
  std::ofstream(out_path(o, "split.json")) << summary.dump(2) << '\n';
  out << "ingested " << parsed.records.size() << " records (" << parsed.rejected << " rejected): " << split.train.size()
      << " train, " << split.test.size() << " test\n";
}

void build_graph_stage(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto train = read_stage_csv(o, "train.csv");
  const auto regions = fit_regions(train, cfg);
  const auto graph = build_graph(train, TimeSlotSpec::from_hours(cfg.graph.slot_hours), regions,
                                 cfg.graph.use_category, cfg.data.tz_offset);
  regions.save(out_path(o, "regions.json"));
  graph.save(out_path(o, "graph"));
  out << "graph: " << graph.user_count() << " users, " << graph.poi_count() << " POIs, " << graph.relations().size()
      << " relations, " << graph.positives().size() << " triples\n";
}

void train_embed(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto graph = KnowledgeGraph::load(out_path(o, "graph"));
  const auto result = train(graph, cfg.transr);
  result.model.save(out_path(o, "transr.bin"), cfg.transr);
  write_loss_trace(out_path(o, "loss_trace.csv"), result.loss_trace);
  out << "trained " << result.loss_trace.size() << " epochs";
  if (!result.loss_trace.empty()) out << ", final mean loss " << format_double(result.loss_trace.back());
  out << '\n';
}

void extract_stage(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto train = read_stage_csv(o, "train.csv");
  const auto graph = KnowledgeGraph::load(out_path(o, "graph"));
  const auto [model, _] = TransRModel::load(out_path(o, "transr.bin"));
  const auto set = extract(model, graph, home_table(train, graph), poi_coordinates(train, graph), cfg.extraction);
  save_candidates(out_path(o, "candidates.tsv"), set, graph);
  out << "candidates: " << set.pairs.size() << " pairs, " << set.users.size() << " users, " << set.pois.size()
      << " POIs\n";
}

void train_mf_stage(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto train = read_stage_csv(o, "train.csv");
  const auto graph = KnowledgeGraph::load(out_path(o, "graph"));
  const auto candidates = load_candidates(out_path(o, "candidates.tsv"), graph);
  const auto fitted = train_factor_model(train, graph, candidates, cfg.mf);
  fitted.model.save(out_path(o, "factors.bin"));
  std::ofstream trace(out_path(o, "mf_trace.csv"), std::ios::trunc);
  trace << "epoch,st_objective,pref_objective\n";
  trace << 0 << ',' << format_double(fitted.st.initial_objective) << ','
        << format_double(fitted.pref.initial_objective) << '\n';
  for (std::size_t e = 0; e < fitted.st.objective_trace.size(); ++e)
    trace << e + 1 << ',' << format_double(fitted.st.objective_trace[e]) << ','
          << format_double(fitted.pref.objective_trace[e]) << '\n';
  out << "factorized: spatio-temporal objective " << format_double(fitted.st.objective_trace.back())
      << ", preference objective " << format_double(fitted.pref.objective_trace.back()) << '\n';
}

void recommend_stage(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto train = read_stage_csv(o, "train.csv");
  const auto trained = load_trained(o, cfg, train);
  const Query q{o.user, {o.lat, o.lon}, o.time};
  const auto list = recommend_topk(q, o.k, trained.models(), cfg.recommender());
  std::ofstream tsv(out_path(o, "recommendations.tsv"), std::ios::trunc);
  tsv << "rank\tpoi_key\tscore\n";
  out << "rank\tpoi_key\tscore\n";
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    const auto line = std::to_string(i + 1) + '\t' + list.items[i].poi_key + '\t' + format_double(list.items[i].score);
    tsv << line << '\n';
    out << line << '\n';
  }
}

void evaluate_stage(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto split = load_split(o);
  const auto trained = load_trained(o, cfg, split.train);
  const auto ks = o.ks.empty() ? cfg.eval_ks : o.ks;
  for (auto k : ks)
    if (k == 0) throw ConfigError("--k entries must be positive");
  const auto cases = evaluation_cases(trained, split.train, split.test, *std::max_element(ks.begin(), ks.end()));
  std::vector<MetricsReport> reports;
  for (auto k : ks) reports.push_back(evaluate_at_k(cases, k));
  write_metrics_csv(out_path(o, "metrics.csv"), reports);
  write_per_user_csv(out_path(o, "per_user.csv"), cases, reports);
  out << "evaluated " << cases.size() << " users\n";
  for (const auto& r : reports)
    out << "k=" << r.k << " prec=" << format_fixed(r.precision, 4) << " rec=" << format_fixed(r.recall, 4)
        << " f1=" << format_fixed(r.f1, 4) << '\n';
}

void sweep_timeslot(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto hours = o.hours.empty() ? cfg.experiments.timeslot_hours : o.hours;
  const auto rows = run_timeslot_sweep(load_split(o), hours, cfg);
  write_sweep_csv(out_path(o, "sweep_timeslot.csv"), "hours", rows);
  out << "wrote " << rows.size() << " rows to " << out_path(o, "sweep_timeslot.csv").string() << '\n';
}

void sweep_dim(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto dims = o.dims.empty() ? cfg.experiments.dims : o.dims;
  const auto rows = run_dim_sweep(load_split(o), dims, cfg);
  write_sweep_csv(out_path(o, "sweep_dim.csv"), "dim", rows);
  out << "wrote " << rows.size() << " rows to " << out_path(o, "sweep_dim.csv").string() << '\n';
}

void sparsity(const Options& o, std::ostream& out) {
  const auto cfg = effective_config(o);
  const auto fractions = o.fractions.empty() ? cfg.experiments.sparsity_fractions : o.fractions;
  const auto rows = run_sparsity_experiment(load_split(o), fractions, cfg, cfg.seed);
  write_sparsity_csv(out_path(o, "sparsity.csv"), rows);
  out << "wrote " << rows.size() << " rows to " << out_path(o, "sparsity.csv").string() << '\n';
}

void synth(Options o, std::ostream& out) {
  if (o.seed) o.synth.seed = *o.seed;
  const auto data = generate_synthetic(o.synth);
  fs::create_directories(o.out_dir);
  write_checkins(out_path(o, "checkins.csv"), data.checkins);
  write_planted(out_path(o, "planted.json"), data);
  out << "generated " << data.checkins.size() << " check-ins\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph POI recommender"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON config covering every stage")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Seed for every stochastic stage");
  app.add_option("--out-dir", o.out_dir, "Directory for stage artifacts")->capture_default_str();

  auto* ingest_cmd = app.add_subcommand("ingest", "Parse check-ins and split them by date");
  ingest_cmd->add_option("--input", o.input, "Check-in CSV")->required();
  auto* graph_cmd = app.add_subcommand("build-graph", "Fit regions and build the knowledge graph");
  auto* embed_cmd = app.add_subcommand("train-embed", "Train the TransR embedding");
  auto* extract_cmd = app.add_subcommand("extract", "Extract candidate users and POIs");
  auto* mf_cmd = app.add_subcommand("train-mf", "Fit both factorizations");
  auto* rec_cmd = app.add_subcommand("recommend", "Top-k POIs for one query");
  rec_cmd->add_option("--user", o.user, "User key")->required();
  rec_cmd->add_option("--lat", o.lat, "Current latitude")->required();
  rec_cmd->add_option("--lon", o.lon, "Current longitude")->required();
  rec_cmd->add_option("--time", o.time, "Unix timestamp")->required();
  rec_cmd->add_option("--k", o.k, "List length")->capture_default_str();
  auto* eval_cmd = app.add_subcommand("evaluate", "Prec/Rec/F1 at each cutoff on the test split");
  eval_cmd->add_option("--k", o.ks, "Cutoffs, comma separated")->delimiter(',');
  auto* slot_cmd = app.add_subcommand("sweep-timeslot", "Retrain per slot length");
  slot_cmd->add_option("--hours", o.hours, "Slot lengths, comma separated")->delimiter(',');
  auto* dim_cmd = app.add_subcommand("sweep-dim", "Retrain per embedding dimensionality");
  dim_cmd->add_option("--dims", o.dims, "Dimensions, comma separated")->delimiter(',');
  auto* sparse_cmd = app.add_subcommand("sparsity", "Retrain on thinned training data");
  sparse_cmd->add_option("--fractions", o.fractions, "Removed fractions, comma separated")->delimiter(',');
  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted synthetic check-in log");
  synth_cmd->add_option("--users", o.synth.users)->capture_default_str();
  synth_cmd->add_option("--pois", o.synth.pois)->capture_default_str();
  synth_cmd->add_option("--regions", o.synth.regions)->capture_default_str();
  synth_cmd->add_option("--slots", o.synth.slots)->capture_default_str();
  synth_cmd->add_option("--categories", o.synth.categories)->capture_default_str();
  synth_cmd->add_option("--checkins-per-user", o.synth.checkins_per_user)->capture_default_str();
  synth_cmd->add_option("--preferred", o.synth.preferred_per_user)->capture_default_str();
  synth_cmd->add_option("--strength", o.synth.strength)->capture_default_str();
  synth_cmd->add_option("--days", o.synth.days)->capture_default_str();

  std::vector<const char*> argv{"poirec"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest_cmd) ingest(o, out);
    else if (*graph_cmd) build_graph_stage(o, out);
    else if (*embed_cmd) train_embed(o, out);
    else if (*extract_cmd) extract_stage(o, out);
    else if (*mf_cmd) train_mf_stage(o, out);
    else if (*rec_cmd) recommend_stage(o, out);
    else if (*eval_cmd) evaluate_stage(o, out);
    else if (*slot_cmd) sweep_timeslot(o, out);
    else if (*dim_cmd) sweep_dim(o, out);
    else if (*sparse_cmd) sparsity(o, out);
    else if (*synth_cmd) synth(o, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 3;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace poirec::cli
