#include "wavegraph/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wavegraph/circuit.hpp"
#include "wavegraph/error.hpp"
#include "wavegraph/evaluation.hpp"
#include "wavegraph/gradcheck.hpp"
#include "wavegraph/io.hpp"
#include "wavegraph/training.hpp"

namespace wavegraph {

std::pair<std::size_t, std::size_t> parse_size_range(const std::string& text) {
  auto number = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw InvalidInput("bad size range '" + text + "' (expected a..b)");
    }
    return static_cast<std::size_t>(std::stoull(s));
  };
  const auto dots = text.find("..");
  const std::size_t lo = number(text.substr(0, dots));
  const std::size_t hi = dots == std::string::npos ? lo : number(text.substr(dots + 2));
  if (lo < 2 || hi < lo) throw InvalidInput("size range '" + text + "' must satisfy 2 <= a <= b");
  return {lo, hi};
}

namespace {

constexpr std::size_t kCircuitTrainBatches = 500;
constexpr std::size_t kCircuitTestCount = 100;
constexpr std::size_t kDefaultPathCount = 1000;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("WAVEGRAPH_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw InvalidInput("WAVEGRAPH_SEED must be an unsigned integer");
    return v;
  }
  return 0;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// ------------------------------------------------------------------ gen

struct GenArgs {
  std::string task = "paths";
  std::string generator = "dfs";
  std::string sizes;
  std::optional<std::size_t> count;
  std::size_t batches = kCircuitTrainBatches;
  bool test = false;
  std::size_t min_paths = 1;
  std::size_t max_paths = kMaxPathCount;
  std::optional<double> delete_prob;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  GenParams params;
  params.task = parse_task(a.task);
  params.generator = parse_tree_generator(a.generator);
  params.min_paths = a.min_paths;
  params.max_paths = a.max_paths;
  if (a.delete_prob) {
    if (!(*a.delete_prob >= 0.0 && *a.delete_prob < 1.0)) throw InvalidInput("--delete-prob must be in [0, 1)");
    params.delete_prob = *a.delete_prob;
  }
  const auto [lo, hi] = parse_size_range(a.sizes);
  const std::uint64_t seed = resolve_seed(a.seed);
  std::vector<Example> data;
  for (std::size_t size = lo; size <= hi; ++size) {
    std::size_t count = kDefaultPathCount;
    if (a.count) {
      count = *a.count;
    } else if (params.task == TaskKind::circuits) {
      count = a.test ? kCircuitTestCount : a.batches * circuit_batch_size(size);
    }
    auto part = generate_dataset(params, size, size, count, seed);
    for (auto& ex : part) data.push_back(std::move(ex));
  }
  write_dataset(a.out, data);
  out << "wrote " << data.size() << " " << task_name(params.task) << " examples (sizes " << lo << ".." << hi
      << ") to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::optional<std::string> task;
  std::string model = "wave";
  std::optional<std::size_t> passes;
  std::optional<std::size_t> state_size;
  std::optional<std::size_t> edge_state_size;
  std::optional<std::string> cell;
  std::optional<std::size_t> iters;
  std::optional<double> lr;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> interval;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out;
  std::optional<std::string> log;
};

std::string metrics_csv(const std::vector<LogRow>& log) {
  std::string s = "iteration,loss,bin,lr\n";
  for (const auto& r : log) {
    s += std::to_string(r.iteration) + ',' + fmt("%.9g", r.loss) + ',' + std::to_string(r.bin) + ',' +
         fmt("%.6g", r.lr) + '\n';
  }
  return s;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto data = read_dataset(std::filesystem::path(a.data));
  if (data.empty()) throw InvalidInput("dataset " + a.data + " is empty");
  const TaskKind task = a.task ? parse_task(*a.task) : data.front().task;
  for (const auto& ex : data) {
    if (ex.task != task) {
      throw InvalidInput("dataset holds " + std::string(task_name(ex.task)) + " examples but the task is " +
                         std::string(task_name(task)));
    }
  }
  TrainConfig config = default_train_config(task);
  config.model.kind = parse_model_kind(a.model);
  if (config.model.kind == ModelKind::gconv) {
    // Graph convolution defaults: node state 15 / edge state 5 on circuits, 5 / 5 elsewhere.
    config.model.state_size = task == TaskKind::circuits ? 15 : 5;
    config.model.edge_state_size = 5;
    config.model.passes = 5;
  }
  if (a.passes) config.model.passes = *a.passes;
  if (a.state_size) config.model.state_size = *a.state_size;
  if (a.edge_state_size) config.model.edge_state_size = *a.edge_state_size;
  if (a.cell) config.model.cell = parse_cell_kind(*a.cell);
  if (a.iters) config.iterations = *a.iters;
  if (a.lr) config.lr = *a.lr;
  if (a.batch) {
    config.batch_size = *a.batch;
    config.circuit_batch_table = false;
  }
  if (a.interval) config.curriculum_interval = *a.interval;
  config.seed = resolve_seed(a.seed);
  config.model.seed = config.seed;

  const std::filesystem::path ckpt(a.out);
  const std::filesystem::path log_path = a.log ? std::filesystem::path(*a.log) : std::filesystem::path(a.out + ".metrics.csv");
  const auto save = [&](const GraphModel& m, std::size_t it, const Rng& rng) {
    save_checkpoint(ckpt, m, rng.state(), it);
  };
  const auto result = train(config, data, save);
  write_text_file(log_path, metrics_csv(result.log));
  out << model_kind_name(config.model.kind) << " on " << task_name(task) << ": " << result.model->parameter_count()
      << " parameters, " << config.iterations << " iterations";
  if (!result.log.empty()) out << ", final loss " << fmt("%.6g", result.log.back().loss);
  out << "\ncheckpoint " << ckpt.string() << ", metrics " << log_path.string() << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string model_file;
  std::string data;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto ckpt = read_checkpoint(a.model_file);
  const auto model = load_model(ckpt);
  const auto data = read_dataset(std::filesystem::path(a.data));
  for (const auto& ex : data) {
    if (ex.graph.node_features().width() != ckpt.spec.node_feature_width ||
        ex.graph.edge_features().width() != ckpt.spec.edge_feature_width) {
      throw DataError("dataset feature widths (" + std::to_string(ex.graph.node_features().width()) + ", " +
                      std::to_string(ex.graph.edge_features().width()) + ") do not match the model (" +
                      std::to_string(ckpt.spec.node_feature_width) + ", " +
                      std::to_string(ckpt.spec.edge_feature_width) + ")");
    }
  }
  const auto report = evaluate(*model, data, ckpt.spec.seed);
  emit_report(report, a.out);
  out << "parameters: " << report.params << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-6s %5s %6s %-16s %s\n", "task", "gen", "size", "n", "metric", "value");
  out << line;
  const std::string csv = format_report(report);
  std::istringstream rows(csv);
  std::string row;
  std::getline(rows, row);  // header
  while (std::getline(rows, row)) {
    std::vector<std::string> cols;
    std::stringstream ss(row);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    std::snprintf(line, sizeof line, "%-10s %-6s %5s %6s %-16s %s\n", cols[0].c_str(), cols[1].c_str(),
                  cols[2].c_str(), cols[3].c_str(), cols[4].c_str(), cols[5].c_str());
    out << line;
  }
  return kExitOk;
}

// --------------------------------------------------------------- oracle

int cmd_oracle(const std::string& netlist_path, const std::optional<std::string>& out_path, std::ostream& out) {
  const auto net = parse_netlist(read_text_file(netlist_path));
  const auto v = solve_dc(net);
  std::string csv = "node,voltage\n";
  for (std::size_t u = 0; u < v.size(); ++u) {
    const std::string value = fmt("%.12g", v[u]);
    out << "node " << u << ": " << value << " V\n";
    csv += std::to_string(u) + ',' + value + '\n';
  }
  out << "max KCL residual: " << fmt("%.3g", kcl_residual(net, v)) << " A\n";
  if (out_path) write_text_file(*out_path, csv);
  return kExitOk;
}

// ------------------------------------------------------------ gradcheck

struct GradArgs {
  std::string model = "wave";
  std::optional<std::string> checkpoint;
  std::size_t state_size = 4;
  std::size_t passes = 1;
  std::size_t grid = 3;
  double tolerance = 1e-4;
  std::optional<std::uint64_t> seed;
};

int cmd_gradcheck(const GradArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.seed);
  std::unique_ptr<GraphModel> model;
  if (a.checkpoint) {
    model = load_model(read_checkpoint(*a.checkpoint));
  } else {
    ModelSpec spec;
    spec.kind = parse_model_kind(a.model);
    spec.state_size = a.state_size;
    spec.edge_state_size = a.state_size;
    spec.passes = a.passes;
    spec.seed = seed;
    model = make_model(spec);
  }
  const ModelSpec& spec = model->spec();
  Rng rng(derive_seed(seed, 0x6772616463));
  UGraph g = grid_graph(a.grid, a.grid);
  g.node_features() = FeatureTable(g.node_count(), spec.node_feature_width);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (auto& x : g.node_features().row(u)) x = rng.uniform(-1.0, 1.0);
  }
  g.edge_features() = FeatureTable(g.edge_count(), spec.edge_feature_width);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    for (auto& x : g.edge_features().row(e)) x = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> target(g.node_count());
  for (auto& t : target) t = spec.head == HeadKind::sigmoid ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.uniform(-5, 5);
  const Tensor y({g.node_count(), 1}, std::move(target));
  const Tensor mask = Tensor::filled({g.node_count(), 1}, 1.0);
  const auto sched = centered_schedule(g);
  const auto batch = make_batch(g, sched, a.grid);
  GradCheckOptions options;
  options.tolerance = a.tolerance;
  const auto report = grad_check(
      [&] {
        const Tensor p = model->forward(batch);
        return spec.head == HeadKind::sigmoid ? bce_loss(p, y, mask) : mse_loss(p, y, mask);
      },
      model->parameters(), options);
  for (const auto& e : report.entries) out << e.name << " " << fmt("%.3e", e.max_rel_error) << "\n";
  out << "max relative error " << fmt("%.3e", report.max_rel_error) << " (tolerance " << fmt("%.1e", a.tolerance)
      << "): " << (report.passed ? "ok" : "FAILED") << "\n";
  return report.passed ? kExitOk : kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wave networks and graph convolution on path, maze and circuit tasks", "wavegraph"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a dataset (JSON lines)");
  g->add_option("task", gen.task, "paths | multipath | maze-image | circuits")->required();
  g->add_option("--generator", gen.generator, "spanning-tree generator: dfs | prim");
  g->add_option("--size-range", gen.sizes, "grid sizes a..b")->required();
  g->add_option("--count", gen.count, "examples per size");
  g->add_option("--batches", gen.batches, "circuits: training batches per size");
  g->add_flag("--test", gen.test, "circuits: test split (100 examples per size)");
  g->add_option("--min-paths", gen.min_paths, "multipath: minimum path count");
  g->add_option("--max-paths", gen.max_paths, "multipath: maximum path count");
  g->add_option("--delete-prob", gen.delete_prob, "circuits: edge deletion probability");
  g->add_option("--seed", gen.seed, "seed (default: WAVEGRAPH_SEED or 0)");
  g->add_option("--out", gen.out, "output file")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train a model");
  t->add_option("--task", tr.task, "task (default: from the dataset)");
  t->add_option("--model", tr.model, "wave | wave-dynamic | gconv");
  t->add_option("--passes", tr.passes, "sweeps or convolution passes");
  t->add_option("--state-size", tr.state_size, "node state size");
  t->add_option("--edge-state-size", tr.edge_state_size, "graph convolution edge state size");
  t->add_option("--cell", tr.cell, "dense-tanh | minigru");
  t->add_option("--iters", tr.iters, "iterations");
  t->add_option("--lr", tr.lr, "learning rate");
  t->add_option("--batch", tr.batch, "batch size (overrides the circuit size table)");
  t->add_option("--interval", tr.interval, "curriculum update interval");
  t->add_option("--seed", tr.seed, "seed (default: WAVEGRAPH_SEED or 0)");
  t->add_option("--data", tr.data, "training dataset")->required();
  t->add_option("--out", tr.out, "checkpoint file")->required();
  t->add_option("--log", tr.log, "metrics CSV (default: <out>.metrics.csv)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  e->add_option("--model-file", ev.model_file, "checkpoint")->required();
  e->add_option("--data", ev.data, "dataset")->required();
  e->add_option("--out", ev.out, "report CSV")->required();

  std::string netlist;
  std::optional<std::string> oracle_out;
  auto* o = app.add_subcommand("oracle", "solve a netlist for DC node voltages");
  o->add_option("--netlist", netlist, "netlist JSON")->required();
  o->add_option("--out", oracle_out, "voltages CSV");

  GradArgs gc;
  auto* c = app.add_subcommand("gradcheck", "compare backward against finite differences");
  c->add_option("--model", gc.model, "wave | wave-dynamic | gconv");
  c->add_option("--checkpoint", gc.checkpoint, "check a saved model instead");
  c->add_option("--state-size", gc.state_size, "state size of a fresh model");
  c->add_option("--passes", gc.passes, "passes of a fresh model");
  c->add_option("--grid", gc.grid, "grid side of the test graph");
  c->add_option("--tolerance", gc.tolerance, "maximum relative error");
  c->add_option("--seed", gc.seed, "seed (default: WAVEGRAPH_SEED or 0)");

  std::vector<std::string> argv_store{"wavegraph"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (o->parsed()) return cmd_oracle(netlist, oracle_out, out);
    if (c->parsed()) return cmd_gradcheck(gc, out);
  } catch (const InvalidInput& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << "\n";
    return kExitData;
  } catch (const NumericError& ex) {
    err << "numeric error: " << ex.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace wavegraph
