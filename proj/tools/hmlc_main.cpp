// hmlc: hierarchical multi-label classification experiments on feature-vector data.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmlc/dataset.hpp"
#include "hmlc/experiment.hpp"
#include "hmlc/inference.hpp"
#include "hmlc/metrics.hpp"
#include "hmlc/model.hpp"
#include "hmlc/rng.hpp"
#include "hmlc/taxonomy.hpp"
#include "hmlc/util.hpp"
#include "hmlc/verify.hpp"

namespace {

using namespace hmlc;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitMissingFile = 2;

std::string read_input(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    std::cerr << "missing file: " << path << "\n";
    std::exit(kExitMissingFile);
  }
  return util::read_file(path);
}

Taxonomy load_taxonomy(const std::string& path) {
  if (path.empty()) throw std::runtime_error("--taxonomy is required");
  return Taxonomy::parse(read_input(path));
}

Dataset load_dataset(const std::string& path) {
  if (path.empty()) throw std::runtime_error("--data is required");
  return read_dataset(read_input(path));
}

std::vector<double> parse_beta_list(const std::string& s) {
  std::vector<double> out;
  for (auto part : util::split(s, ',')) out.push_back(util::parse_double(util::trim(part)));
  return out;
}

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> out;
  for (auto part : util::split(s, ',')) out.push_back(util::parse_u64(util::trim(part)));
  return out;
}

std::vector<std::string> parse_name_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  for (auto part : util::split(s, ',')) out.emplace_back(util::trim(part));
  return out;
}

struct TrainFlags {
  int epochs = 30;
  int batch = 64;
  int hidden = 16;
  double lr = 1e-3;
  std::string optimizer = "adam";
  double rescale_floor = -1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "training epochs (per stage for hlup-finetune)");
    cmd->add_option("--batch", batch, "minibatch size");
    cmd->add_option("--hidden", hidden, "hidden units (0 = linear model)");
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--optimizer", optimizer, "adam or sgd");
    cmd->add_option("--rescale-floor", rescale_floor,
                    "floor for hlup-rescale (negative = derive from taxonomy depth)");
  }

  TrainConfig to_config(uint64_t seed) const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch = batch;
    cfg.hidden = hidden;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.rescale_floor = rescale_floor;
    if (optimizer == "adam") cfg.opt = TrainConfig::Opt::Adam;
    else if (optimizer == "sgd") cfg.opt = TrainConfig::Opt::SGD;
    else throw CLI::ValidationError("--optimizer must be adam or sgd");
    return cfg;
  }
};

std::vector<size_t> rows_for_split(const Dataset& ds, const std::string& name) {
  if (name == "train") return ds.split_indices(Split::Train);
  if (name == "val") return ds.split_indices(Split::Val);
  if (name == "test") return ds.split_indices(Split::Test);
  if (name == "all") {
    std::vector<size_t> all(ds.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  throw std::runtime_error("--split must be train, val, test or all");
}

int cmd_validate(const std::string& taxonomy_path, const std::string& data_path) {
  Taxonomy t = load_taxonomy(taxonomy_path);
  std::cout << "OK, k=" << t.size() << ", depth=" << t.max_depth()
            << ", leaves=" << t.leaves().size() << "\n";
  if (data_path.empty()) return kExitOk;
  Dataset ds = load_dataset(data_path);
  int violations = 0;
  if (ds.k != t.size()) {
    std::cerr << "dataset has " << ds.k << " label columns, taxonomy has " << t.size() << "\n";
    return kExitFailure;
  }
  for (int m = 0; m < t.size(); ++m)
    if (ds.label_names[m] != t.name(m)) {
      std::cerr << "label column " << m << " is '" << ds.label_names[m] << "', expected '"
                << t.name(m) << "'\n";
      return kExitFailure;
    }
  for (size_t i = 0; i < ds.size(); ++i)
    for (NodeId m : validate_labels(t, ds.row_labels(i))) {
      std::cerr << "row " << (i + 1) << " (id " << ds.ids[i] << "): positive '" << t.name(m)
                << "' under non-positive parent\n";
      ++violations;
    }
  if (violations > 0) {
    std::cerr << violations << " violation(s)\n";
    return kExitFailure;
  }
  std::cout << "dataset OK, n=" << ds.size() << ", d=" << ds.d << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical multi-label classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; command-line flags win");

  std::string taxonomy_path, data_path, out_dir = "out";
  uint64_t seed = 1;
  app.add_option("--taxonomy", taxonomy_path, "taxonomy edge-list file")->envname("HMLC_TAXONOMY");
  app.add_option("--data", data_path, "dataset CSV");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "validate a taxonomy and optionally a dataset");

  auto* generate = app.add_subcommand("generate", "generate a synthetic dataset");
  size_t gen_n = 1000;
  int gen_d = 20;
  std::string gen_out = "dataset.csv";
  generate->add_option("--n", gen_n, "instances");
  generate->add_option("--d", gen_d, "feature dimension");
  generate->add_option("--out-file", gen_out, "output CSV path");

  auto* del = app.add_subcommand("delete", "apply the incomplete-label deletion scheme");
  double beta = 0.0, ratio = 0.3;
  std::string exclude_csv, groups_csv, mid_name, root_name, del_out = "deleted.csv";
  del->add_option("--beta", beta, "base deletion probability in [0,1]")->required();
  del->add_option("--ratio", ratio, "coarser-level ratio (mid = ratio*beta, root = ratio^2*beta)");
  del->add_option("--exclude", exclude_csv, "comma-separated labels set Unknown unconditionally");
  del->add_option("--group-parents", groups_csv, "comma-separated finest-level parents");
  del->add_option("--mid-parent", mid_name, "mid-level parent");
  del->add_option("--root-parent", root_name, "root-level parent");
  del->add_option("--out-file", del_out, "output CSV path");

  auto* train_cmd = app.add_subcommand("train", "train one model variant");
  std::string model_name = "hlup-finetune";
  TrainFlags train_flags;
  train_cmd->add_option("--model", model_name, "br-leaf|br-all|hlcp|hlup|hlup-max|hlup-rescale|hlup-finetune");
  train_flags.attach(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  std::string ckpt_path, split_name = "test", eval_exclude, condition_name;
  int ci_rounds = 5000;
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--split", split_name, "train|val|test|all");
  eval_cmd->add_option("--exclude", eval_exclude, "labels dropped from the report");
  eval_cmd->add_option("--condition", condition_name,
                       "node for the conditional leaf means (default: taxonomy root)");
  eval_cmd->add_option("--ci-rounds", ci_rounds, "bootstrap rounds (0 disables CIs)");

  auto* losscheck = app.add_subcommand("losscheck", "randomized loss/gradient self-checks");
  int trials = 200, cap = kDefaultPowersetCap;
  losscheck->add_option("--trials", trials, "random trials");
  losscheck->add_option("--cap", cap, "exact-powerset ancestor-chain cap");

  auto* sweep = app.add_subcommand("sweep", "beta x model x seed experiment grid");
  std::string betas_csv = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7";
  std::string seeds_csv = "1";
  std::string models_csv = "br-leaf,br-all,hlup-finetune";
  std::string sw_exclude, sw_groups, sw_mid, sw_root;
  size_t sw_gen_n = 0;
  int sw_gen_d = 20;
  int sw_ci_rounds = 1000;
  int sw_threads = 0;
  TrainFlags sweep_flags;
  sweep->add_option("--betas", betas_csv, "comma-separated ascending beta grid");
  sweep->add_option("--seeds", seeds_csv, "comma-separated seeds");
  sweep->add_option("--models", models_csv, "comma-separated model variants");
  sweep->add_option("--ratio", ratio, "coarser-level deletion ratio");
  sweep->add_option("--exclude", sw_exclude, "labels excluded from training and evaluation");
  sweep->add_option("--group-parents", sw_groups, "finest-level deletion parents");
  sweep->add_option("--mid-parent", sw_mid, "mid-level deletion parent");
  sweep->add_option("--root-parent", sw_root, "root-level deletion parent");
  sweep->add_option("--gen-n", sw_gen_n, "generate a dataset of this size when --data is absent");
  sweep->add_option("--gen-d", sw_gen_d, "generated feature dimension");
  sweep->add_option("--ci-rounds", sw_ci_rounds, "bootstrap rounds for summary CIs");
  sweep->add_option("--threads", sw_threads, "worker cap (also capped by HMLC_THREADS)");
  sweep_flags.attach(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      if (taxonomy_path.empty()) throw std::runtime_error("--taxonomy is required");
      return cmd_validate(taxonomy_path, data_path);
    }

    if (generate->parsed()) {
      Taxonomy t = load_taxonomy(taxonomy_path);
      Dataset ds = synth_generate(t, gen_n, gen_d, seed);
      util::write_file(gen_out, write_dataset(ds));
      std::cout << "wrote " << ds.size() << " rows to " << gen_out << "\n";
      return kExitOk;
    }

    if (del->parsed()) {
      Taxonomy t = load_taxonomy(taxonomy_path);
      Dataset ds = load_dataset(data_path);
      check_dataset(ds, t);
      SweepSpec names;
      names.betas = {beta};
      names.ratio = ratio;
      names.exclude = parse_name_list(exclude_csv);
      names.group_parents = parse_name_list(groups_csv);
      names.mid_parent = mid_name;
      names.root_parent = root_name;
      DeletionConfig cfg = resolve_deletion(t, names, beta, seed);
      Dataset out = delete_labels(ds, t, cfg);
      util::write_file(del_out, write_dataset(out));
      std::cout << "wrote " << out.size() << " rows to " << del_out << "\n";
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      Taxonomy t = load_taxonomy(taxonomy_path);
      Dataset ds = load_dataset(data_path);
      check_dataset(ds, t);
      VariantRun run = train_variant(model_name, ds, t, train_flags.to_config(seed), seed);
      std::filesystem::create_directories(out_dir);
      std::string ckpt = out_dir + "/" + model_name + "_seed" + std::to_string(seed) + ".ckpt";
      util::write_file(ckpt, save_checkpoint(run.model, run.score_spec, ds.label_names));
      std::string hist = "stage,epoch,train_loss,val_leaf_auc\n";
      for (size_t e = 0; e < run.stage1_history.size(); ++e)
        hist += "1," + std::to_string(e) + "," +
                util::fmt_double(run.stage1_history[e].train_loss) + "," +
                util::fmt_double(run.stage1_history[e].val_metric) + "\n";
      for (size_t e = 0; e < run.history.size(); ++e)
        hist += std::string(run.stage1_history.empty() ? "1," : "2,") + std::to_string(e) + "," +
                util::fmt_double(run.history[e].train_loss) + "," +
                util::fmt_double(run.history[e].val_metric) + "\n";
      util::write_file(out_dir + "/" + model_name + "_seed" + std::to_string(seed) +
                           "_history.csv",
                       hist);
      std::cout << "wrote " << ckpt << "\n";
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      Taxonomy t = load_taxonomy(taxonomy_path);
      Dataset ds = load_dataset(data_path);
      check_dataset(ds, t);
      Checkpoint ck = load_checkpoint(read_input(ckpt_path));
      if (ck.label_names != ds.label_names)
        throw std::runtime_error("eval: checkpoint labels do not match dataset labels");
      std::vector<size_t> rows = rows_for_split(ds, split_name);
      if (rows.empty()) throw std::runtime_error("eval: split '" + split_name + "' is empty");
      std::vector<double> scores = score_matrix(ck.model, ck.spec, t, ds, rows);
      std::vector<LabelState> labels(rows.size() * static_cast<size_t>(t.size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        auto row = ds.row_labels(rows[r]);
        std::copy(row.begin(), row.end(), labels.begin() + r * static_cast<size_t>(t.size()));
      }
      ReportOptions opts;
      for (const auto& name : parse_name_list(eval_exclude)) opts.drop.push_back(t.require(name));
      opts.leaves_only = ck.spec == LossSpec::BRLeaf;
      if (!condition_name.empty()) opts.cond_node = t.require(condition_name);
      opts.ci_rounds = ci_rounds;
      opts.ci_seed = rng::key(seed, "eval-ci");
      MetricReport rep = compute_report(t, scores, labels, opts);

      std::filesystem::create_directories(out_dir);
      util::write_file(out_dir + "/report.csv", report_csv(rep));
      util::write_file(out_dir + "/report.jsonl", report_jsonl(rep));
      std::string pred = "id";
      for (const auto& name : ds.label_names) pred += "," + name;
      pred += "\n";
      for (size_t r = 0; r < rows.size(); ++r) {
        pred += ds.ids[rows[r]];
        for (int m = 0; m < t.size(); ++m)
          pred += "," + util::fmt_double_sig(
                            scores[r * static_cast<size_t>(t.size()) + static_cast<size_t>(m)], 9);
        pred += "\n";
      }
      util::write_file(out_dir + "/predictions.csv", pred);
      std::cout << report_csv(rep);
      std::cout << "wrote report.csv, report.jsonl, predictions.csv to " << out_dir << "\n";
      return kExitOk;
    }

    if (losscheck->parsed()) {
      Taxonomy t = load_taxonomy(taxonomy_path);
      verify::LosscheckReport rep = verify::run_losscheck(t, seed, trials, cap);
      std::cout << rep.text;
      return rep.ok ? kExitOk : kExitFailure;
    }

    if (sweep->parsed()) {
      Taxonomy t = load_taxonomy(taxonomy_path);
      Dataset ds;
      if (!data_path.empty()) {
        ds = load_dataset(data_path);
      } else if (sw_gen_n > 0) {
        ds = synth_generate(t, sw_gen_n, sw_gen_d, seed);
      } else {
        throw std::runtime_error("sweep: pass --data or --gen-n");
      }
      SweepSpec spec;
      spec.betas = parse_beta_list(betas_csv);
      spec.seeds = parse_seed_list(seeds_csv);
      spec.models = parse_name_list(models_csv);
      spec.ratio = ratio;
      spec.exclude = parse_name_list(sw_exclude);
      spec.group_parents = parse_name_list(sw_groups);
      spec.mid_parent = sw_mid;
      spec.root_parent = sw_root;
      spec.base = sweep_flags.to_config(seed);
      spec.ci_rounds = sw_ci_rounds;
      spec.threads = sw_threads;
      spec.out_dir = out_dir;
      run_sweep(t, ds, spec, std::cout);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
