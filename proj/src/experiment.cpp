#include "hmlc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hmlc/rng.hpp"
#include "hmlc/util.hpp"

namespace hmlc {

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "br-leaf", "br-all", "hlcp", "hlup", "hlup-max", "hlup-rescale", "hlup-finetune"};
  return names;
}

VariantRun train_variant(const std::string& name, const Dataset& ds, const Taxonomy& t,
                         TrainConfig base, uint64_t seed) {
  base.seed = seed;
  if (name == "hlup-finetune") {
    TrainConfig stage1 = base;
    stage1.loss = LossSpec::HLCP;
    TrainConfig stage2 = base;
    stage2.loss = LossSpec::HLUPExact;
    TwoStageResult r = train_two_stage(ds, t, stage1, stage2);
    return {std::move(r.model), LossSpec::HLUPExact, std::move(r.stage2), std::move(r.stage1)};
  }
  TrainConfig cfg = base;
  cfg.loss = parse_loss_spec(name);
  MlpModel m0 = init_model(ds.d, cfg.hidden, t.size(), seed);
  TrainResult r = train(m0, ds, t, cfg);
  return {std::move(r.model), cfg.loss, std::move(r.history), {}};
}

DeletionConfig resolve_deletion(const Taxonomy& t, const SweepSpec& spec, double beta,
                                uint64_t seed) {
  DeletionConfig cfg;
  cfg.beta = beta;
  cfg.ratio = spec.ratio;
  cfg.seed = seed;
  if (!spec.group_parents.empty()) {
    for (const auto& name : spec.group_parents) cfg.group_parents.push_back(t.require(name));
  } else {
    // The standard three-group layout, when this taxonomy has it.
    std::vector<std::string> std_groups = {"Pleural Abnormality", "Opacity",
                                           "Pulmonary Nodules and Masses"};
    bool all = true;
    for (const auto& g : std_groups) all &= t.find(g).has_value();
    if (all)
      for (const auto& g : std_groups) cfg.group_parents.push_back(*t.find(g));
  }
  if (!spec.mid_parent.empty())
    cfg.mid_parent = t.require(spec.mid_parent);
  else if (spec.group_parents.empty() && t.find("Pulmonary Diseases"))
    cfg.mid_parent = *t.find("Pulmonary Diseases");
  cfg.root_parent = spec.root_parent.empty() ? t.root() : t.require(spec.root_parent);
  for (const auto& name : spec.exclude) cfg.excluded.push_back(t.require(name));

  bool needs_deletion = false;
  for (double b : spec.betas) needs_deletion |= b > 0.0;
  if (needs_deletion && cfg.group_parents.empty())
    throw std::runtime_error(
        "sweep: nonzero betas but no group parents; pass --group-parents explicitly");
  return cfg;
}

namespace {

struct Cell {
  size_t bi, mi, si;
};

struct CellResult {
  bool ok = false;
  std::string error;
  MetricReport rep;
  bool keep_pred = false;
  std::vector<double> scores;       // test-row scores, kept on the first seed for CI
  std::vector<LabelState> labels;   // matching test-row label matrix
  bool leaves_only = false;
};

std::string cell_csv_row(const SweepSpec& spec, const Cell& c, const CellResult& r) {
  auto cellv = [](const std::optional<double>& v) {
    return v ? util::fmt_double(*v) : std::string();
  };
  std::string row = util::fmt_double(spec.betas[c.bi]) + "," + spec.models[c.mi] + "," +
                    std::to_string(spec.seeds[c.si]) + ",";
  if (!r.ok) return row + "failed,,,,,,\n";
  row += "ok,";
  row += cellv(r.rep.mean_leaf_auc) + "," + cellv(r.rep.mean_leaf_ap) + "," +
         cellv(r.rep.mean_nonleaf_auc) + "," + cellv(r.rep.mean_nonleaf_ap) + "," +
         cellv(r.rep.cond_leaf_auc) + "," + cellv(r.rep.cond_leaf_ap) + "\n";
  return row;
}

unsigned resolve_threads(int requested, size_t n_cells) {
  unsigned n = requested > 0 ? static_cast<unsigned>(requested)
                             : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HMLC_THREADS")) {
    unsigned cap = static_cast<unsigned>(std::max(1LL, (long long)util::parse_ll(env)));
    n = std::min(n, cap);
  }
  return std::max<size_t>(1, std::min<size_t>(n, n_cells));
}

}  // namespace

void run_sweep(const Taxonomy& t, const Dataset& ds, const SweepSpec& spec, std::ostream& log) {
  if (spec.betas.empty() || spec.seeds.empty() || spec.models.empty())
    throw std::invalid_argument("sweep: betas, seeds and models must be non-empty");
  if (!std::is_sorted(spec.betas.begin(), spec.betas.end()))
    throw std::invalid_argument("sweep: beta list must be ascending");
  for (const auto& m : spec.models)
    if (std::find(variant_names().begin(), variant_names().end(), m) == variant_names().end())
      throw std::invalid_argument("sweep: unknown model '" + m + "'");
  check_dataset(ds, t);

  std::vector<Cell> cells;
  for (size_t bi = 0; bi < spec.betas.size(); ++bi)
    for (size_t mi = 0; mi < spec.models.size(); ++mi)
      for (size_t si = 0; si < spec.seeds.size(); ++si) cells.push_back({bi, mi, si});
  std::vector<CellResult> results(cells.size());

  const std::vector<size_t> test_rows = ds.split_indices(Split::Test);
  if (test_rows.empty()) throw std::runtime_error("sweep: empty test split");

  auto run_cell = [&](size_t idx) {
    const Cell& c = cells[idx];
    CellResult& out = results[idx];
    try {
      const uint64_t seed = spec.seeds[c.si];
      DeletionConfig del = resolve_deletion(t, spec, spec.betas[c.bi], seed);
      Dataset deleted = delete_labels(ds, t, del);
      VariantRun run = train_variant(spec.models[c.mi], deleted, t, spec.base, seed);

      out.leaves_only = run.score_spec == LossSpec::BRLeaf;
      out.scores = score_matrix(run.model, run.score_spec, t, deleted, test_rows);
      out.labels.resize(test_rows.size() * static_cast<size_t>(t.size()));
      for (size_t r = 0; r < test_rows.size(); ++r) {
        auto row = deleted.row_labels(test_rows[r]);
        std::copy(row.begin(), row.end(),
                  out.labels.begin() + r * static_cast<size_t>(t.size()));
      }
      ReportOptions opts;
      opts.drop = del.excluded;
      opts.leaves_only = out.leaves_only;
      out.rep = compute_report(t, out.scores, out.labels, opts);
      out.keep_pred = c.si == 0;
      if (!out.keep_pred) {
        out.scores.clear();
        out.labels.clear();
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  };

  const unsigned n_threads = resolve_threads(spec.threads, cells.size());
  if (n_threads <= 1) {
    for (size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  for (size_t i = 0; i < cells.size(); ++i)
    if (!results[i].ok)
      log << "sweep: cell (beta=" << spec.betas[cells[i].bi] << ", model "
          << spec.models[cells[i].mi] << ", seed " << spec.seeds[cells[i].si]
          << ") failed: " << results[i].error << "\n";

  std::filesystem::create_directories(spec.out_dir);
  std::string cells_csv =
      "beta,model,seed,status,mean_leaf_auc,mean_leaf_ap,mean_nonleaf_auc,mean_nonleaf_ap,"
      "cond_leaf_auc,cond_leaf_ap\n";
  std::string cells_jsonl;
  for (size_t i = 0; i < cells.size(); ++i) {
    cells_csv += cell_csv_row(spec, cells[i], results[i]);
    nlohmann::json j;
    j["beta"] = spec.betas[cells[i].bi];
    j["model"] = spec.models[cells[i].mi];
    j["seed"] = spec.seeds[cells[i].si];
    j["status"] = results[i].ok ? "ok" : "failed";
    auto put = [&j](const char* key, const std::optional<double>& v) {
      j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    const MetricReport& rep = results[i].rep;
    put("mean_leaf_auc", results[i].ok ? rep.mean_leaf_auc : std::nullopt);
    put("mean_leaf_ap", results[i].ok ? rep.mean_leaf_ap : std::nullopt);
    put("mean_nonleaf_auc", results[i].ok ? rep.mean_nonleaf_auc : std::nullopt);
    put("mean_nonleaf_ap", results[i].ok ? rep.mean_nonleaf_ap : std::nullopt);
    put("cond_leaf_auc", results[i].ok ? rep.cond_leaf_auc : std::nullopt);
    put("cond_leaf_ap", results[i].ok ? rep.cond_leaf_ap : std::nullopt);
    cells_jsonl += j.dump() + "\n";
  }
  util::write_file(spec.out_dir + "/sweep_cells.csv", cells_csv);
  util::write_file(spec.out_dir + "/sweep_cells.jsonl", cells_jsonl);

  std::string summary_csv = "beta,model,n_seeds,mean_leaf_auc,auc_lo,auc_hi\n";
  for (size_t bi = 0; bi < spec.betas.size(); ++bi)
    for (size_t mi = 0; mi < spec.models.size(); ++mi) {
      double sum = 0;
      int n_ok = 0;
      const CellResult* first = nullptr;
      for (size_t si = 0; si < spec.seeds.size(); ++si) {
        size_t idx = (bi * spec.models.size() + mi) * spec.seeds.size() + si;
        const CellResult& r = results[idx];
        if (r.ok && r.rep.mean_leaf_auc) {
          sum += *r.rep.mean_leaf_auc;
          ++n_ok;
        }
        if (si == 0 && r.ok && r.keep_pred) first = &r;
      }
      summary_csv += util::fmt_double(spec.betas[bi]) + "," + spec.models[mi] + "," +
                     std::to_string(n_ok) + ",";
      summary_csv += n_ok > 0 ? util::fmt_double(sum / n_ok) : std::string();
      std::string lo, hi;
      if (first && spec.ci_rounds > 0) {
        ReportOptions opts;
        DeletionConfig del = resolve_deletion(t, spec, spec.betas[bi], spec.seeds[0]);
        opts.drop = del.excluded;
        opts.leaves_only = first->leaves_only;
        opts.ci_rounds = spec.ci_rounds;
        opts.ci_seed = rng::key(spec.seeds[0], "sweep-ci", bi, mi);
        MetricReport rep = compute_report(t, first->scores, first->labels, opts);
        if (rep.mean_leaf_auc_lo) lo = util::fmt_double(*rep.mean_leaf_auc_lo);
        if (rep.mean_leaf_auc_hi) hi = util::fmt_double(*rep.mean_leaf_auc_hi);
      }
      summary_csv += "," + lo + "," + hi + "\n";
    }
  util::write_file(spec.out_dir + "/sweep_summary.csv", summary_csv);

  log << "sweep: wrote " << cells.size() << " cells to " << spec.out_dir << "\n";
}

}  // namespace hmlc
