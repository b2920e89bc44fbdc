// Command-line front end: ingest, simulate, infer, baseline, evaluate,
// report-patterns. Exit codes: 0 success, 1 usage, 2 data validation
// failure, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ttd/baselines.hpp"
#include "ttd/dataset.hpp"
#include "ttd/eval.hpp"
#include "ttd/generative.hpp"
#include "ttd/inference.hpp"
#include "ttd/io.hpp"

namespace fs = std::filesystem;
using ttd::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct IngestOptions {
    std::string in;
    bool strict = false;
    ttd::DatasetOptions dataset;
};

struct IngestResult {
    ttd::Dataset dataset;
    std::vector<ttd::io::LineError> line_errors;
    ttd::BuildReport build;
    std::size_t total_lines = 0;
};

IngestResult ingest_file(const IngestOptions& opt) {
    std::ifstream in(opt.in);
    if (!in) throw std::runtime_error("cannot open " + opt.in);
    auto read = ttd::io::read_extraction_records(in);
    IngestResult r;
    r.line_errors = std::move(read.errors);
    r.total_lines = read.total_lines;
    r.dataset = ttd::build_dataset(read.records, opt.dataset, &r.build);
    return r;
}

std::size_t rejected_count(const IngestResult& r) {
    return r.line_errors.size() + r.build.rejected.size();
}

json validation_report_json(const IngestResult& r) {
    json errors = json::array();
    for (const auto& e : r.line_errors) {
        errors.push_back({{"line", e.line}, {"reason", e.reason}});
    }
    for (const auto& e : r.build.rejected) {
        errors.push_back({{"line", e.line}, {"reason", e.reason}});
    }
    return {{"total_records", r.total_lines},
            {"accepted", r.build.accepted},
            {"rejected", rejected_count(r)},
            {"merged", r.build.merged},
            {"facts", r.dataset.num_facts()},
            {"sources", r.dataset.num_sources()},
            {"extractions", r.dataset.extractions.size()},
            {"errors", errors}};
}

void print_ingest_summary(const IngestResult& r) {
    std::cerr << "ingested " << r.build.accepted << "/" << r.total_lines << " records: "
              << r.dataset.num_facts() << " facts, " << r.dataset.num_sources() << " sources, "
              << r.dataset.extractions.size() << " extractions";
    if (rejected_count(r) > 0) {
        std::cerr << "; rejected " << rejected_count(r) << " (see report)";
    }
    std::cerr << "\n";
    for (const auto& e : r.line_errors) {
        std::cerr << "  line " << e.line << ": " << e.reason << "\n";
    }
    for (const auto& e : r.build.rejected) {
        std::cerr << "  line " << e.line << ": " << e.reason << "\n";
    }
}

fs::path default_manifest(const std::string& primary_output) {
    return fs::path(primary_output + ".manifest.json");
}

// shared flag groups

void add_constraint_flags(CLI::App* cmd, ttd::ConstraintSpec& spec) {
    cmd->add_flag("--c1", spec.c1, "one value matches only one entity");
    cmd->add_flag("--c2", spec.c2, "one entity matches only one value");
    cmd->add_flag("--c3", spec.c3, "one value matches only one entity at a time");
    cmd->add_flag("--c4", spec.c4, "one entity matches only one value at a time");
}

struct HyperFlags {
    double beta0 = 1.0, beta1 = 1.0;
    double kappa0 = 1.0, mu0 = 2.0, kappa1 = 2.0, mu1 = 1.0;
    double gamma = 2.0;

    ttd::Hyperparams to_hyperparams() const {
        ttd::Hyperparams hp;
        hp.beta0 = beta0;
        hp.beta1 = beta1;
        hp.set_rate_prior({kappa0, mu0, kappa1, mu1});
        hp.set_gamma(gamma);
        return hp;
    }
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& h, bool with_gamma) {
    cmd->add_option("--beta0", h.beta0, "prior pseudo-count of false facts");
    cmd->add_option("--beta1", h.beta1, "prior pseudo-count of true facts");
    cmd->add_option("--kappa0", h.kappa0, "false-side rate prior count mass (shape)");
    cmd->add_option("--mu0", h.mu0, "false-side rate prior tuple count (rate)");
    cmd->add_option("--kappa1", h.kappa1, "true-side rate prior count mass (shape)");
    cmd->add_option("--mu1", h.mu1, "true-side rate prior tuple count (rate)");
    if (with_gamma) {
        cmd->add_option("--gamma", h.gamma, "constraint potential strength for active rules");
    }
}

// subcommand runners

int run_ingest(const IngestOptions& opt, const std::string& out, const std::string& report_path) {
    IngestResult r = ingest_file(opt);
    print_ingest_summary(r);

    std::vector<std::string> outputs;
    if (!out.empty()) {
        ttd::io::atomic_write(out, ttd::io::render_records(ttd::to_records(r.dataset)));
        outputs.push_back(out);
    }
    if (!report_path.empty()) {
        ttd::io::atomic_write(report_path, validation_report_json(r).dump(2) + "\n");
        outputs.push_back(report_path);
    }
    if (!outputs.empty()) {
        ttd::io::Manifest m;
        m.command = "ingest";
        m.inputs = {opt.in};
        m.params = {{"strict", opt.strict},
                    {"time_min", opt.dataset.time_min},
                    {"time_max", opt.dataset.time_max}};
        m.outputs = outputs;
        ttd::io::write_manifest(default_manifest(outputs.front()), m);
    }
    if (opt.strict && rejected_count(r) > 0) return kExitValidation;
    return kExitOk;
}

int run_simulate(const ttd::GenConfig& cfg, const std::string& out, const std::string& truth_out,
                 std::string manifest_path) {
    auto gen = ttd::sample_generative(cfg);
    ttd::io::atomic_write(out, ttd::io::render_records(ttd::to_records(gen.dataset)));
    ttd::io::atomic_write(truth_out, ttd::io::render_truth_points(gen.dataset, gen.truth.labels));

    ttd::io::Manifest m;
    m.command = "simulate";
    m.seed = cfg.seed;
    m.params = {{"entities", cfg.num_entities},
                {"values", cfg.num_values},
                {"time_min", cfg.time_min},
                {"time_max", cfg.time_max},
                {"facts", cfg.num_facts},
                {"patterns", cfg.sources_per_signal},
                {"mean_degree", cfg.mean_facts_per_source},
                {"zero_truncated", cfg.zero_truncated},
                {"hyperparams", ttd::io::to_json(cfg.prior)},
                {"plant", ttd::io::to_json(cfg.plant)}};
    m.outputs = {out, truth_out};
    if (manifest_path.empty()) manifest_path = default_manifest(out).string();
    ttd::io::write_manifest(manifest_path, m);

    std::cerr << "simulated " << gen.dataset.num_facts() << " facts, " << gen.dataset.num_sources()
              << " sources, " << gen.dataset.extractions.size() << " extractions\n";
    return kExitOk;
}

int run_infer(const IngestOptions& iopt, const ttd::Hyperparams& hp, const ttd::ConstraintSpec& spec,
              const ttd::RunConfig& rc, const std::string& out_trust, const std::string& out_rel,
              std::string manifest_path) {
    IngestResult r = ingest_file(iopt);
    print_ingest_summary(r);
    if (iopt.strict && rejected_count(r) > 0) return kExitValidation;
    if (r.dataset.num_facts() == 0) {
        std::cerr << "error: dataset is empty\n";
        return kExitValidation;
    }

    auto summary = ttd::run(r.dataset, hp, spec, rc);
    auto preds = ttd::make_predictions(r.dataset, summary.trust, summary.predicted);
    ttd::io::atomic_write(out_trust, ttd::io::render_predictions(preds, "trust"));
    ttd::io::atomic_write(out_rel, ttd::io::render_reliability(summary));

    ttd::io::Manifest m;
    m.command = "infer";
    m.seed = rc.seed;
    m.inputs = {iopt.in};
    m.params = {{"hyperparams", ttd::io::to_json(hp)},
                {"constraints", ttd::io::to_json(spec)},
                {"run", ttd::io::to_json(rc)},
                {"strict", iopt.strict}};
    m.outputs = {out_trust, out_rel};
    if (manifest_path.empty()) manifest_path = default_manifest(out_trust).string();
    ttd::io::write_manifest(manifest_path, m);
    return kExitOk;
}

int run_baseline(const IngestOptions& iopt, const std::string& method, const ttd::ConstraintSpec& spec,
                 double vote_threshold, const std::string& out) {
    IngestResult r = ingest_file(iopt);
    print_ingest_summary(r);
    if (iopt.strict && rejected_count(r) > 0) return kExitValidation;

    ttd::BaselineResult b;
    if (method == "majvote") {
        b = ttd::majority_vote(r.dataset, spec, vote_threshold);
    } else if (method == "frequency") {
        b = ttd::frequency_scores(r.dataset, vote_threshold);
    } else {
        std::cerr << "error: unknown method '" << method << "' (expected majvote or frequency)\n";
        return kExitUsage;
    }
    auto preds = ttd::make_predictions(r.dataset, b.score, b.label);
    ttd::io::atomic_write(out, ttd::io::render_predictions(preds, "score"));

    ttd::io::Manifest m;
    m.command = "baseline";
    m.inputs = {iopt.in};
    m.params = {{"method", method},
                {"constraints", ttd::io::to_json(spec)},
                {"vote_threshold", vote_threshold}};
    m.outputs = {out};
    ttd::io::write_manifest(default_manifest(out), m);
    return kExitOk;
}

void print_eval_report(const ttd::EvalReport& rep) {
    std::printf(
        "setting=%s precision=%.4f recall=%.4f f1=%.4f pr_auc=%.4f tp=%llu fp=%llu fn=%llu "
        "(truth: %llu total, %llu in universe; unrestricted recall %.4f)%s%s\n",
        std::string(to_string(rep.setting)).c_str(), rep.precision, rep.recall, rep.f1, rep.pr_auc,
        static_cast<unsigned long long>(rep.tp), static_cast<unsigned long long>(rep.fp),
        static_cast<unsigned long long>(rep.fn), static_cast<unsigned long long>(rep.truth_size),
        static_cast<unsigned long long>(rep.truth_in_universe), rep.recall_unrestricted,
        rep.precision_undefined ? " [precision undefined: no predicted-true facts]" : "",
        rep.recall_undefined ? " [recall undefined: no truth in universe]" : "");
}

int run_evaluate(const std::string& pred_path, const std::string& truth_path, const std::string& setting,
                 const std::string& out) {
    std::ifstream pin(pred_path);
    if (!pin) throw std::runtime_error("cannot open " + pred_path);
    auto pred = ttd::io::read_predictions(pin);
    std::ifstream tin(truth_path);
    if (!tin) throw std::runtime_error("cannot open " + truth_path);
    auto truth = ttd::io::read_ground_truth(tin);
    for (const auto& e : pred.errors) std::cerr << pred_path << ":" << e.line << ": " << e.reason << "\n";
    for (const auto& e : truth.errors) std::cerr << truth_path << ":" << e.line << ": " << e.reason << "\n";
    if (!pred.errors.empty() || !truth.errors.empty()) return kExitValidation;

    json out_json = json::object();
    if (setting == "point" || setting == "both") {
        auto rep = ttd::point_eval(pred.predictions, truth.truth);
        print_eval_report(rep);
        out_json["point"] = ttd::io::to_json(rep);
    }
    if (setting == "period" || setting == "both") {
        auto rep = ttd::period_eval(pred.predictions, truth.truth);
        print_eval_report(rep);
        out_json["period"] = ttd::io::to_json(rep);
    }
    if (!out.empty()) {
        ttd::io::atomic_write(out, out_json.dump(2) + "\n");
        ttd::io::Manifest m;
        m.command = "evaluate";
        m.inputs = {pred_path, truth_path};
        m.params = {{"setting", setting}};
        m.outputs = {out};
        ttd::io::write_manifest(default_manifest(out), m);
    }
    return kExitOk;
}

int run_report_patterns(const std::string& rel_path, const std::string& out) {
    std::ifstream in(rel_path);
    if (!in) throw std::runtime_error("cannot open " + rel_path);
    auto rel = ttd::io::read_reliability(in);
    for (const auto& e : rel.errors) std::cerr << rel_path << ":" << e.line << ": " << e.reason << "\n";
    if (!rel.errors.empty()) return kExitValidation;

    auto rows = ttd::pattern_reliability_report(rel.summary);
    std::string text = "pattern\tr_post\tr_tag\n";
    for (const auto& row : rows) {
        text += row.pattern;
        text += '\t';
        text += row.r_post ? std::to_string(*row.r_post) : "-";
        text += '\t';
        text += row.r_tag ? std::to_string(*row.r_tag) : "-";
        text += '\n';
    }
    std::fputs(text.c_str(), stdout);
    if (!out.empty()) ttd::io::atomic_write(out, text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"truth discovery for pattern-extracted temporal facts"};
    app.require_subcommand(1);

    // ingest
    IngestOptions ing;
    std::string ing_out, ing_report;
    auto* c_ingest = app.add_subcommand("ingest", "validate records and build a dataset");
    c_ingest->add_option("--in", ing.in, "extraction records (JSON lines)")->required();
    c_ingest->add_option("--out", ing_out, "write normalized records here");
    c_ingest->add_option("--report", ing_report, "write the validation report here");
    c_ingest->add_flag("--strict", ing.strict, "nonzero exit if any record is rejected");
    c_ingest->add_option("--time-min", ing.dataset.time_min, "smallest accepted year");
    c_ingest->add_option("--time-max", ing.dataset.time_max, "largest accepted year");

    // simulate
    ttd::GenConfig gcfg;
    HyperFlags ghyper;
    std::string sim_out, sim_truth, sim_manifest;
    auto* c_sim = app.add_subcommand("simulate", "sample a synthetic dataset with planted truth");
    c_sim->add_option("--out", sim_out, "extraction records output")->required();
    c_sim->add_option("--truth-out", sim_truth, "planted truth output")->required();
    c_sim->add_option("--manifest", sim_manifest, "manifest path");
    c_sim->add_option("--entities", gcfg.num_entities, "number of entities");
    c_sim->add_option("--values", gcfg.num_values, "number of values");
    c_sim->add_option("--time-min", gcfg.time_min, "first year");
    c_sim->add_option("--time-max", gcfg.time_max, "last year");
    c_sim->add_option("--facts", gcfg.num_facts, "number of facts");
    c_sim->add_option("--patterns", gcfg.sources_per_signal, "patterns per signal type");
    c_sim->add_option("--mean-degree", gcfg.mean_facts_per_source, "mean facts per source");
    c_sim->add_flag("--zero-truncated", gcfg.zero_truncated, "keep all edges, counts >= 1");
    c_sim->add_option("--seed", gcfg.seed, "random seed");
    add_hyper_flags(c_sim, ghyper, false);
    add_constraint_flags(c_sim, gcfg.plant);

    // infer
    IngestOptions inf_in;
    HyperFlags ihyper;
    ttd::ConstraintSpec inf_spec;
    ttd::RunConfig inf_rc;
    std::string inf_trust, inf_rel, inf_manifest;
    auto* c_inf = app.add_subcommand("infer", "posterior trust scores and source reliability");
    c_inf->add_option("--in", inf_in.in, "extraction records (JSON lines)")->required();
    c_inf->add_option("--out-trust", inf_trust, "per-fact trust output")->required();
    c_inf->add_option("--out-reliability", inf_rel, "per-source reliability output")->required();
    c_inf->add_option("--manifest", inf_manifest, "manifest path");
    c_inf->add_flag("--strict", inf_in.strict, "nonzero exit if any record is rejected");
    c_inf->add_option("--time-min", inf_in.dataset.time_min, "smallest accepted year");
    c_inf->add_option("--time-max", inf_in.dataset.time_max, "largest accepted year");
    add_hyper_flags(c_inf, ihyper, true);
    add_constraint_flags(c_inf, inf_spec);
    c_inf->add_option("--burn-in", inf_rc.burn_in, "burn-in sweeps");
    c_inf->add_option("--samples", inf_rc.samples, "retained sweeps per chain");
    c_inf->add_option("--thin", inf_rc.thinning, "sweeps between retained samples");
    c_inf->add_option("--chains", inf_rc.chains, "independent chains");
    c_inf->add_option("--seed", inf_rc.seed, "random seed");
    c_inf->add_option("--threshold", inf_rc.threshold, "trust threshold for the predicted label");

    // baseline
    IngestOptions base_in;
    ttd::ConstraintSpec base_spec;
    std::string base_method, base_out;
    double vote_threshold = 2.0;
    auto* c_base = app.add_subcommand("baseline", "majority-vote / frequency reference methods");
    c_base->add_option("--in", base_in.in, "extraction records (JSON lines)")->required();
    c_base->add_option("--method", base_method, "majvote or frequency")->required();
    c_base->add_option("--out", base_out, "predictions output")->required();
    c_base->add_flag("--strict", base_in.strict, "nonzero exit if any record is rejected");
    c_base->add_option("--vote-threshold", vote_threshold, "absolute score threshold when C4 is off");
    add_constraint_flags(c_base, base_spec);

    // evaluate
    std::string ev_pred, ev_truth, ev_setting = "both", ev_out;
    auto* c_eval = app.add_subcommand("evaluate", "precision/recall/F1/PR-AUC against ground truth");
    c_eval->add_option("--pred", ev_pred, "predictions file")->required();
    c_eval->add_option("--truth", ev_truth, "ground truth file")->required();
    c_eval->add_option("--setting", ev_setting, "point, period, or both")
        ->check(CLI::IsMember({"point", "period", "both"}));
    c_eval->add_option("--out", ev_out, "machine-readable report output");

    // report-patterns
    std::string rp_rel, rp_out;
    auto* c_rp = app.add_subcommand("report-patterns", "per-pattern reliability table");
    c_rp->add_option("--reliability", rp_rel, "reliability file from infer")->required();
    c_rp->add_option("--out", rp_out, "write the table here too");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_ingest->parsed()) return run_ingest(ing, ing_out, ing_report);
        if (c_sim->parsed()) {
            gcfg.prior = ghyper.to_hyperparams();
            return run_simulate(gcfg, sim_out, sim_truth, sim_manifest);
        }
        if (c_inf->parsed()) {
            return run_infer(inf_in, ihyper.to_hyperparams(), inf_spec, inf_rc, inf_trust, inf_rel,
                             inf_manifest);
        }
        if (c_base->parsed()) return run_baseline(base_in, base_method, base_spec, vote_threshold, base_out);
        if (c_eval->parsed()) return run_evaluate(ev_pred, ev_truth, ev_setting, ev_out);
        if (c_rp->parsed()) return run_report_patterns(rp_rel, rp_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
