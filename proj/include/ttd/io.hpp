#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttd/dataset.hpp"
#include "ttd/eval.hpp"
#include "ttd/generative.hpp"
#include "ttd/inference.hpp"
#include "ttd/params.hpp"

namespace ttd::io {

using json = nlohmann::json;

inline constexpr const char* kToolName = "ttd";
inline constexpr const char* kToolVersion = "0.1.0";

struct LineError {
    std::size_t line = 0;  // 1-based
    std::string reason;
};

namespace io_detail {

inline bool get_string(const json& j, const char* key, std::string& out, std::string& err) {
    if (!j.contains(key)) {
        err = std::string("missing field '") + key + "'";
        return false;
    }
    if (!j[key].is_string()) {
        err = std::string("field '") + key + "' must be a string";
        return false;
    }
    out = j[key].get<std::string>();
    return true;
}

inline bool get_int(const json& j, const char* key, long long& out, std::string& err) {
    if (!j.contains(key)) {
        err = std::string("missing field '") + key + "'";
        return false;
    }
    if (!j[key].is_number_integer()) {
        err = std::string("field '") + key + "' must be an integer";
        return false;
    }
    out = j[key].get<long long>();
    return true;
}

}  // namespace io_detail

// ---- extraction records (one JSON object per line) ----

inline json to_json(const ExtractionRecord& r) {
    return {{"entity", r.entity}, {"value", r.value},     {"time", r.time},
            {"pattern", r.pattern}, {"signal", r.signal}, {"count", r.count}};
}

struct RecordReadResult {
    std::vector<ExtractionRecord> records;
    std::vector<LineError> errors;
    std::size_t total_lines = 0;  // nonempty lines seen
};

inline RecordReadResult read_extraction_records(std::istream& in) {
    RecordReadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        out.total_lines++;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            out.errors.push_back({lineno, "not a JSON object"});
            continue;
        }
        ExtractionRecord r;
        r.line = lineno;
        std::string err;
        if (!io_detail::get_string(j, "entity", r.entity, err) ||
            !io_detail::get_string(j, "value", r.value, err) ||
            !io_detail::get_int(j, "time", r.time, err) ||
            !io_detail::get_string(j, "pattern", r.pattern, err) ||
            !io_detail::get_string(j, "signal", r.signal, err) ||
            !io_detail::get_int(j, "count", r.count, err)) {
            out.errors.push_back({lineno, err});
            continue;
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

// ---- predictions ----

inline json to_json(const ScoredPrediction& p, const char* score_key) {
    json j = {{"entity", p.entity}, {"value", p.value}, {"time", p.time}, {"label", p.label}};
    j[score_key] = p.score;
    return j;
}

struct PredictionReadResult {
    std::vector<ScoredPrediction> predictions;
    std::vector<LineError> errors;
};

/// Accepts the "trust" key written by inference or the "score" key
/// written by the baselines.
inline PredictionReadResult read_predictions(std::istream& in) {
    PredictionReadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            out.errors.push_back({lineno, "not a JSON object"});
            continue;
        }
        ScoredPrediction p;
        std::string err;
        long long time = 0;
        if (!io_detail::get_string(j, "entity", p.entity, err) ||
            !io_detail::get_string(j, "value", p.value, err) ||
            !io_detail::get_int(j, "time", time, err)) {
            out.errors.push_back({lineno, err});
            continue;
        }
        p.time = static_cast<int>(time);
        const char* score_key = j.contains("trust") ? "trust" : "score";
        if (!j.contains(score_key) || !j[score_key].is_number()) {
            out.errors.push_back({lineno, "missing numeric 'trust' or 'score' field"});
            continue;
        }
        p.score = j[score_key].get<double>();
        if (!j.contains("label") || !j["label"].is_boolean()) {
            out.errors.push_back({lineno, "missing boolean 'label' field"});
            continue;
        }
        p.label = j["label"].get<bool>();
        out.predictions.push_back(std::move(p));
    }
    return out;
}

// ---- ground truth ----

struct TruthReadResult {
    GroundTruth truth;
    std::vector<LineError> errors;
};

/// Period records {entity, value, t_min, t_max}; point records may instead
/// carry a single "time" field.
inline TruthReadResult read_ground_truth(std::istream& in) {
    TruthReadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            out.errors.push_back({lineno, "not a JSON object"});
            continue;
        }
        std::string entity, value, err;
        if (!io_detail::get_string(j, "entity", entity, err) ||
            !io_detail::get_string(j, "value", value, err)) {
            out.errors.push_back({lineno, err});
            continue;
        }
        if (j.contains("time")) {
            long long t = 0;
            if (!io_detail::get_int(j, "time", t, err)) {
                out.errors.push_back({lineno, err});
                continue;
            }
            out.truth.add_point(entity, value, static_cast<int>(t));
            continue;
        }
        long long tmin = 0, tmax = 0;
        if (!io_detail::get_int(j, "t_min", tmin, err) || !io_detail::get_int(j, "t_max", tmax, err)) {
            out.errors.push_back({lineno, err});
            continue;
        }
        if (tmin > tmax) {
            out.errors.push_back({lineno, "t_min > t_max"});
            continue;
        }
        out.truth.add_period(entity, value, static_cast<int>(tmin), static_cast<int>(tmax));
    }
    return out;
}

// ---- eval report ----

inline json to_json(const EvalReport& r) {
    return {{"setting", std::string(to_string(r.setting))},
            {"precision", r.precision},
            {"recall", r.recall},
            {"recall_unrestricted", r.recall_unrestricted},
            {"f1", r.f1},
            {"pr_auc", r.pr_auc},
            {"tp", r.tp},
            {"fp", r.fp},
            {"fn", r.fn},
            {"truth_size", r.truth_size},
            {"truth_in_universe", r.truth_in_universe},
            {"precision_undefined", r.precision_undefined},
            {"recall_undefined", r.recall_undefined}};
}

// ---- files ----

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// FNV-1a 64-bit content digest; change detection, not cryptography.
inline std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string digest_file(const std::filesystem::path& path) {
    return fnv1a64_hex(read_file(path));
}

// ---- hyperparameter / config serialization for manifests ----

inline json to_json(const ConstraintSpec& s) {
    return {{"c1", s.c1}, {"c2", s.c2}, {"c3", s.c3}, {"c4", s.c4}};
}

inline json to_json(const Hyperparams& hp) {
    json rp = json::array();
    for (int i = 0; i < kNumSignals; ++i) {
        rp.push_back({{"signal", std::string(to_string(static_cast<SignalType>(i)))},
                      {"kappa0", hp.rate_prior[i].kappa0},
                      {"mu0", hp.rate_prior[i].mu0},
                      {"kappa1", hp.rate_prior[i].kappa1},
                      {"mu1", hp.rate_prior[i].mu1}});
    }
    return {{"beta0", hp.beta0},
            {"beta1", hp.beta1},
            {"rate_priors", rp},
            {"gamma", {{"c1", hp.gamma[0]}, {"c2", hp.gamma[1]}, {"c3", hp.gamma[2]}, {"c4", hp.gamma[3]}}}};
}

inline json to_json(const RunConfig& rc) {
    return {{"burn_in", rc.burn_in}, {"samples", rc.samples},   {"thinning", rc.thinning},
            {"chains", rc.chains},   {"threshold", rc.threshold}, {"seed", rc.seed}};
}

/// Everything needed to rerun the producing command. No timestamps, so a
/// rerun reproduces the manifest byte for byte.
struct Manifest {
    std::string command;
    std::vector<std::filesystem::path> inputs;
    json params;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
};

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    json inputs = json::array();
    for (const auto& p : m.inputs) {
        inputs.push_back({{"path", p.string()}, {"fnv1a64", digest_file(p)}});
    }
    const json j = {{"tool", kToolName}, {"version", kToolVersion}, {"command", m.command},
                    {"inputs", inputs},  {"params", m.params},      {"outputs", m.outputs},
                    {"seed", m.seed}};
    atomic_write(path, j.dump(2) + "\n");
}

// ---- line writers ----

inline std::string render_records(const std::vector<ExtractionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

inline std::string render_predictions(const std::vector<ScoredPrediction>& preds, const char* score_key) {
    std::string out;
    for (const auto& p : preds) {
        out += to_json(p, score_key).dump();
        out += '\n';
    }
    return out;
}

inline std::string render_truth_points(const Dataset& d, const Labeling& labels) {
    std::string out;
    for (std::size_t f = 0; f < d.num_facts(); ++f) {
        if (!labels[f]) continue;
        const json j = {{"entity", d.facts[f].entity},
                        {"value", d.facts[f].value},
                        {"t_min", d.facts[f].time},
                        {"t_max", d.facts[f].time}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::string render_reliability(const PosteriorSummary& s) {
    std::string out;
    for (std::size_t p = 0; p < s.sources.size(); ++p) {
        const json j = {{"pattern", s.sources[p].pattern},
                        {"signal", std::string(to_string(s.sources[p].signal))},
                        {"lambda0", s.lambda0_mean[p]},
                        {"lambda1", s.lambda1_mean[p]},
                        {"r", s.reliability[p]}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

struct ReliabilityReadResult {
    PosteriorSummary summary;  // sources + lambda means + reliability only
    std::vector<LineError> errors;
};

/// Reads a reliability file back into the summary fields the pattern
/// report needs.
inline ReliabilityReadResult read_reliability(std::istream& in) {
    ReliabilityReadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            out.errors.push_back({lineno, "not a JSON object"});
            continue;
        }
        std::string pattern, signal, err;
        if (!io_detail::get_string(j, "pattern", pattern, err) ||
            !io_detail::get_string(j, "signal", signal, err)) {
            out.errors.push_back({lineno, err});
            continue;
        }
        const auto sig = parse_signal(signal);
        if (!sig) {
            out.errors.push_back({lineno, "unknown signal \"" + signal + "\""});
            continue;
        }
        if (!j.contains("r") || !j["r"].is_number()) {
            out.errors.push_back({lineno, "missing numeric 'r' field"});
            continue;
        }
        out.summary.sources.push_back({pattern, *sig});
        out.summary.lambda0_mean.push_back(j.value("lambda0", 0.0));
        out.summary.lambda1_mean.push_back(j.value("lambda1", 0.0));
        out.summary.reliability.push_back(j["r"].get<double>());
    }
    return out;
}

}  // namespace ttd::io
