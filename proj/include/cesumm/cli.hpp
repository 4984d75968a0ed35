#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cesumm/cascade.hpp"
#include "cesumm/report.hpp"
#include "cesumm/rouge.hpp"

namespace cesumm {
namespace cli {

namespace fs = std::filesystem;

/// Parses a strict JSON config into CascadeConfig (and friends). Every key is
/// optional; unknown keys are rejected so typos fail loudly instead of
/// silently running defaults.
struct ToolConfig {
    CascadeConfig cascade;
    AnalyzerConfig analyzer;
    RougeConfig rouge;
};

namespace detail {

template <class T>
void read_number(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_number())
        throw ValidationError(where + ": field '" + key + "' must be a number");
    out = it->get<T>();
}

inline void read_bool(const nlohmann::json& j, const char* key, bool& out,
                      const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_boolean())
        throw ValidationError(where + ": field '" + key + "' must be a boolean");
    out = it->get<bool>();
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known)
            if (key == k) {
                found = true;
                break;
            }
        if (!found) throw ValidationError(where + ": unknown config field '" + key + "'");
    }
}

} // namespace detail

inline ToolConfig parse_config_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": config root must be a JSON object");
    detail::reject_unknown(j,
                           {"l_max", "l_bar", "adaptive_l0", "prune_k", "feedback_top_k",
                            "position_bias_b", "use_feedback_predictor",
                            "use_adaptive_position_bias", "expand_step1_queries",
                            "sampled_extraction", "ce_params", "analyzer", "rouge"},
                           where);
    ToolConfig config;
    auto& c = config.cascade;
    detail::read_number(j, "l_max", c.l_max, where);
    detail::read_number(j, "l_bar", c.l_bar, where);
    detail::read_number(j, "adaptive_l0", c.adaptive_l0, where);
    detail::read_number(j, "prune_k", c.prune_k, where);
    detail::read_number(j, "feedback_top_k", c.feedback_top_k, where);
    detail::read_number(j, "position_bias_b", c.position_bias_b, where);
    detail::read_bool(j, "use_feedback_predictor", c.use_feedback_predictor, where);
    detail::read_bool(j, "use_adaptive_position_bias", c.use_adaptive_position_bias, where);
    detail::read_bool(j, "expand_step1_queries", c.expand_step1_queries, where);
    detail::read_bool(j, "sampled_extraction", c.sampled_extraction, where);
    if (const auto it = j.find("ce_params"); it != j.end()) {
        detail::reject_unknown(*it,
                               {"sample_count", "elite_fraction", "smoothing", "max_iterations",
                                "stability_window", "stability_epsilon", "seed"},
                               where + ".ce_params");
        auto& p = c.ce_params;
        detail::read_number(*it, "sample_count", p.sample_count, where);
        detail::read_number(*it, "elite_fraction", p.elite_fraction, where);
        detail::read_number(*it, "smoothing", p.smoothing, where);
        detail::read_number(*it, "max_iterations", p.max_iterations, where);
        detail::read_number(*it, "stability_window", p.stability_window, where);
        detail::read_number(*it, "stability_epsilon", p.stability_epsilon, where);
        detail::read_number(*it, "seed", p.seed, where);
    }
    if (const auto it = j.find("analyzer"); it != j.end()) {
        detail::reject_unknown(
            *it, {"stemming_enabled", "lowercase_enabled", "bigrams_skip_stopwords", "stopwords"},
            where + ".analyzer");
        auto& a = config.analyzer;
        detail::read_bool(*it, "stemming_enabled", a.stemming_enabled, where);
        detail::read_bool(*it, "lowercase_enabled", a.lowercase_enabled, where);
        detail::read_bool(*it, "bigrams_skip_stopwords", a.bigrams_skip_stopwords, where);
        if (const auto sw = it->find("stopwords"); sw != it->end()) {
            if (!sw->is_array())
                throw ValidationError(where + ": analyzer.stopwords must be an array");
            a.stopwords.clear();
            for (const auto& e : *sw) {
                if (!e.is_string())
                    throw ValidationError(where + ": analyzer.stopwords must contain strings");
                a.stopwords.insert(e.get<std::string>());
            }
        }
    }
    if (const auto it = j.find("rouge"); it != j.end()) {
        detail::reject_unknown(*it,
                               {"stemming", "skip_distance", "include_unigrams", "f_alpha",
                                "length_truncation"},
                               where + ".rouge");
        auto& r = config.rouge;
        detail::read_bool(*it, "stemming", r.stemming, where);
        detail::read_number(*it, "skip_distance", r.skip_distance, where);
        detail::read_bool(*it, "include_unigrams", r.include_unigrams, where);
        detail::read_number(*it, "f_alpha", r.f_alpha, where);
        detail::read_number(*it, "length_truncation", r.length_truncation, where);
    }
    return config;
}

inline ToolConfig load_config(const std::optional<fs::path>& path) {
    if (!path) return ToolConfig{};
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path->string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path->string() + ": invalid JSON: " + e.what());
    }
    return parse_config_json(j, path->string());
}

/// Resolves a corpus argument to the topic files it names: either one JSON
/// file or a directory scanned for *.json, sorted by filename for a stable
/// topic order.
inline std::vector<fs::path> resolve_corpus_paths(const fs::path& corpus) {
    if (!fs::exists(corpus)) throw ValidationError("corpus path does not exist: " + corpus.string());
    if (fs::is_regular_file(corpus)) return {corpus};
    if (!fs::is_directory(corpus))
        throw ValidationError("corpus path is neither a file nor a directory: " + corpus.string());
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(corpus))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw ValidationError("corpus directory contains no .json files: " + corpus.string());
    return paths;
}

/// Worker cap: the CE_SUMM_THREADS environment variable when set, otherwise
/// the hardware concurrency.
inline unsigned worker_cap() {
    if (const char* env = std::getenv("CE_SUMM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ValidationError("CE_SUMM_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

inline void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write output file: " + path.string());
    out << content;
    if (!out) throw ValidationError("failed writing output file: " + path.string());
}

struct SummarizeArgs {
    fs::path corpus;
    std::optional<fs::path> config;
    std::string mode = "dual";
    std::size_t runs = 1;
    std::uint64_t seed_base = 0;
    fs::path out;
};

/// Seeded multi-run batch execution: every (topic, seed) pair is one task on
/// a bounded worker pool; when tasks are scarce, leftover workers go to the
/// in-run sampler instead. Outputs one summary JSON and one trace CSV per
/// task plus an aggregate report.csv.
inline int run_summarize(const SummarizeArgs& args) {
    const ToolConfig tool = load_config(args.config);
    const SummarizerMode mode = parse_mode(args.mode);
    if (args.runs == 0) throw ValidationError("--runs must be at least 1");
    const auto paths = resolve_corpus_paths(args.corpus);

    std::vector<TopicCorpus> topics;
    topics.reserve(paths.size());
    for (const auto& p : paths) topics.push_back(load_corpus(p, tool.analyzer));

    fs::create_directories(args.out);

    struct Task {
        std::size_t topic_index;
        std::size_t run_index;
    };
    std::vector<Task> tasks;
    for (std::size_t t = 0; t < topics.size(); ++t)
        for (std::size_t r = 0; r < args.runs; ++r) tasks.push_back({t, r});

    const unsigned cap = worker_cap();
    const unsigned workers = std::max(1u, std::min<unsigned>(cap, tasks.size()));
    const unsigned sampler_threads = std::max(1u, cap / workers);

    struct TaskOutput {
        SummaryResult result;
        double runtime_ms = 0.0;
    };
    std::vector<TaskOutput> outputs(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const Task& task = tasks[i];
                CascadeConfig config = tool.cascade;
                config.ce_params.seed = args.seed_base + task.run_index;
                config.threads = sampler_threads;
                const auto started = std::chrono::steady_clock::now();
                outputs[i].result = summarize(topics[task.topic_index].topic,
                                              topics[task.topic_index].documents, config, mode);
                outputs[i].runtime_ms = std::chrono::duration<double, std::milli>(
                                            std::chrono::steady_clock::now() - started)
                                            .count();
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    std::vector<RunReport> reports;
    for (std::size_t t = 0; t < topics.size(); ++t) {
        RunReport report;
        report.topic_id = topics[t].topic.topic_id;
        report.mode = to_string(mode);
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].topic_index != t) continue;
            const SummaryResult& result = outputs[i].result;
            char name[512];
            std::snprintf(name, sizeof(name), "%s__%s__seed%llu", report.topic_id.c_str(),
                          report.mode.c_str(),
                          static_cast<unsigned long long>(result.seed));
            const std::string trace_name = std::string(name) + ".trace.csv";
            std::string trace_csv;
            if (result.step1) {
                trace_csv = ce::trace_to_csv(result.step1->trace);
                const std::string step2 = ce::trace_to_csv(result.trace);
                trace_csv += step2.substr(step2.find('\n') + 1); // drop repeated header
            } else {
                trace_csv = ce::trace_to_csv(result.trace);
            }
            write_file(args.out / trace_name, trace_csv);
            const nlohmann::json summary =
                summary_to_json(result, report.topic_id, trace_name);
            write_file(args.out / (std::string(name) + ".json"), summary.dump(2) + "\n");
            report.scores.push_back(result.objective);
            report.runtime_ms += outputs[i].runtime_ms;
        }
        report.aggregate = aggregate_scores(report.scores);
        reports.push_back(std::move(report));
    }
    write_file(args.out / "report.csv", report_to_csv(reports));
    return 0;
}

struct EvaluateArgs {
    fs::path summaries;
    fs::path references;
    std::optional<fs::path> config;
    fs::path out;
};

/// Scores every summary JSON in a directory against reference summaries and
/// writes one CSV row per (topic, metric), averaging componentwise across a
/// topic's seeded runs.
inline int run_evaluate(const EvaluateArgs& args) {
    const ToolConfig tool = load_config(args.config);

    // References: one JSON file or a directory of them, keyed by topic_id.
    std::map<std::string, std::vector<std::string>> references;
    const auto load_reference_file = [&](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ValidationError("cannot open references file: " + p.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(p.string() + ": invalid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("topic_id") || !j.contains("references"))
            throw ValidationError(p.string() + ": expected {topic_id, references:[...]}");
        std::vector<std::string> refs;
        for (const auto& r : j["references"]) {
            if (!r.is_string())
                throw ValidationError(p.string() + ": references must be strings");
            refs.push_back(r.get<std::string>());
        }
        references[j["topic_id"].get<std::string>()] = std::move(refs);
    };
    if (fs::is_directory(args.references)) {
        std::vector<fs::path> paths;
        for (const auto& entry : fs::directory_iterator(args.references))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) load_reference_file(p);
    } else {
        load_reference_file(args.references);
    }
    if (references.empty()) throw ValidationError("no references loaded");

    // Candidate summaries, grouped by topic.
    if (!fs::is_directory(args.summaries))
        throw ValidationError("summaries path is not a directory: " + args.summaries.string());
    std::vector<fs::path> summary_paths;
    for (const auto& entry : fs::directory_iterator(args.summaries))
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "report.csv")
            summary_paths.push_back(entry.path());
    std::sort(summary_paths.begin(), summary_paths.end());
    if (summary_paths.empty())
        throw ValidationError("no summary .json files in " + args.summaries.string());

    std::map<std::string, std::vector<std::string>> candidates; // topic -> texts
    for (const auto& p : summary_paths) {
        std::ifstream in(p, std::ios::binary);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(p.string() + ": invalid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("topic_id") || !j.contains("summary"))
            throw ValidationError(p.string() + ": not a summary file");
        std::string text;
        for (const auto& s : j["summary"]) {
            if (!text.empty()) text.push_back(' ');
            text.append(s.at("text").get<std::string>());
        }
        candidates[j["topic_id"].get<std::string>()].push_back(std::move(text));
    }

    std::string csv = "topic_id,metric,recall,precision,f\n";
    char row[256];
    for (const auto& [topic_id, texts] : candidates) {
        const auto ref_it = references.find(topic_id);
        if (ref_it == references.end())
            throw ValidationError("no references for topic '" + topic_id + "'");
        std::vector<std::vector<std::string>> ref_tokens;
        for (const auto& r : ref_it->second)
            ref_tokens.push_back(rouge_tokenize(r, tool.rouge));

        struct Metric {
            const char* name;
            int n; // 0 means the skip-bigram metric
        };
        static constexpr Metric metrics[] = {{"rouge-1", 1}, {"rouge-2", 2}, {"rouge-su4", 0}};
        for (const Metric& metric : metrics) {
            RougeScore mean;
            for (const auto& text : texts) {
                const auto cand = rouge_tokenize(text, tool.rouge);
                const RougeScore s =
                    metric.n == 0
                        ? rouge_su(cand, ref_tokens, tool.rouge)
                        : rouge_n(cand, ref_tokens, metric.n, tool.rouge);
                mean.recall += s.recall;
                mean.precision += s.precision;
                mean.f += s.f;
            }
            const double count = static_cast<double>(texts.size());
            std::snprintf(row, sizeof(row), "%s,%s,%.17g,%.17g,%.17g\n", topic_id.c_str(),
                          metric.name, mean.recall / count, mean.precision / count,
                          mean.f / count);
            csv += row;
        }
    }
    write_file(args.out, csv);
    return 0;
}

struct ProfileArgs {
    fs::path corpus;
    std::optional<fs::path> config;
    std::string budgets = "250,500,1000,1500";
    fs::path out;
};

/// Emits the saliency/focus tradeoff table across budgets for every topic.
inline int run_profile(const ProfileArgs& args) {
    const ToolConfig tool = load_config(args.config);
    std::vector<std::uint64_t> budgets;
    std::size_t pos = 0;
    while (pos <= args.budgets.size()) {
        const std::size_t comma = args.budgets.find(',', pos);
        const std::string part =
            args.budgets.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        char* end = nullptr;
        const unsigned long long v = std::strtoull(part.c_str(), &end, 10);
        if (part.empty() || end == part.c_str() || *end != '\0' || v == 0)
            throw ValidationError("--budgets: '" + part + "' is not a positive integer");
        budgets.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] <= budgets[i - 1])
            throw ValidationError("--budgets must be strictly ascending");

    const auto paths = resolve_corpus_paths(args.corpus);
    std::string csv = "topic_id,budget,saliency,focus,word_count,status\n";
    char row[256];
    for (const auto& p : paths) {
        const TopicCorpus corpus = load_corpus(p, tool.analyzer);
        CascadeConfig config = tool.cascade;
        config.threads = worker_cap();
        const auto rows = tradeoff_profile(corpus.topic, corpus.documents, config,
                                           std::span<const std::uint64_t>(budgets));
        for (const TradeoffRow& r : rows) {
            std::snprintf(row, sizeof(row), "%s,%llu,%.17g,%.17g,%llu,%s\n",
                          corpus.topic.topic_id.c_str(),
                          static_cast<unsigned long long>(r.budget), r.saliency, r.focus,
                          static_cast<unsigned long long>(r.word_count),
                          r.feasible ? "ok" : "infeasible");
            csv += row;
        }
    }
    write_file(args.out, csv);
    return 0;
}

/// Top-level argument parsing and exit-code mapping: 1 for input/validation
/// problems, 2 when the optimizer cannot make progress, 3 for internal bugs.
inline int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Query-focused extractive multi-document summarizer"};
    app.require_subcommand(1);

    SummarizeArgs sum;
    auto* summarize_cmd =
        app.add_subcommand("summarize", "Run seeded summarization over a corpus");
    summarize_cmd->add_option("--corpus", sum.corpus, "Corpus JSON file or directory")
        ->required();
    summarize_cmd->add_option("--config", sum.config, "Config JSON file");
    summarize_cmd->add_option("--mode", sum.mode, "ces | ces-plus | dual | dual-adaptive");
    summarize_cmd->add_option("--runs", sum.runs, "Seeded runs per topic");
    summarize_cmd->add_option("--seed-base", sum.seed_base, "First seed; run r uses seed+r");
    summarize_cmd->add_option("--out", sum.out, "Output directory")->required();

    EvaluateArgs eval;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score summaries against references");
    evaluate_cmd->add_option("--summaries", eval.summaries, "Directory of summary JSON files")
        ->required();
    evaluate_cmd->add_option("--references", eval.references, "References JSON file or directory")
        ->required();
    evaluate_cmd->add_option("--config", eval.config, "Config JSON file");
    evaluate_cmd->add_option("--out", eval.out, "Score CSV path")->required();

    ProfileArgs prof;
    auto* profile_cmd = app.add_subcommand("profile", "Saliency/focus tradeoff across budgets");
    profile_cmd->add_option("--corpus", prof.corpus, "Corpus JSON file or directory")->required();
    profile_cmd->add_option("--config", prof.config, "Config JSON file");
    profile_cmd->add_option("--budgets", prof.budgets, "Comma-separated ascending word budgets");
    profile_cmd->add_option("--out", prof.out, "Tradeoff CSV path")->required();

    try {
        app.parse(argc, argv);
        if (summarize_cmd->parsed()) return run_summarize(sum);
        if (evaluate_cmd->parsed()) return run_evaluate(eval);
        if (profile_cmd->parsed()) return run_profile(prof);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const OptimizationError& e) {
        std::cerr << "optimization error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const EvaluationError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace cli
} // namespace cesumm
