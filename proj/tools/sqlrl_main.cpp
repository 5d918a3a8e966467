/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqlrl/curation.hpp"
#include "sqlrl/dataset.hpp"
#include "sqlrl/demo.hpp"
#include "sqlrl/error.hpp"
#include "sqlrl/eval.hpp"
#include "sqlrl/protocol.hpp"
#include "sqlrl/provider.hpp"
#include "sqlrl/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Written next to every output file. A run that dies halfway still leaves
// the lines written so far plus a manifest saying so.
class OutputSink {
public:
    OutputSink(std::string command, fs::path path) : command_(std::move(command)), path_(std::move(path))
    {
        if (path_.empty()) return;
        if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
        file_.open(path_, std::ios::binary | std::ios::trunc);
        if (!file_) throw sqlrl::Error(sqlrl::ErrorKind::InvalidInput, "cannot write " + path_.string());
    }

    ~OutputSink()
    {
        if (!finished_) finish("partial", error_.empty() ? "interrupted" : error_);
    }

    void line(const std::string& text)
    {
        if (path_.empty()) {
            std::cout << text << '\n';
        } else {
            file_ << text << '\n';
            file_.flush();
        }
        ++written_;
    }

    void fail(std::string message) { error_ = std::move(message); }

    void finish(const std::string& status = "complete", const std::string& error = {})
    {
        finished_ = true;
        if (path_.empty()) return;
        file_.close();
        json manifest{{"command", command_}, {"output", path_.filename().string()}, {"status", status},
                      {"records_written", written_}};
        if (!error.empty()) manifest["error"] = error;
        for (const auto& [k, v] : extra_.items()) manifest[k] = v;
        std::ofstream(path_.string() + ".manifest.json") << manifest.dump(2) << '\n';
    }

    json& extra() { return extra_; }

private:
    std::string command_;
    fs::path path_;
    std::ofstream file_;
    std::size_t written_ = 0;
    bool finished_ = false;
    std::string error_;
    json extra_ = json::object();
};

struct ProviderFlags {
    std::string transcript;
    std::string endpoint;

    void add(CLI::App* sub)
    {
        auto* t = sub->add_option("--transcript", transcript, "Scripted provider transcript (JSONL)");
        auto* e = sub->add_option("--provider", endpoint, "Completion endpoint host:port");
        t->excludes(e);
    }

    [[nodiscard]] std::unique_ptr<sqlrl::CompletionProvider> make() const
    {
        if (!transcript.empty()) {
            return std::make_unique<sqlrl::ScriptedProvider>(sqlrl::ScriptedProvider::read_transcript(transcript));
        }
        if (!endpoint.empty()) return std::make_unique<sqlrl::LineProtocolProvider>(sqlrl::net::parse_endpoint(endpoint));
        throw sqlrl::Error(sqlrl::ErrorKind::InvalidConfig, "one of --transcript or --provider is required");
    }
};

void print_records_summary(const std::vector<sqlrl::CurationRecord>& records)
{
    std::size_t kept = 0;
    for (const auto& r : records) kept += r.is_kept() ? 1 : 0;
    std::cerr << "kept " << kept << " of " << records.size() << '\n';
}

// ---------------------------------------------------------------------------

struct FilterCmd {
    std::string in, out;
    int timeout_ms = sqlrl::kDefaultTimeoutMs;
    int threads = 0;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("filter", "Drop samples whose gold SQL fails, times out or returns no rows");
        sub->add_option("--in", in, "Dataset (JSONL)")->required();
        sub->add_option("--out", out, "Curation records (JSONL)")->required();
        sub->add_option("--timeout-ms", timeout_ms, "Gold execution budget")->check(CLI::PositiveNumber);
        sub->add_option("--threads", threads, "OpenMP threads (0: runtime default)");
        sub->callback([this] { run(); });
    }

    void run()
    {
        const auto samples = sqlrl::read_samples(in);
        OutputSink sink("filter", out);
        const auto records = sqlrl::curation::filter_gold_executable(samples, timeout_ms, threads);
        for (std::size_t i = 0; i < samples.size(); ++i) sink.line(sqlrl::record_to_json(samples[i], records[i]).dump());
        sink.finish();
        print_records_summary(records);
    }
};

struct SynthCmd {
    std::string in, out, schema_pool, table_dist, prompts_file, db_dir;
    ProviderFlags provider;
    sqlrl::curation::SynthesisOptions options;
    std::uint64_t seed = 0;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("synth", "Synthesize inserts, add distractor tables, apply final selection");
        sub->add_option("--in", in, "Dataset (JSONL)")->required();
        sub->add_option("--out", out, "Curation records (JSONL)")->required();
        provider.add(sub);
        sub->add_option("--schema-pool", schema_pool, "Same-domain table pool (JSONL of {domain, table_schema})");
        sub->add_option("--table-dist", table_dist, "Table-count histogram (JSON)");
        sub->add_option("--prompts", prompts_file, "Prompt template overrides (JSON)");
        sub->add_option("--db-dir", db_dir, "Write rebuilt databases here instead of over the originals");
        sub->add_option("--max-rounds", options.max_rounds, "Insert-synthesis rounds")->check(CLI::PositiveNumber);
        sub->add_option("--timeout-ms", options.timeout_ms, "Execution budget")->check(CLI::PositiveNumber);
        sub->add_option("--temperature", options.temperature, "Sampling temperature for the provider");
        sub->add_option("--seed", seed, "Distractor sampling seed");
        sub->callback([this] { run(); });
    }

    void run()
    {
        auto samples = sqlrl::read_samples(in);
        auto prov = provider.make();
        const auto prompts =
            prompts_file.empty() ? sqlrl::curation::CurationPrompts::standard()
                                 : sqlrl::curation::CurationPrompts::from_file(prompts_file);
        std::vector<sqlrl::curation::SchemaPoolEntry> pool;
        if (!schema_pool.empty()) pool = sqlrl::curation::read_schema_pool(schema_pool);
        sqlrl::curation::TableCountDistribution dist{{{1, 1.0}}, 0};
        if (!table_dist.empty()) {
            std::ifstream f(table_dist);
            if (!f) throw sqlrl::Error(sqlrl::ErrorKind::InvalidInput, "cannot read " + table_dist);
            dist = sqlrl::curation::TableCountDistribution::from_json(json::parse(f));
        }
        if (!db_dir.empty()) fs::create_directories(db_dir);

        OutputSink sink("synth", out);
        std::vector<sqlrl::CurationRecord> records;
        int calls = 0;
        try {
            for (std::size_t i = 0; i < samples.size(); ++i) {
                auto sample = samples[i];
                if (!db_dir.empty()) {
                    sample.db = sqlrl::DatabaseRef(fs::path(db_dir) / (sample.id + ".sqlite"));
                }
                auto synth = sqlrl::curation::synthesize_inserts(sample, *prov, options, prompts);
                calls += synth.provider_calls;
                sqlrl::CurationRecord record;
                if (!synth.success) {
                    record = sqlrl::CurationRecord::dropped(sample.id, sqlrl::DropReason::EmptyGoldResult,
                                                            "no rows after " + std::to_string(synth.provider_calls) +
                                                                " rounds");
                } else {
                    sample = synth.sample;
                    if (!pool.empty()) sample = sqlrl::curation::add_distractor_tables(sample, pool, dist, seed + i).sample;
                    record = sqlrl::curation::final_selection(sample, options.timeout_ms);
                }
                auto line = sqlrl::record_to_json(sample, record);
                // Provider revisions are kept next to the original, not judged.
                if (synth.success) {
                    line["original_gold_sql"] = synth.original.gold_sql;
                    if (synth.original.schema_sql) line["original_schema_sql"] = *synth.original.schema_sql;
                }
                sink.line(line.dump());
                records.push_back(record);
            }
        } catch (const std::exception& e) {
            sink.extra()["provider_calls"] = calls;
            sink.fail(e.what());
            throw;
        }
        sink.extra()["provider_calls"] = calls;
        sink.finish();
        print_records_summary(records);
    }
};

struct ModelFilterCmd {
    std::string in, out;
    ProviderFlags provider;
    sqlrl::curation::ModelFilterOptions options;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("model-filter", "Keep samples a strong model solves at least once in k tries");
        sub->add_option("--in", in, "Dataset (JSONL)")->required();
        sub->add_option("--out", out, "Curation records (JSONL)")->required();
        provider.add(sub);
        sub->add_option("--k", options.k, "Generations per sample")->check(CLI::PositiveNumber);
        sub->add_option("--temperature", options.temperature, "Sampling temperature");
        sub->add_option("--timeout-ms", options.timeout_ms, "Execution budget")->check(CLI::PositiveNumber);
        sub->callback([this] { run(); });
    }

    void run()
    {
        const auto samples = sqlrl::read_samples(in);
        auto prov = provider.make();
        OutputSink sink("model-filter", out);
        const auto result = sqlrl::curation::model_filter(samples, *prov, options);
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            sink.line(sqlrl::record_to_json(samples[i], result.records[i]).dump());
        }
        print_records_summary(result.records);
        if (result.aborted) {
            sink.fail(result.abort_detail);
            throw sqlrl::Error(sqlrl::ErrorKind::ProviderUnavailable, result.abort_detail);
        }
        sink.finish();
    }
};

struct SelfCorrectCmd {
    std::string in, out, db, prompts_file;
    ProviderFlags provider;
    int max_try = 3;
    int timeout_ms = sqlrl::kDefaultTimeoutMs;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("self-correct", "Repair failing queries and refine queries with similar errors");
        sub->add_option("--in", in, "SQL script with the queries to check")->required();
        sub->add_option("--db", db, "SQLite database")->required();
        sub->add_option("--out", out, "Surviving queries with their rows (JSONL)")->required();
        provider.add(sub);
        sub->add_option("--prompts", prompts_file, "Prompt template overrides (JSON)");
        sub->add_option("--max-try", max_try, "Correction attempts per query")->check(CLI::NonNegativeNumber);
        sub->add_option("--timeout-ms", timeout_ms, "Execution budget")->check(CLI::PositiveNumber);
        sub->callback([this] { run(); });
    }

    void run()
    {
        std::ifstream f(in);
        if (!f) throw sqlrl::Error(sqlrl::ErrorKind::InvalidInput, "cannot read " + in);
        const std::string script((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        const auto prompts =
            prompts_file.empty() ? sqlrl::curation::CurationPrompts::standard()
                                 : sqlrl::curation::CurationPrompts::from_file(prompts_file);
        auto prov = provider.make();
        OutputSink sink("self-correct", out);
        const auto result = sqlrl::curation::self_correct_workflow(sqlrl::split_statements(script),
                                                                   sqlrl::DatabaseRef(db), *prov, max_try, prompts,
                                                                   timeout_ms);
        for (const auto& q : result.results) {
            json rows = json::array();
            for (const auto& row : q.rows) {
                json cells = json::array();
                for (const auto& cell : row) cells.push_back(sqlrl::format_cell(cell));
                rows.push_back(cells);
            }
            sink.line(json{{"sql", q.sql}, {"rows", rows}}.dump());
        }
        sink.extra()["correction_calls"] = result.correction_calls;
        sink.extra()["refinement_calls"] = result.refinement_calls;
        sink.finish();
    }
};

struct ScoreCmd {
    std::string in, out;
    int timeout_ms = sqlrl::kDefaultTimeoutMs;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("score", "Score a file of requests exactly as the service would");
        sub->add_option("--in", in, "Requests, one JSON object per line")->required();
        sub->add_option("--out", out, "Responses (default: stdout)");
        sub->add_option("--timeout-ms", timeout_ms, "Default per-query budget")->check(CLI::PositiveNumber);
        sub->callback([this] { run(); });
    }

    void run()
    {
        std::ifstream f(in);
        if (!f) throw sqlrl::Error(sqlrl::ErrorKind::InvalidInput, "cannot read " + in);
        sqlrl::RewardOptions defaults;
        defaults.timeout_ms = timeout_ms;
        sqlrl::protocol::Session session(defaults);
        OutputSink sink("score", out);
        std::string line;
        while (std::getline(f, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (auto response = session.handle(line)) sink.line(*response);
        }
        sink.finish();
    }
};

struct EvalCmd {
    std::string in, predictions, out, benchmark = "dev";
    int vote = 0;
    int timeout_ms = sqlrl::kDefaultTimeoutMs;
    int threads = 0;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("eval", "Execution accuracy of predictions, greedy or by majority vote");
        sub->add_option("--in", in, "Dataset (JSONL)")->required();
        sub->add_option("--predictions", predictions, "JSONL of {sample_id, candidates}")->required();
        sub->add_option("--vote", vote, "Majority vote over the first N candidates (0: greedy)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--benchmark", benchmark, "Name of this benchmark in the report");
        sub->add_option("--out", out, "Write the report as JSON");
        sub->add_option("--timeout-ms", timeout_ms, "Per-query budget")->check(CLI::PositiveNumber);
        sub->add_option("--threads", threads, "OpenMP threads (0: runtime default)");
        sub->callback([this] { run(); });
    }

    void run()
    {
        const auto samples = sqlrl::read_samples(in);
        const auto preds = sqlrl::read_predictions(predictions);
        sqlrl::RewardOptions options;
        options.timeout_ms = timeout_ms;

        std::vector<sqlrl::ModelOutput> chosen;
        std::size_t missing = 0;
        for (const auto& s : samples) {
            const auto it = preds.find(s.id);
            if (it == preds.end() || it->second.empty()) {
                ++missing;
                chosen.push_back({""});
                continue;
            }
            if (vote == 0) {
                chosen.push_back({it->second.front()});
                continue;
            }
            std::vector<sqlrl::ModelOutput> pool;
            for (std::size_t i = 0; i < it->second.size() && i < static_cast<std::size_t>(vote); ++i) {
                pool.push_back({it->second[i]});
            }
            const auto pick = sqlrl::eval::majority_vote_index(pool, s.db, options);
            chosen.push_back(pick ? pool[*pick] : sqlrl::ModelOutput{""});
        }

        sqlrl::eval::EvalReport report;
        report.per_benchmark[benchmark] = sqlrl::eval::execution_accuracy(samples, chosen, options, threads);
        report.metadata = {{"mode", vote == 0 ? "greedy" : "vote"},
                           {"vote", vote},
                           {"timeout_ms", timeout_ms},
                           {"row_limit", options.row_limit},
                           {"schema_format", sqlrl::eval::kSchemaFormat},
                           {"missing_predictions", missing}};
        std::cout << report.table();
        if (!out.empty()) {
            if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
            std::ofstream(out) << report.to_json().dump(2) << '\n';
        }
    }
};

struct ServeCmd {
    std::string bind;
    bool stdio = false;
    sqlrl::service::ServiceOptions options;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("serve", "Batch reward-scoring service over newline-delimited JSON");
        sub->add_option("--bind", bind, "host:port to listen on")->envname(sqlrl::service::kBindAddressEnv);
        sub->add_flag("--stdio", stdio, "Serve standard input/output instead of a socket");
        sub->add_option("--workers", options.workers, "Scoring threads")->check(CLI::PositiveNumber);
        sub->add_option("--timeout-ms", options.default_timeout_ms, "Default per-query budget")
            ->check(CLI::PositiveNumber);
        sub->add_option("--queue", options.queue_capacity, "Pending-request capacity")->check(CLI::PositiveNumber);
        sub->callback([this] { run(); });
    }

    void run()
    {
        sqlrl::service::ScoringService service(options);
        if (stdio) {
            service.serve_stream(std::cin, std::cout);
            return;
        }
        const auto endpoint = sqlrl::net::parse_endpoint(bind.empty() ? "127.0.0.1:7878" : bind);
        service.serve_tcp(endpoint, [&](int port) {
            std::cerr << "listening on " << endpoint.host << ':' << port << std::endl;
        });
    }
};

struct DemoCmd {
    std::string out, work_dir, mode = "online";
    sqlrl::demo::DemoOptions options;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("grpo-demo", "Toy end-to-end GRPO run on the bundled mini-corpus");
        sub->add_option("--steps", options.steps, "Policy updates")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", options.seed, "Sampling seed");
        sub->add_option("--out", out, "Trajectory (JSONL; default: stdout)");
        sub->add_option("--work-dir", work_dir, "Where the demo databases are written");
        sub->add_option("--learning-rate", options.learning_rate, "Gradient-ascent step size");
        sub->add_option("--mode", mode, "online or batch")->check(CLI::IsMember({"online", "batch"}));
        sub->add_option("--epoch-steps", options.epoch_steps, "Batch mode: updates per sampled batch")
            ->check(CLI::PositiveNumber);
        sub->add_option("--threads", options.threads, "OpenMP threads (0: runtime default)");
        sub->add_option("--group-size", options.config.group_size, "Rollouts per prompt");
        sub->add_option("--clip-ratio", options.config.clip_ratio, "Ratio clipping epsilon");
        sub->add_option("--kl-coeff", options.config.kl_coeff, "KL penalty weight");
        sub->add_option("--temperature", options.config.temperature, "Sampling temperature");
        sub->callback([this] { run(); });
    }

    void run()
    {
        options.mode = mode == "batch" ? sqlrl::demo::Mode::Batch : sqlrl::demo::Mode::Online;
        const fs::path dir = work_dir.empty() ? fs::temp_directory_path() / "sqlrl-demo" : fs::path(work_dir);
        fs::create_directories(dir);
        const auto corpus = sqlrl::demo::build_corpus(dir);
        const auto result = sqlrl::demo::run(corpus, options);

        OutputSink sink("grpo-demo", out);
        std::istringstream lines(result.trajectory_jsonl());
        for (std::string line; std::getline(lines, line);) sink.line(line);
        sink.extra()["seed"] = options.seed;
        sink.extra()["steps"] = options.steps;
        sink.finish();
        std::cerr << "greedy EX " << result.initial_ex << "% -> " << result.final_ex << "%";
        if (result.first_perfect_step) std::cerr << " (100% first reached at step " << *result.first_perfect_step << ")";
        std::cerr << '\n';
    }
};

struct ReportCmd {
    std::vector<std::string> inputs;
    std::string out;

    void add(CLI::App& app)
    {
        auto* sub = app.add_subcommand("report", "Merge evaluation reports and print the summary table");
        sub->add_option("--in", inputs, "Report JSON files (later files win on name clashes)")->required();
        sub->add_option("--out", out, "Write the merged report");
        sub->callback([this] { run(); });
    }

    void run()
    {
        sqlrl::eval::EvalReport merged;
        for (const auto& path : inputs) {
            std::ifstream f(path);
            if (!f) throw sqlrl::Error(sqlrl::ErrorKind::InvalidInput, "cannot read " + path);
            merged.merge(sqlrl::eval::EvalReport::from_json(json::parse(f)));
        }
        std::cout << merged.table();
        if (!out.empty()) std::ofstream(out) << merged.to_json().dump(2) << '\n';
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Execution-reward tooling for text-to-SQL: curation, scoring, evaluation and a toy GRPO loop"};
    app.set_config("--config", "", "TOML file; keys are flag names, grouped in [subcommand] tables");
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);

    FilterCmd filter;
    SynthCmd synth;
    ModelFilterCmd model_filter;
    SelfCorrectCmd self_correct;
    ScoreCmd score;
    EvalCmd eval;
    ServeCmd serve;
    DemoCmd demo;
    ReportCmd report;
    filter.add(app);
    synth.add(app);
    model_filter.add(app);
    self_correct.add(app);
    score.add(app);
    eval.add(app);
    serve.add(app);
    demo.add(app);
    report.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const sqlrl::Error& e) {
        std::cerr << "error: " << sqlrl::to_string(e.kind()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
