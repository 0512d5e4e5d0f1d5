// quirkprint: browser fingerprinting from HTML-parser quirks.
//
//   quirkprint fingerprint --dataset known.csv --query probe.csv [--row N]
//   quirkprint dist-table  --dataset known.csv [--efficiency]
//   quirkprint train       --dataset labeled.csv --tree out.tree [--split binary|multiway]
//   quirkprint classify    --tree family.tree --dataset probes.csv
//   quirkprint timemap     --dataset known.csv [--family Opera]
//   quirkprint serve       --corpus corpus.jsonl --listen 127.0.0.1:8080 | --config service.json
//   quirkprint simulate    --profiles profiles.csv (--server host:port | --corpus corpus.jsonl)

#include <atomic>
#include <csignal>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "quirkprint/analysis.hpp"
#include "quirkprint/classifier.hpp"
#include "quirkprint/corpus.hpp"
#include "quirkprint/dataset_io.hpp"
#include "quirkprint/distance.hpp"
#include "quirkprint/driver.hpp"
#include "quirkprint/error.hpp"
#include "quirkprint/http_service.hpp"
#include "quirkprint/sim_agent.hpp"

namespace qp = quirkprint;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qp::Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

qp::SignatureDataset load_dataset(const std::string& path, double min_confidence,
                                  const std::string& exclusions_path = {}) {
    auto imported = qp::import_signatures(path, min_confidence);
    if (!imported.excluded.empty()) {
        std::cerr << path << ": " << imported.excluded.size() << " row(s) below confidence " << min_confidence
                  << " excluded\n";
    }
    if (!exclusions_path.empty()) {
        std::ofstream out(exclusions_path);
        if (!out) throw qp::Error("cannot write " + exclusions_path);
        qp::write_exclusion_report(out, imported.excluded);
    }
    return std::move(imported.dataset);
}

qp::BrowserSignature fetch_live_signature(const std::string& server, const std::string& token) {
    auto ep = qp::parse_endpoint(server);
    httplib::Client client(ep.host, ep.port);
    auto res = client.Get("/sig/" + token);
    if (!res) throw qp::Error("GET /sig/" + token + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw qp::ProtocolError("GET /sig/" + token + ": HTTP " + std::to_string(res->status));
    auto imported = qp::parse_signatures(res->body, 0.0, "/sig/" + token);
    if (imported.dataset.size() != 1) throw qp::ProtocolError("signature response must hold one row");
    return imported.dataset[0];
}

// Rebuilds `sig` over `schema`; attributes the signature lacks become NA.
qp::BrowserSignature align(const qp::BrowserSignature& sig, const qp::Schema& schema) {
    if (qp::same_schema(sig.attributes, schema)) {
        auto out = sig;
        out.attributes = schema;
        return out;
    }
    qp::BrowserSignature out = sig;
    out.attributes = schema;
    out.outcomes.assign(schema->size(), qp::Outcome::NA);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (auto j = schema->find((*sig.attributes)[i])) out.outcomes[*j] = sig.outcomes[i];
    }
    return out;
}

std::atomic<qp::HttpService*> g_service{nullptr};

void on_signal(int) {
    if (auto* s = g_service.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quirkprint: fingerprint browsers from HTML-parser quirks"};
    app.require_subcommand(1);

    std::string dataset_path, corpus_path, tree_path, family_name, listen = "127.0.0.1:8080", split_name = "binary";
    double min_confidence = qp::kDefaultMinConfidence;
    std::string exclusions_path;

    auto add_dataset = [&](CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--dataset", dataset_path, "Signature file (CSV)");
        if (required) opt->required();
        cmd->add_option("--min-confidence", min_confidence, "Drop rows below this confidence")
            ->capture_default_str()
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--exclusions", exclusions_path, "Write the exclusion report here");
    };

    // fingerprint
    auto* fp = app.add_subcommand("fingerprint", "Nearest neighbours, MHD, MDF, MDD and a verdict for one signature");
    add_dataset(fp);
    std::string query_path, token, server;
    std::size_t query_row = 0;
    double outlier_factor = qp::kDefaultOutlierFactor;
    fp->add_option("--query", query_path, "Signature file holding the query");
    fp->add_option("--row", query_row, "Row of --query to fingerprint")->capture_default_str();
    fp->add_option("--token", token, "Finalized session token to fetch from --server");
    fp->add_option("--server", server, "Test-driver address, host:port");
    fp->add_option("--outlier-factor", outlier_factor, "Outlier threshold as a multiple of the median MDD")
        ->capture_default_str();

    // dist-table
    auto* dt = app.add_subcommand("dist-table", "Per-browser distance table ordered by MDF");
    add_dataset(dt);
    bool with_efficiency = false;
    dt->add_flag("--efficiency", with_efficiency, "Append the MHD fingerprinting-efficiency summary");

    // train
    auto* train = app.add_subcommand("train", "Induce a family decision tree and evaluate it on the training set");
    add_dataset(train);
    std::size_t max_depth = 0;
    train->add_option("--tree", tree_path, "Output tree file")->required();
    train->add_option("--split", split_name, "Split scheme")->check(CLI::IsMember({"binary", "multiway"}))
        ->capture_default_str();
    train->add_option("--max-depth", max_depth, "Depth limit (0 = none)");

    // classify
    auto* cls = app.add_subcommand("classify", "Print the family the tree assigns to each row");
    add_dataset(cls);
    cls->add_option("--tree", tree_path, "Tree file")->required();

    // timemap
    auto* tm = app.add_subcommand("timemap", "Release-date gap versus MHD for every pair of browsers");
    add_dataset(tm);
    tm->add_option("--family", family_name, "Only pairs within this family");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the test-driver HTTP service");
    std::string config_path, runner_path, event_log_dir;
    serve->add_option("--config", config_path, "Service config (JSON)");
    serve->add_option("--corpus", corpus_path, "Corpus file (JSON lines)");
    serve->add_option("--listen", listen, "Listen address")->capture_default_str();
    serve->add_option("--runner", runner_path, "Static page served at /runner");
    serve->add_option("--event-log", event_log_dir, "Directory for per-session event logs");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Replay quirk profiles against a test driver");
    std::string profiles_path, mechanism_name = "img_beacon", out_path;
    sim->add_option("--profiles", profiles_path, "Profile file (P/S/N = executes/parses_only/skips)")->required();
    sim->add_option("--server", server, "Test-driver address, host:port");
    sim->add_option("--corpus", corpus_path, "Start an in-process driver over this corpus instead");
    sim->add_option("--mechanism", mechanism_name, "Callback mechanism agents fire")
        ->check(CLI::IsMember({"location_redirect", "cookie", "xhr", "img_beacon"}))
        ->capture_default_str();
    sim->add_option("--out", out_path, "Write collected signatures here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fp) {
            auto ds = load_dataset(dataset_path, min_confidence, exclusions_path);
            qp::BrowserSignature query;
            if (!token.empty()) {
                if (server.empty()) throw qp::ValidationError("--token needs --server");
                query = fetch_live_signature(server, token);
            } else if (!query_path.empty()) {
                auto q = qp::import_signatures(query_path, 0.0).dataset;
                if (query_row >= q.size()) throw qp::ValidationError("--row " + std::to_string(query_row) + " out of range");
                query = q[query_row];
            } else {
                throw qp::ValidationError("fingerprint needs --query or --token");
            }
            qp::write_fingerprint_report(std::cout, qp::fingerprint(align(query, ds.attributes()), ds, outlier_factor));
        } else if (*dt) {
            auto ds = load_dataset(dataset_path, min_confidence, exclusions_path);
            qp::write_distance_table(std::cout, qp::distance_table(ds, std::max(1u, std::thread::hardware_concurrency())));
            if (with_efficiency && ds.size() >= 2) {
                std::cout << '\n';
                qp::write_efficiency(std::cout, qp::fingerprint_efficiency(ds));
            }
        } else if (*train) {
            auto ds = qp::LabeledDataset::from_signatures(load_dataset(dataset_path, min_confidence, exclusions_path));
            qp::InductionConfig cfg;
            cfg.split = *qp::split_scheme_from_string(split_name);
            if (max_depth > 0) cfg.max_depth = max_depth;
            auto tree = qp::induce_tree(ds, cfg);
            std::ofstream out(tree_path, std::ios::binary | std::ios::trunc);
            if (!out) throw qp::Error("cannot write " + tree_path);
            out << qp::serialize_tree(tree);
            std::cout << qp::serialize_tree(tree) << '\n';
            std::cout << "Tested attributes: " << tree.tested_attributes().size() << '\n';
            qp::write_confusion_matrix(std::cout, qp::evaluate(tree, ds));
        } else if (*cls) {
            auto tree = qp::parse_tree(read_file(tree_path), tree_path);
            auto ds = load_dataset(dataset_path, min_confidence, exclusions_path);
            std::cout << "browser,family\n";
            for (const auto& sig : ds) std::cout << qp::csv_escape(sig.label) << ',' << qp::to_string(qp::classify(tree, sig)) << '\n';
        } else if (*tm) {
            std::optional<qp::Family> family;
            if (!family_name.empty()) {
                family = qp::family_from_string(family_name);
                if (!family) throw qp::ValidationError("unknown family '" + family_name + "'");
            }
            auto ds = load_dataset(dataset_path, min_confidence, exclusions_path);
            qp::write_timemap(std::cout, qp::timemap(ds, family));
        } else if (*serve) {
            qp::ServiceConfig cfg;
            if (!config_path.empty()) {
                cfg = qp::ServiceConfig::load(config_path);
            }
            if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
            if (serve->count("--listen") > 0 || config_path.empty()) cfg.listen = qp::parse_listen_address(listen);
            if (!runner_path.empty()) cfg.runner_page = runner_path;
            if (!event_log_dir.empty()) cfg.event_log_dir = event_log_dir;
            if (cfg.corpus_path.empty()) throw qp::ValidationError("serve needs --corpus or --config");

            auto corpus = qp::load_corpus(cfg.corpus_path, cfg.contexts, cfg.encodings);
            auto driver = std::make_shared<qp::TestDriver>(std::move(corpus), qp::DriverOptions{cfg.event_log_dir});
            qp::HttpService service(driver, qp::ServiceOptions{cfg.runner_page});
            int port = service.bind(cfg.listen.host, cfg.listen.port);
            std::cerr << "serving " << driver->test_count() << " test cases on http://" << cfg.listen.host << ':' << port
                      << '\n';
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            service.run();
            g_service = nullptr;
        } else if (*sim) {
            auto profiles = qp::load_profiles(profiles_path);
            qp::AgentOptions opts;
            opts.mechanism = *qp::mechanism_from_string(mechanism_name);

            std::unique_ptr<qp::HttpService> local;
            qp::Endpoint ep;
            if (!corpus_path.empty()) {
                auto driver = std::make_shared<qp::TestDriver>(qp::load_corpus(corpus_path));
                local = std::make_unique<qp::HttpService>(driver);
                ep = {"127.0.0.1", local->bind("127.0.0.1", 0)};
                local->start();
            } else if (!server.empty()) {
                ep = qp::parse_endpoint(server);
            } else {
                throw qp::ValidationError("simulate needs --server or --corpus");
            }

            std::vector<std::future<qp::BrowserSignature>> runs;
            for (const auto& p : profiles) runs.push_back(std::async(std::launch::async, [&, p] { return qp::replay(p, ep, opts); }));

            std::optional<qp::SignatureDataset> collected;
            int mismatches = 0;
            for (std::size_t i = 0; i < runs.size(); ++i) {
                auto sig = runs[i].get();
                if (!collected) collected.emplace(sig.attributes);
                if (qp::expected_outcomes(profiles[i], *sig.attributes) != sig.outcomes) {
                    std::cerr << "mismatch: profile '" << profiles[i].label << "'\n";
                    ++mismatches;
                }
                collected->add(std::move(sig));
            }
            if (local) local->stop();
            if (!collected) collected.emplace();
            if (out_path.empty()) {
                qp::write_signatures(std::cout, *collected);
            } else {
                qp::export_signatures(*collected, out_path);
            }
            if (mismatches > 0) return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
