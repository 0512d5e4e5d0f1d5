#include "quirkprint/http_service.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "quirkprint/dataset_io.hpp"
#include "quirkprint/error.hpp"

namespace quirkprint {

using nlohmann::json;

ListenAddress parse_listen_address(std::string_view s) {
    ListenAddress addr;
    auto colon = s.rfind(':');
    std::string_view port_text = s;
    if (colon != std::string_view::npos) {
        if (colon > 0) addr.host = std::string(s.substr(0, colon));
        port_text = s.substr(colon + 1);
    }
    int port = 0;
    auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || p != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw ValidationError("bad listen address '" + std::string(s) + "'");
    }
    addr.port = port;
    return addr;
}

ServiceConfig ServiceConfig::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    ServiceConfig cfg;
    try {
        json j = json::parse(json_text);
        if (j.contains("listen")) cfg.listen = parse_listen_address(j["listen"].get<std::string>());
        cfg.corpus_path = resolve(j.at("corpus").get<std::string>());
        if (j.contains("contexts")) {
            cfg.contexts.clear();
            for (const auto& c : j["contexts"]) {
                cfg.contexts.push_back({c.at("id").get<int>(), c.value("name", std::string{}),
                                        c.value("doctype", std::string{}), c.value("mime_type", "text/html")});
            }
        }
        if (j.contains("encodings")) {
            cfg.encodings.clear();
            for (const auto& e : j["encodings"]) cfg.encodings.push_back({e.at("id").get<int>(), e.at("charset").get<std::string>()});
        }
        if (j.contains("runner_page")) cfg.runner_page = resolve(j["runner_page"].get<std::string>());
        if (j.contains("event_log_dir")) cfg.event_log_dir = resolve(j["event_log_dir"].get<std::string>());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("service config: ") + e.what());
    }
    return cfg;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config " + path.string());
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse(text, path.parent_path());
}

std::string_view pass_image() {
    static constexpr unsigned char kGif[] = {
        'G',  'I',  'F',  '8',  '9',  'a',  0x01, 0x00, 0x01, 0x00, 0x80, 0x00, 0x00,  // header, 1x1, 2-colour table
        0x00, 0xC0, 0x00, 0xFF, 0xFF, 0xFF,                                              // green, white
        0x2C, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00,                      // image descriptor
        0x02, 0x02, 0x44, 0x01, 0x00,                                                    // LZW: colour 0
        0x3B};
    return {reinterpret_cast<const char*>(kGif), sizeof kGif};
}

namespace {

std::optional<std::size_t> parse_index(const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

void not_found(httplib::Response& res, const std::string& why) {
    res.status = 404;
    res.set_content(why + "\n", "text/plain");
}

// Cookie-mechanism callbacks arrive as validation cookies on any later request.
void harvest_cookies(TestDriver& driver, const std::string& token, const httplib::Request& req) {
    if (!req.has_header("Cookie")) return;
    const std::string prefix = "qpv_" + token + "_";
    std::istringstream cookies(req.get_header_value("Cookie"));
    std::string item;
    while (std::getline(cookies, item, ';')) {
        auto first = item.find_first_not_of(' ');
        if (first == std::string::npos) continue;
        std::string_view kv(item);
        kv.remove_prefix(first);
        if (!kv.starts_with(prefix)) continue;
        auto eq = kv.find('=');
        auto idx = parse_index(std::string(kv.substr(prefix.size(), eq - prefix.size())));
        if (!idx || *idx >= driver.test_count()) continue;
        driver.record_pass(token, *idx, CallbackMechanism::Cookie);
    }
}

std::string summary_page(const BrowserSignature& sig) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>done</title></head><body>\n"
        << "<p>Test suite complete: " << sig.count(Outcome::Pass) << " PASS, " << sig.count(Outcome::Sent)
        << " SENT, " << sig.count(Outcome::NA) << " NA.</p>\n</body></html>\n";
    return out.str();
}

std::string signature_file(const TestDriver& driver, const BrowserSignature& sig) {
    SignatureDataset ds(driver.attributes());
    ds.add(sig);
    return signatures_to_string(ds);
}

}  // namespace

struct HttpService::Impl {
    httplib::Server server;
    std::thread thread;
    ServiceOptions options;
};

HttpService::HttpService(std::shared_ptr<TestDriver> driver, ServiceOptions options)
    : driver_(std::move(driver)), impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    auto& srv = impl_->server;
    TestDriver& d = *driver_;

    // Every handler maps NotFound to 404 and other failures to 500.
    auto guarded = [](auto handler) {
        return [handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const NotFound& e) {
                not_found(res, e.what());
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(std::string(e.what()) + "\n", "text/plain");
            }
        };
    };

    srv.Post("/session", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        auto token = d.create_session(req.get_header_value("User-Agent"));
        res.status = 201;
        if (d.test_count() > 0) res.set_header("Location", test_path(token, 0));
        res.set_content(token, "text/plain");
    }));

    srv.Get("/cases", guarded([&d](const httplib::Request&, httplib::Response& res) {
        std::string body;
        for (const auto& name : d.attributes()->names()) body += name + "\n";
        res.set_content(body, "text/plain");
    }));

    srv.Get(R"(/t/([0-9a-f]+)/([^/]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        const std::string token = req.matches[1];
        auto idx = parse_index(req.matches[2]);
        if (!idx) return not_found(res, "bad test index");
        harvest_cookies(d, token, req);
        auto page = d.serve_test(token, *idx);
        res.set_header("Cache-Control", "no-store");
        res.set_header("X-Test-Attribute", d.attributes()->names()[*idx]);
        res.set_content(page.html, page.mime_type + "; charset=" + page.charset);
    }));

    srv.Get(R"(/js/([0-9a-f]+)/([^/]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        const std::string token = req.matches[1];
        auto idx = parse_index(req.matches[2]);
        if (!idx || *idx >= d.test_count()) return not_found(res, "bad test index");
        d.cursor(token);  // existence check
        res.set_header("Cache-Control", "no-store");
        res.set_content(d.payload_script(token, *idx), "application/javascript");
    }));

    srv.Get(R"(/v/([0-9a-f]+)/([^/]+)/([a-z_]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        const std::string token = req.matches[1];
        auto idx = parse_index(req.matches[2]);
        auto mech = mechanism_from_string(req.matches[3].str());
        if (!idx || !mech) return not_found(res, "bad validation URL");
        d.record_pass(token, *idx, *mech);
        res.set_header("Cache-Control", "no-store");
        switch (*mech) {
            case CallbackMechanism::ImgBeacon:
                res.set_content(std::string(pass_image()), "image/gif");
                break;
            case CallbackMechanism::LocationRedirect:
                res.set_content("<!DOCTYPE html>\n<html><body><p>PASS</p></body></html>\n", "text/html");
                break;
            default:
                res.set_content("PASS\n", "text/plain");
        }
    }));

    srv.Get(R"(/n/([0-9a-f]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        const std::string token = req.matches[1];
        harvest_cookies(d, token, req);
        auto step = d.next(token);
        res.set_header("Cache-Control", "no-store");
        res.set_redirect(step.done ? done_path(token) : test_path(token, step.index), 302);
    }));

    srv.Get(R"(/done/([0-9a-f]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        const std::string token = req.matches[1];
        harvest_cookies(d, token, req);
        res.set_content(summary_page(d.finalize(token)), "text/html; charset=utf-8");
    }));

    srv.Post(R"(/finalize/([0-9a-f]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        res.set_content(signature_file(d, d.finalize(req.matches[1])), "text/csv");
    }));

    srv.Get(R"(/sig/([0-9a-f]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        auto sig = d.signature(req.matches[1]);
        if (!sig) {
            res.status = 409;
            res.set_content("session not finalized\n", "text/plain");
            return;
        }
        res.set_content(signature_file(d, *sig), "text/csv");
    }));

    srv.Get(R"(/log/([0-9a-f]+))", guarded([&d](const httplib::Request& req, httplib::Response& res) {
        std::string body;
        for (const auto& e : d.events(req.matches[1])) body += event_to_json(e) + "\n";
        res.set_content(body, "application/x-ndjson");
    }));

    srv.Get("/runner", guarded([this](const httplib::Request&, httplib::Response& res) {
        if (!impl_->options.runner_page) return not_found(res, "no runner page configured");
        std::ifstream in(*impl_->options.runner_page, std::ios::binary);
        if (!in) return not_found(res, "runner page missing");
        std::string body{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        res.set_content(body, "text/html; charset=utf-8");
    }));
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpService::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace quirkprint
