#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quirkprint/corpus.hpp"
#include "quirkprint/driver.hpp"

namespace quirkprint {

struct ListenAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

// "host:port", ":port" or "port".
ListenAddress parse_listen_address(std::string_view s);

struct ServiceConfig {
    ListenAddress listen;
    std::filesystem::path corpus_path;
    std::vector<WebContext> contexts = default_contexts();
    std::vector<Encoding> encodings = default_encodings();
    std::optional<std::filesystem::path> runner_page;
    std::optional<std::filesystem::path> event_log_dir;

    // JSON object; relative paths resolve against the config file's directory.
    static ServiceConfig load(const std::filesystem::path& path);
    static ServiceConfig parse(std::string_view json_text, const std::filesystem::path& base_dir = {});
};

struct ServiceOptions {
    // Static page served at GET /runner.
    std::optional<std::filesystem::path> runner_page;
};

// 1x1 green GIF returned to image-beacon callbacks.
std::string_view pass_image();

// HTTP front end of a TestDriver.
//
//   POST /session                      -> 201, body = token, Location = first test
//   GET  /cases                        -> attribute names, one per line, in index order
//   GET  /t/{token}/{index}            -> test page
//   GET  /js/{token}/{index}           -> payload script for external_js_url vectors
//   GET  /v/{token}/{index}/{mech}     -> validation callback
//   GET  /n/{token}                    -> 302 to the next test or to /done/{token}
//   GET  /done/{token}                 -> finalizes and shows a summary
//   POST /finalize/{token}             -> finalizes, returns the signature file
//   GET  /sig/{token}                  -> signature file (409 until finalized)
//   GET  /log/{token}                  -> event log, one JSON object per line
//   GET  /runner                       -> runner page, when configured
class HttpService {
public:
    explicit HttpService(std::shared_ptr<TestDriver> driver, ServiceOptions options = {});
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Port 0 picks a free port. Returns the bound port; throws Error on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void run();
    // run() on a background thread.
    void start();
    void stop();

    TestDriver& driver() noexcept { return *driver_; }

private:
    struct Impl;
    std::shared_ptr<TestDriver> driver_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace quirkprint
