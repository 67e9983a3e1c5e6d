#include "rtriage/fetch.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <thread>
#include <unistd.h>

namespace rtriage {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(FetchStatus s)
{
    switch (s) {
    case FetchStatus::ok: return "ok";
    case FetchStatus::invalid_address: return "invalid_address";
    case FetchStatus::missing_credential: return "missing_credential";
    case FetchStatus::invalid_endpoint: return "invalid_endpoint";
    case FetchStatus::output_error: return "output_error";
    case FetchStatus::network_failure: return "network_failure";
    case FetchStatus::bad_response: return "bad_response";
    case FetchStatus::not_verified: return "not_verified";
    case FetchStatus::rate_limited: return "rate_limited";
    }
    return "unknown";
}

int exit_code(FetchStatus s)
{
    switch (s) {
    case FetchStatus::ok: return 0;
    case FetchStatus::invalid_address:
    case FetchStatus::missing_credential:
    case FetchStatus::invalid_endpoint:
    case FetchStatus::output_error: return 2;
    case FetchStatus::network_failure:
    case FetchStatus::bad_response: return 3;
    case FetchStatus::not_verified: return 4;
    case FetchStatus::rate_limited: return 5;
    }
    return 3;
}

bool is_valid_address(std::string_view a)
{
    if (a.size() == 42 && a[0] == '0' && (a[1] == 'x' || a[1] == 'X'))
        a.remove_prefix(2);
    return a.size() == 40 && std::all_of(a.begin(), a.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string percent_encode(std::string_view s)
{
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out += static_cast<char>(c);
        else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

void replace_all(std::string& s, std::string_view from, const std::string& to)
{
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::vector<std::pair<std::string, std::string>> sources_from_json(const json& sources)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (auto it = sources.begin(); it != sources.end(); ++it) {
        if (it->is_object() && it->contains("content") && (*it)["content"].is_string())
            out.emplace_back(it.key(), (*it)["content"].get<std::string>());
        else if (it->is_string())
            out.emplace_back(it.key(), it->get<std::string>());
    }
    return out;
}

} // namespace

std::string safe_source_name(std::string_view path)
{
    std::string out;
    std::string part;
    auto flush = [&] {
        if (!part.empty() && part != "." && part != "..")
            out += (out.empty() ? "" : "_") + part;
        part.clear();
    };
    for (char c : path) {
        if (c == '/' || c == '\\')
            flush();
        else if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
            part += c;
        else
            part += '_';
    }
    flush();
    while (!out.empty() && out.front() == '.')
        out.erase(out.begin());
    if (out.empty())
        out = "source";
    if (out.size() < 4 || out.compare(out.size() - 4, 4, ".sol") != 0)
        out += ".sol";
    return out;
}

SourceBundle parse_source_response(std::string_view body, FetchStatus& status, std::string& message)
{
    SourceBundle bundle;
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("result")) {
        status = FetchStatus::bad_response;
        message = "response is not an explorer JSON object";
        return bundle;
    }
    const json& result = j["result"];
    if (result.is_string()) {
        std::string text = result.get<std::string>();
        std::string l = lower(text);
        if (l.find("rate limit") != std::string::npos)
            status = FetchStatus::rate_limited;
        else if (l.find("not verified") != std::string::npos)
            status = FetchStatus::not_verified;
        else
            status = FetchStatus::bad_response;
        message = text;
        return bundle;
    }
    if (!result.is_array() || result.empty() || !result[0].is_object()) {
        status = FetchStatus::bad_response;
        message = "response has no source entry";
        return bundle;
    }
    const json& entry = result[0];
    std::string source = entry.value("SourceCode", "");
    bundle.contract_name = entry.value("ContractName", "");
    bundle.compiler_version = entry.value("CompilerVersion", "");
    if (source.empty()) {
        status = FetchStatus::not_verified;
        message = "contract source code not verified";
        return bundle;
    }
    // Multi-file payloads come as JSON, standard-input style wrapped in an extra brace pair.
    std::string_view sv = source;
    if (sv.size() >= 4 && sv.substr(0, 2) == "{{" && sv.substr(sv.size() - 2) == "}}")
        sv = sv.substr(1, sv.size() - 2);
    if (!sv.empty() && sv.front() == '{') {
        json inner = json::parse(sv, nullptr, false);
        if (!inner.is_discarded() && inner.is_object()) {
            bundle.sources = sources_from_json(inner.contains("sources") ? inner["sources"] : inner);
            if (bundle.sources.empty()) {
                status = FetchStatus::bad_response;
                message = "source payload lists no sources";
                return bundle;
            }
            status = FetchStatus::ok;
            return bundle;
        }
    }
    bundle.sources.emplace_back((bundle.contract_name.empty() ? std::string("contract") : bundle.contract_name) + ".sol",
                                source);
    status = FetchStatus::ok;
    return bundle;
}

bool write_files_atomically(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files,
                            std::string& error)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        error = "cannot create output directory " + dir.string();
        return false;
    }
    std::vector<fs::path> temps;
    std::vector<fs::path> placed;
    auto rollback = [&] {
        for (const auto& p : temps)
            fs::remove(p, ec);
        for (const auto& p : placed)
            fs::remove(p, ec);
    };
    const std::string tag = ".part-" + std::to_string(::getpid());
    for (const auto& [name, content] : files) {
        fs::path tmp = dir / ("." + name + tag);
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            error = "cannot write " + tmp.string();
            rollback();
            return false;
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::path final_path = dir / files[i].first;
        fs::rename(temps[i], final_path, ec);
        if (ec) {
            error = "cannot place " + final_path.string() + ": " + ec.message();
            rollback();
            return false;
        }
        placed.push_back(final_path);
    }
    return true;
}

FetchResult fetch_source(std::string_view address, const fs::path& out_dir, const FetchConfig& config)
{
    FetchResult result;
    if (!is_valid_address(address)) {
        result.status = FetchStatus::invalid_address;
        result.message = "address must be 40 hex digits, optionally 0x-prefixed";
        return result;
    }
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key) {
        result.status = FetchStatus::missing_credential;
        result.message = "set the " + config.api_key_env + " environment variable to the explorer API key";
        return result;
    }
    std::string addr = lower(std::string(address));
    if (addr.rfind("0x", 0) != 0)
        addr = "0x" + addr;

    std::string url = config.url_template;
    replace_all(url, "{address}", addr);
    replace_all(url, "{apikey}", percent_encode(key));
    static const std::regex url_re(R"(^(https?://[^/?#]+)([^#]*)$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, url_re)) {
        result.status = FetchStatus::invalid_endpoint;
        result.message = "endpoint template is not an http(s) URL";
        return result;
    }
    std::string origin = m[1];
    std::string target = m[2].length() ? std::string(m[2]) : std::string("/");

    httplib::Client client(origin);
    if (!client.is_valid()) {
        result.status = FetchStatus::invalid_endpoint;
        result.message = "unsupported endpoint " + origin;
        return result;
    }
    auto timeout = std::chrono::duration<double>(config.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_follow_location(true);

    SourceBundle bundle;
    double backoff = config.backoff_seconds;
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
        ++result.attempts;
        auto res = client.Get(target);
        if (!res) {
            result.status = FetchStatus::network_failure;
            result.message = "request to " + origin + " failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429) {
            result.status = FetchStatus::rate_limited;
            result.message = "endpoint answered 429 Too Many Requests";
            continue;
        }
        if (res->status >= 500) {
            result.status = FetchStatus::network_failure;
            result.message = "endpoint answered HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            result.status = FetchStatus::bad_response;
            result.message = "endpoint answered HTTP " + std::to_string(res->status);
            return result;
        }
        bundle = parse_source_response(res->body, result.status, result.message);
        if (result.status == FetchStatus::rate_limited)
            continue;
        break;
    }
    if (result.status != FetchStatus::ok)
        return result;

    std::vector<std::pair<std::string, std::string>> files;
    std::set<std::string> used;
    json names = json::array();
    for (const auto& [path, content] : bundle.sources) {
        std::string name = safe_source_name(path);
        std::string stem = name.substr(0, name.size() - 4);
        for (int n = 2; !used.insert(name).second; ++n)
            name = stem + "_" + std::to_string(n) + ".sol";
        files.emplace_back(name, content);
        names.push_back(json{{"file", name}, {"source_path", path}});
    }
    json meta;
    meta["address"] = addr;
    meta["contract_name"] = bundle.contract_name;
    meta["compiler_version"] = bundle.compiler_version;
    meta["sources"] = names;
    std::string meta_name = addr + ".metadata.json";
    files.emplace_back(meta_name, meta.dump(2) + "\n");

    std::string error;
    if (!write_files_atomically(out_dir, files, error)) {
        result.status = FetchStatus::output_error;
        result.message = error;
        return result;
    }
    for (std::size_t i = 0; i + 1 < files.size(); ++i)
        result.files.push_back(out_dir / files[i].first);
    result.metadata = out_dir / meta_name;
    result.message = "wrote " + std::to_string(result.files.size()) + " source file(s)";
    return result;
}

} // namespace rtriage
