#include <cstdlib>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "avacraft/backend.hpp"
#include "avacraft/base64.hpp"
#include "avacraft/error.hpp"

namespace ava {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

// "https://host:443/v1/chat" -> ("https://host:443", "/v1/chat")
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path == std::string::npos) return {url, "/"};
    return {url.substr(0, path), url.substr(path)};
}

}  // namespace

RemoteProfile remote_profile_from_env(const std::string& model) {
    RemoteProfile p;
    p.url = env_or("AVA_API_URL", "");
    p.api_key = env_or("AVA_API_KEY", "");
    p.model = model.empty() ? env_or("AVA_MODEL", p.model) : model;
    return p;
}

std::string chat_request_body(const RemoteProfile& profile, const PromptBundle& bundle) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", bundle.text}});
    if (bundle.image_png)
        content.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(*bundle.image_png)}}}});
    json body = {{"model", profile.model}, {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
    return body.dump();
}

std::string chat_response_text(const std::string& body) {
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw BackendUnavailable("chat response is not JSON");
    try {
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return content.get<std::string>();
        std::string out;
        for (const auto& part : content)
            if (part.value("type", "") == "text") out += part.value("text", "");
        return out;
    } catch (const json::exception&) {
        throw BackendUnavailable("chat response has no choices[0].message.content");
    }
}

std::string RemoteChatBackend::query(const PromptBundle& bundle) {
    const std::string body = chat_request_body(profile_, bundle);
    if (profile_.dry_run) {
        std::cerr << "--- " << to_string(bundle.stage) << " prompt (" << bundle.text.size() << " chars"
                  << (bundle.image_png ? ", with image" : "") << ") ---\n"
                  << bundle.text << '\n';
        return "";
    }
    const auto [host, path] = split_url(profile_.url);
    httplib::Client cli(host);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(profile_.timeout).count();
    cli.set_connection_timeout(static_cast<time_t>(secs));
    cli.set_read_timeout(static_cast<time_t>(secs));
    httplib::Headers headers;
    if (!profile_.api_key.empty()) headers.emplace("Authorization", "Bearer " + profile_.api_key);
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= profile_.retries; ++attempt) {
        auto res = cli.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw BackendUnavailable("chat endpoint returned HTTP " + std::to_string(res->status));
        return chat_response_text(res->body);
    }
    throw BackendUnavailable("chat endpoint unreachable: " + last_error);
}

}  // namespace ava
