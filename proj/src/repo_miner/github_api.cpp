#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include <spdlog/spdlog.h>

#include "xlb/error.hpp"
#include "xlb/io.hpp"
#include "xlb/repo_miner.hpp"
#include "xlb/version.hpp"

namespace xlb {
namespace {

long now_epoch() {
    return static_cast<long>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

std::optional<long> header_long(const httplib::Result& res, const char* name) {
    if (!res->has_header(name)) return std::nullopt;
    try {
        return std::stol(res->get_header_value(name));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// `<url>; rel="next"` from a Link header.
std::string next_link(const std::string& link) {
    size_t pos = 0;
    while (pos < link.size()) {
        size_t lt = link.find('<', pos);
        if (lt == std::string::npos) break;
        size_t gt = link.find('>', lt);
        if (gt == std::string::npos) break;
        size_t end = link.find(',', gt);
        std::string params = link.substr(gt + 1, end == std::string::npos ? std::string::npos : end - gt - 1);
        if (params.find("rel=\"next\"") != std::string::npos) return link.substr(lt + 1, gt - lt - 1);
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return {};
}

std::string url_encode(const std::string& s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

}  // namespace

void RateGate::before_request() {
    std::lock_guard lock(mu_);
    if (!remaining_ || *remaining_ > 0 || !reset_epoch_) return;
    long wait = *reset_epoch_ - now_epoch();
    if (wait <= 0) {
        remaining_.reset();
        return;
    }
    if (wait > max_wait_) throw RateLimitedError("API quota exhausted", wait);
    spdlog::info("rate limit reached; waiting {} s", wait);
    std::this_thread::sleep_for(std::chrono::seconds(wait));
    remaining_.reset();
}

void RateGate::update(std::optional<long> remaining, std::optional<long> reset_epoch) {
    std::lock_guard lock(mu_);
    if (remaining) remaining_ = remaining;
    if (reset_epoch) reset_epoch_ = reset_epoch;
}

GithubApi::GithubApi(GithubApiOptions options) : opt_(std::move(options)), gate_(opt_.max_wait_seconds) {
    while (opt_.base_url.ends_with("/")) opt_.base_url.pop_back();
}

GithubApiOptions GithubApi::options_from_env(std::filesystem::path cache_dir) {
    const char* token = std::getenv("XLB_GITHUB_TOKEN");
    if (!token || !*token) throw Error(ErrorKind::api_auth, "XLB_GITHUB_TOKEN is not set");
    GithubApiOptions o;
    o.token = token;
    o.cache_dir = std::move(cache_dir);
    return o;
}

GithubApi::Response GithubApi::get(const std::string& path_and_query) {
    const std::string url = opt_.base_url + path_and_query;
    std::filesystem::path cache_file;
    if (!opt_.cache_dir.empty()) {
        cache_file = opt_.cache_dir / (sha256_hex(url) + ".json");
        if (std::filesystem::exists(cache_file)) {
            try {
                auto j = nlohmann::json::parse(read_file(cache_file));
                return Response{j.at("body").get<std::string>(), j.at("next").get<std::string>()};
            } catch (const std::exception& e) {
                spdlog::warn("ignoring corrupt cache entry {}: {}", cache_file.string(), e.what());
            }
        }
    }

    httplib::Client cli(opt_.base_url);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(60);
    httplib::Headers headers = {{"Accept", "application/vnd.github+json"},
                                {"User-Agent", "xlb/" + std::string(kToolVersion)},
                                {"X-GitHub-Api-Version", "2022-11-28"}};
    if (!opt_.token.empty()) headers.emplace("Authorization", "Bearer " + opt_.token);

    std::string last_error;
    for (int attempt = 0; attempt <= opt_.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
        gate_.before_request();
        auto res = cli.Get(path_and_query, headers);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        auto remaining = header_long(res, "X-RateLimit-Remaining");
        gate_.update(remaining, header_long(res, "X-RateLimit-Reset"));
        int status = res->status;
        if (status == 200) {
            Response r{res->body, next_link(res->get_header_value("Link"))};
            if (!r.next.empty()) {
                if (!r.next.starts_with(opt_.base_url))
                    throw Error(ErrorKind::api_unavailable, "pagination left the API host: " + r.next);
                r.next = r.next.substr(opt_.base_url.size());
            }
            if (!cache_file.empty()) {
                nlohmann::json j = {{"url", url}, {"body", r.body}, {"next", r.next}};
                write_file_atomic(cache_file, j.dump());
            }
            return r;
        }
        if (status == 401) throw Error(ErrorKind::api_auth, "authentication failed for " + url);
        auto retry_after = header_long(res, "Retry-After");
        bool limited = status == 429 || (status == 403 && (retry_after || (remaining && *remaining == 0)));
        if (limited) {
            long wait = retry_after ? *retry_after : std::max(0L, header_long(res, "X-RateLimit-Reset").value_or(0) - now_epoch());
            if (wait > opt_.max_wait_seconds || attempt == opt_.retries)
                throw RateLimitedError("rate limited on " + url, wait);
            std::this_thread::sleep_for(std::chrono::seconds(wait));
            continue;
        }
        if (status == 403) throw Error(ErrorKind::api_auth, "access forbidden for " + url);
        last_error = "HTTP " + std::to_string(status);
        if (status < 500) break;
    }
    throw Error(ErrorKind::api_unavailable, url + ": " + last_error);
}

std::vector<nlohmann::json> GithubApi::get_pages(const std::string& path_and_query, size_t max_pages) {
    std::vector<nlohmann::json> pages;
    std::string next = path_and_query;
    while (!next.empty() && pages.size() < max_pages) {
        Response r = get(next);
        try {
            pages.push_back(nlohmann::json::parse(r.body));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::api_unavailable, "invalid JSON from " + next + ": " + e.what());
        }
        next = r.next;
    }
    return pages;
}

std::vector<RepoSummary> GithubApi::search_repositories(const std::string& language, int min_stars) {
    std::string q = "language:" + language + " stars:>=" + std::to_string(min_stars);
    std::vector<RepoSummary> out;
    for (const auto& page : get_pages("/search/repositories?q=" + url_encode(q) + "&sort=stars&order=desc&per_page=100")) {
        try {
            for (const auto& item : page.at("items")) {
                RepoSummary s;
                s.full_name = item.at("full_name").get<std::string>();
                s.stars = item.at("stargazers_count").get<int64_t>();
                if (item.contains("description") && item["description"].is_string())
                    s.description = item["description"].get<std::string>();
                s.default_branch = item.value("default_branch", "main");
                s.clone_url = item.value("clone_url", "");
                out.push_back(std::move(s));
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::api_unavailable, std::string("unexpected search response: ") + e.what());
        }
    }
    return out;
}

std::map<std::string, int64_t> GithubApi::repository_languages(const std::string& full_name) {
    auto pages = get_pages("/repos/" + full_name + "/languages", 1);
    try {
        return pages.at(0).get<std::map<std::string, int64_t>>();
    } catch (const std::exception& e) {
        throw Error(ErrorKind::api_unavailable, "unexpected languages response for " + full_name + ": " + e.what());
    }
}

std::vector<IssueRecord> GithubApi::list_issues(const std::string& full_name) {
    std::vector<IssueRecord> out;
    for (const auto& page : get_pages("/repos/" + full_name + "/issues?state=closed&per_page=100")) {
        try {
            for (const auto& item : page) {
                if (item.contains("pull_request")) continue;
                IssueRecord i;
                i.repo = full_name;
                i.number = item.at("number").get<int64_t>();
                i.state = item.value("state", "") == "closed" ? IssueState::closed : IssueState::open;
                for (const auto& l : item.value("labels", nlohmann::json::array())) {
                    if (l.is_string()) i.labels.push_back(l.get<std::string>());
                    else if (l.is_object() && l.contains("name")) i.labels.push_back(l["name"].get<std::string>());
                }
                if (item.contains("title") && item["title"].is_string()) i.title = item["title"].get<std::string>();
                if (item.contains("body") && item["body"].is_string()) i.body = item["body"].get<std::string>();
                out.push_back(std::move(i));
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::api_unavailable, "unexpected issues response for " + full_name + ": " + e.what());
        }
    }
    return out;
}

}  // namespace xlb
