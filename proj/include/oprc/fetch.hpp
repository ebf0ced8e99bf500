#pragma once

// Optional download of CSV exports into the data directory.  Plain HTTP only
// unless cpp-httplib is built with OpenSSL support.

// Eigen must precede httplib: <resolv.h> defines a `_res` macro.
#include "oprc/types.hpp"

#include "httplib.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "oprc/errors.hpp"

namespace oprc {

struct parsed_url {
    std::string scheme_host_port; ///< e.g. "http://example.org:8080"
    std::string path;             ///< starts with '/'
};

inline parsed_url parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw config_error("fetch: invalid URL '" + url + "'");
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw config_error("fetch: unsupported scheme in '" + url + "'");
    auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, "/"};
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

/// GETs `url` and writes the body to `dest`; non-200 responses are errors.
inline void fetch_csv(const std::string& url, const std::filesystem::path& dest) {
    auto u = parse_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (u.scheme_host_port.rfind("https", 0) == 0) throw config_error("fetch: HTTPS support not compiled in");
#endif
    httplib::Client client(u.scheme_host_port);
    client.set_follow_location(true);
    auto res = client.Get(u.path);
    if (!res) throw io_error("fetch: request to '" + url + "' failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw io_error("fetch: '" + url + "' returned HTTP " + std::to_string(res->status));
    if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
    std::ofstream out(dest, std::ios::binary);
    if (!out) throw io_error("fetch: cannot write '" + dest.string() + "'");
    out << res->body;
}

} // namespace oprc
