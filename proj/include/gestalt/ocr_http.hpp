#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>

#include "gestalt/image_io.hpp"
#include "gestalt/ocr.hpp"

namespace gestalt {

struct HttpOcrConfig {
  std::string url;  // http://host[:port]/path
  double timeout_seconds = 10.0;
  int retries = 2;
  std::string token;  // sent as a bearer token when non-empty

  // GESTALT_OCR_URL, GESTALT_OCR_TIMEOUT, GESTALT_OCR_RETRIES and
  // GESTALT_OCR_TOKEN take precedence over configured values.
  void apply_environment() {
    if (const char* v = std::getenv("GESTALT_OCR_URL"); v && *v) url = v;
    if (const char* v = std::getenv("GESTALT_OCR_TIMEOUT"); v && *v) timeout_seconds = std::stod(v);
    if (const char* v = std::getenv("GESTALT_OCR_RETRIES"); v && *v) retries = std::stoi(v);
    if (const char* v = std::getenv("GESTALT_OCR_TOKEN"); v && *v) token = v;
  }
};

// POSTs the raw image bytes and expects the OCR record schema back.
class HttpOcrProvider : public OcrProvider {
 public:
  explicit HttpOcrProvider(HttpOcrConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.url.find("://");
    if (scheme_end == std::string::npos || cfg_.url.substr(0, scheme_end) != "http") {
      throw OcrError("OCR endpoint must be an http:// URL: " + cfg_.url);
    }
    const auto path_start = cfg_.url.find('/', scheme_end + 3);
    base_ = cfg_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);
  }

  std::vector<TextBox> recognize(const std::filesystem::path& image_path) override {
    const auto bytes = read_file_bytes(image_path);
    const std::string body(bytes.begin(), bytes.end());
    httplib::Client client(base_);
    const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!cfg_.token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.token);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      auto res = client.Post(path_, headers, body, "application/octet-stream");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
      } else if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      } else {
        try {
          return parse_ocr_records(nlohmann::json::parse(res->body));
        } catch (const std::exception& e) {
          throw OcrError(cfg_.url + ": malformed OCR response: " + e.what());
        }
      }
      if (attempt < cfg_.retries) std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
    }
    throw OcrError(cfg_.url + ": " + last_error + " (after " + std::to_string(cfg_.retries + 1) +
                   " attempts)");
  }

 private:
  HttpOcrConfig cfg_;
  std::string base_;
  std::string path_;
};

}  // namespace gestalt
